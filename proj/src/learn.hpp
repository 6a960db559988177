#ifndef CCP_LEARN_HPP
#define CCP_LEARN_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace ccp {

enum class LearnerKind { DecisionTree, RandomForest, NaiveBayes, Logistic, Bagging };

const char* learner_name(LearnerKind kind);
LearnerKind parse_learner(const std::string& name);

struct LearnerSpec {
    LearnerKind kind = LearnerKind::RandomForest;
    std::uint64_t seed = 1;
    // Defaults mirror the usual WEKA parameters.
    std::size_t min_leaf = 2;        // J48 -M
    double confidence = 0.25;        // J48 -C (post-pruning is not performed; kept for the record)
    std::size_t forest_trees = 100;  // RandomForest -l
    std::size_t bagging_rounds = 10; // Bagging -l
    double ridge = 1e-8;             // Logistic -R
    std::size_t max_iters = 100;
    double tol = 1e-8;
};

struct TreeNode {
    bool leaf = true;
    bool predict_yes = false;
    double pos_fraction = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool missing_goes_left = true;
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    bool predict(const std::vector<std::optional<double>>& values) const;
    double pos_fraction(const std::vector<std::optional<double>>& values) const;
};

struct GaussianNB {
    double prior_yes = 0.5;
    std::vector<double> mean_yes, var_yes, mean_no, var_no;
};

struct LogisticModel {
    std::vector<double> weights;  // one per feature
    double intercept = 0.0;
    std::vector<double> feature_means;  // imputation for missing values
};

struct TrainedModel {
    LearnerSpec spec;
    std::vector<std::string> feature_names;
    std::size_t train_rows = 0;
    std::size_t train_positives = 0;

    Tree tree;                 // DecisionTree
    std::vector<Tree> trees;   // RandomForest / Bagging
    GaussianNB nb;             // NaiveBayes
    LogisticModel logistic;    // Logistic
};

struct SampleEval {
    std::uint64_t seed = 0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct EvalAggregate {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct EvalReport {
    std::string learner;
    LearnerSpec spec;
    std::vector<SampleEval> samples;
    EvalAggregate mean, stddev;
};

TrainedModel train(const LearnerSpec& spec, const FeatureMatrix& matrix);
bool predict(const TrainedModel& model, const FeatureRow& row);
double predict_score(const TrainedModel& model, const FeatureRow& row);

// precision = TP/(TP+FP) (0 when the denominator is 0), recall = TP/(TP+FN),
// F1 = harmonic mean (0 when P+R = 0).
SampleEval evaluate(const TrainedModel& model, const FeatureMatrix& test);

// Split once; for each repeat seed undersample the train side, fit, score the
// untouched test side; aggregate mean and (population) standard deviation.
EvalReport run_protocol(const LearnerSpec& spec, const FeatureMatrix& matrix,
                        const SampleSpec& sample);

// Equal-frequency discretization into <= bins categories, then IG/IV; 0 when
// IV = 0. Rows missing the feature are excluded.
double igr(const FeatureMatrix& matrix, const std::string& feature_name, std::size_t bins = 10);

struct IgrEntry {
    std::string feature;
    double igr = 0.0;
    std::size_t rank = 0;
};

std::vector<IgrEntry> igr_rank(const FeatureMatrix& matrix, std::size_t bins = 10);

struct PcaProjection {
    std::vector<std::string> input_features;
    std::vector<double> means;
    std::vector<std::vector<double>> components;  // row-major, one kept component each
    std::vector<double> eigenvalues;              // of the kept components
    double total_variance = 0.0;
    std::vector<std::string> warnings;

    FeatureMatrix apply(const FeatureMatrix& matrix) const;
};

// Mean-center, eigendecompose the covariance with cyclic Jacobi rotations, and
// keep the minimal leading components reaching the variance fraction.
PcaProjection pca_fit(const FeatureMatrix& matrix, double variance = 0.95);

struct SelectionResult {
    std::vector<std::string> subset;  // sorted
    double score = 0.0;               // mean F1 under the inner protocol
    std::size_t evaluated_subsets = 0;
};

// Best-first search from the empty subset; expansions add or remove one
// feature; stops after `patience` consecutive expansions without a 0.1%
// relative improvement. Ties prefer the smaller, then lexicographically
// earlier subset.
SelectionResult wrapper_select(const LearnerSpec& spec, const FeatureMatrix& matrix,
                               const SampleSpec& inner = {1, 5}, std::size_t patience = 5);

FeatureMatrix project_features(const FeatureMatrix& matrix,
                               const std::vector<std::string>& features);

void write_eval_report(const EvalReport& report, std::ostream& out);
void write_igr_rank(const std::vector<IgrEntry>& entries, std::ostream& out);
void write_selection(const std::string& learner, const SelectionResult& result,
                     std::ostream& out);

}  // namespace ccp

#endif
