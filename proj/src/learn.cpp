#include "learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace ccp {

namespace {

using Row = FeatureRow;

constexpr double kPi = 3.141592653589793238462643383279502884;

double entropy2(std::size_t yes, std::size_t no) {
    std::size_t n = yes + no;
    if (n == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : {yes, no}) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain_ratio = 0.0;
    bool missing_goes_left = true;
};

// Binary numeric-threshold split maximizing gain ratio over the rows whose
// feature value is present; missing rows follow the larger side.
SplitChoice best_split(const FeatureMatrix& matrix, const std::vector<std::size_t>& rows,
                       const std::vector<int>& features, std::size_t min_leaf) {
    SplitChoice best;
    std::size_t yes_total = 0;
    for (std::size_t r : rows) yes_total += matrix.rows[r].impacted ? 1 : 0;
    for (int f : features) {
        std::vector<std::pair<double, bool>> present;
        std::size_t missing = 0, missing_yes = 0;
        for (std::size_t r : rows) {
            const auto& v = matrix.rows[r].values[static_cast<std::size_t>(f)];
            if (v) {
                present.emplace_back(*v, matrix.rows[r].impacted);
            } else {
                ++missing;
                missing_yes += matrix.rows[r].impacted ? 1 : 0;
            }
        }
        if (present.size() < 2) continue;
        std::sort(present.begin(), present.end());
        std::size_t present_yes = yes_total - missing_yes;
        double parent_h = entropy2(present_yes, present.size() - present_yes);
        std::size_t left_n = 0, left_yes = 0;
        for (std::size_t i = 0; i + 1 < present.size(); ++i) {
            ++left_n;
            left_yes += present[i].second ? 1 : 0;
            if (present[i].first == present[i + 1].first) continue;
            std::size_t right_n = present.size() - left_n;
            std::size_t right_yes = present_yes - left_yes;
            bool to_left = left_n >= right_n;
            std::size_t left_total = left_n + (to_left ? missing : 0);
            std::size_t right_total = right_n + (to_left ? 0 : missing);
            if (left_total < min_leaf || right_total < min_leaf) continue;
            double pl = static_cast<double>(left_n) / static_cast<double>(present.size());
            double pr = 1.0 - pl;
            double gain = parent_h - pl * entropy2(left_yes, left_n - left_yes) -
                          pr * entropy2(right_yes, right_n - right_yes);
            if (gain <= 1e-12) continue;
            double split_info = 0.0;
            if (pl > 0) split_info -= pl * std::log2(pl);
            if (pr > 0) split_info -= pr * std::log2(pr);
            if (split_info <= 1e-12) continue;
            double ratio = gain / split_info;
            if (!best.found || ratio > best.gain_ratio + 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (present[i].first + present[i + 1].first);
                best.gain_ratio = ratio;
                best.missing_goes_left = to_left;
            }
        }
    }
    return best;
}

int grow_tree(Tree& tree, const FeatureMatrix& matrix, const std::vector<std::size_t>& rows,
              std::size_t min_leaf, std::size_t feature_candidates, std::mt19937_64* rng) {
    std::size_t yes = 0;
    for (std::size_t r : rows) yes += matrix.rows[r].impacted ? 1 : 0;

    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(id)].pos_fraction =
        rows.empty() ? 0.0 : static_cast<double>(yes) / static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].predict_yes = 2 * yes > rows.size();

    std::size_t d = matrix.feature_names.size();
    bool pure = yes == 0 || yes == rows.size();
    if (pure || rows.size() < 2 * min_leaf || d == 0) return id;

    std::vector<int> features;
    if (rng && feature_candidates < d) {
        std::vector<int> all(d);
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t i = 0; i < feature_candidates; ++i) {
            std::size_t j = i + static_cast<std::size_t>((*rng)() % (d - i));
            std::swap(all[i], all[j]);
        }
        features.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(feature_candidates));
        std::sort(features.begin(), features.end());
    } else {
        features.resize(d);
        std::iota(features.begin(), features.end(), 0);
    }

    SplitChoice split = best_split(matrix, rows, features, min_leaf);
    if (!split.found) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        const auto& v = matrix.rows[r].values[static_cast<std::size_t>(split.feature)];
        bool goes_left = v ? *v <= split.threshold : split.missing_goes_left;
        (goes_left ? left_rows : right_rows).push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) return id;

    int left = grow_tree(tree, matrix, left_rows, min_leaf, feature_candidates, rng);
    int right = grow_tree(tree, matrix, right_rows, min_leaf, feature_candidates, rng);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.missing_goes_left = split.missing_goes_left;
    node.left = left;
    node.right = right;
    return id;
}

Tree fit_tree(const FeatureMatrix& matrix, const std::vector<std::size_t>& rows,
              std::size_t min_leaf, std::size_t feature_candidates = 0,
              std::mt19937_64* rng = nullptr) {
    Tree tree;
    grow_tree(tree, matrix, rows, min_leaf, feature_candidates, rng);
    return tree;
}

std::vector<std::size_t> bootstrap(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng() % n);
    return rows;
}

void check_trainable(const FeatureMatrix& matrix) {
    if (matrix.rows.size() < 2) throw_domain("training needs at least two rows");
    std::size_t pos = matrix.positive_count();
    if (pos == 0 || pos == matrix.rows.size())
        throw_domain("SingleClassTraining: both labels must be present");
    for (const auto& row : matrix.rows)
        for (const auto& v : row.values)
            if (v && !std::isfinite(*v)) throw_domain("NonFiniteFeature");
}

GaussianNB fit_nb(const FeatureMatrix& matrix) {
    std::size_t d = matrix.feature_names.size();
    GaussianNB nb;
    nb.mean_yes.assign(d, 0.0);
    nb.var_yes.assign(d, 0.0);
    nb.mean_no.assign(d, 0.0);
    nb.var_no.assign(d, 0.0);
    std::size_t pos = matrix.positive_count();
    nb.prior_yes = static_cast<double>(pos) / static_cast<double>(matrix.rows.size());
    for (std::size_t f = 0; f < d; ++f) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (bool cls : {true, false}) {
            double sum = 0.0, sq = 0.0;
            std::size_t n = 0;
            for (const auto& row : matrix.rows) {
                if (row.impacted != cls) continue;
                const auto& v = row.values[f];
                if (!v) continue;
                sum += *v;
                sq += *v * *v;
                ++n;
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
            double mean = n ? sum / static_cast<double>(n) : 0.0;
            double var = n ? std::max(0.0, sq / static_cast<double>(n) - mean * mean) : 0.0;
            (cls ? nb.mean_yes : nb.mean_no)[f] = mean;
            (cls ? nb.var_yes : nb.var_no)[f] = var;
        }
        double range = hi > lo ? hi - lo : 0.0;
        double floor = std::max(1e-9 * range * range, 1e-9);
        nb.var_yes[f] = std::max(nb.var_yes[f], floor);
        nb.var_no[f] = std::max(nb.var_no[f], floor);
    }
    return nb;
}

// Solve A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (std::abs(a[col][col]) < 1e-14) continue;
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = a[r][col] / a[col][col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
        x[ri] = std::abs(a[ri][ri]) < 1e-14 ? 0.0 : acc / a[ri][ri];
    }
    return x;
}

LogisticModel fit_logistic(const FeatureMatrix& matrix, const LearnerSpec& spec) {
    std::size_t d = matrix.feature_names.size();
    std::size_t n = matrix.rows.size();
    LogisticModel model;
    model.feature_means.assign(d, 0.0);
    for (std::size_t f = 0; f < d; ++f) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& row : matrix.rows)
            if (row.values[f]) {
                sum += *row.values[f];
                ++count;
            }
        model.feature_means[f] = count ? sum / static_cast<double>(count) : 0.0;
    }
    // Dense design matrix with a trailing intercept column; missing values
    // imputed with the training mean.
    std::vector<std::vector<double>> x(n, std::vector<double>(d + 1, 1.0));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t f = 0; f < d; ++f)
            x[r][f] = matrix.rows[r].values[f] ? *matrix.rows[r].values[f] : model.feature_means[f];
        y[r] = matrix.rows[r].impacted ? 1.0 : 0.0;
    }
    std::vector<double> w(d + 1, 0.0);
    auto loss = [&] {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double z = 0.0;
            for (std::size_t c = 0; c <= d; ++c) z += x[r][c] * w[c];
            // log(1 + e^z) computed stably
            double log1pe = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            total += log1pe - y[r] * z;
        }
        for (std::size_t c = 0; c < d; ++c) total += 0.5 * spec.ridge * w[c] * w[c];
        return total;
    };
    double prev_loss = loss();
    for (std::size_t iter = 0; iter < spec.max_iters; ++iter) {
        std::vector<std::vector<double>> hess(d + 1, std::vector<double>(d + 1, 0.0));
        std::vector<double> grad(d + 1, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double z = 0.0;
            for (std::size_t c = 0; c <= d; ++c) z += x[r][c] * w[c];
            double p = 1.0 / (1.0 + std::exp(-z));
            double wt = std::max(p * (1.0 - p), 1e-10);
            for (std::size_t c = 0; c <= d; ++c) {
                grad[c] += x[r][c] * (y[r] - p);
                for (std::size_t c2 = 0; c2 <= d; ++c2) hess[c][c2] += wt * x[r][c] * x[r][c2];
            }
        }
        for (std::size_t c = 0; c < d; ++c) {
            grad[c] -= spec.ridge * w[c];
            hess[c][c] += spec.ridge;
        }
        hess[d][d] += 1e-12;  // keep the intercept row invertible on degenerate data
        std::vector<double> step = solve_linear(std::move(hess), std::move(grad));
        for (std::size_t c = 0; c <= d; ++c) w[c] += step[c];
        double cur_loss = loss();
        if (std::abs(prev_loss - cur_loss) < spec.tol) break;
        prev_loss = cur_loss;
    }
    model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
    model.intercept = w[d];
    return model;
}

double logistic_score(const LogisticModel& model, const FeatureRow& row) {
    double z = model.intercept;
    for (std::size_t f = 0; f < model.weights.size(); ++f) {
        double v = row.values[f] ? *row.values[f] : model.feature_means[f];
        z += model.weights[f] * v;
    }
    return 1.0 / (1.0 + std::exp(-z));
}

double nb_score(const GaussianNB& nb, const FeatureRow& row) {
    double log_yes = std::log(std::max(nb.prior_yes, 1e-300));
    double log_no = std::log(std::max(1.0 - nb.prior_yes, 1e-300));
    for (std::size_t f = 0; f < nb.mean_yes.size(); ++f) {
        const auto& v = row.values[f];
        if (!v) continue;  // a missing feature contributes no likelihood term
        auto log_density = [&](double mean, double var) {
            double diff = *v - mean;
            return -0.5 * std::log(2.0 * kPi * var) - diff * diff / (2.0 * var);
        };
        log_yes += log_density(nb.mean_yes[f], nb.var_yes[f]);
        log_no += log_density(nb.mean_no[f], nb.var_no[f]);
    }
    double m = std::max(log_yes, log_no);
    double ey = std::exp(log_yes - m), en = std::exp(log_no - m);
    return ey / (ey + en);
}

double vote_score(const std::vector<Tree>& trees, const FeatureRow& row) {
    std::size_t yes = 0;
    for (const auto& tree : trees) yes += tree.predict(row.values) ? 1 : 0;
    return static_cast<double>(yes) / static_cast<double>(trees.size());
}

std::pair<EvalAggregate, EvalAggregate> aggregate(const std::vector<SampleEval>& samples) {
    EvalAggregate mean, stddev;
    if (samples.empty()) return {mean, stddev};
    double n = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        mean.precision += s.precision;
        mean.recall += s.recall;
        mean.f1 += s.f1;
    }
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    for (const auto& s : samples) {
        stddev.precision += (s.precision - mean.precision) * (s.precision - mean.precision);
        stddev.recall += (s.recall - mean.recall) * (s.recall - mean.recall);
        stddev.f1 += (s.f1 - mean.f1) * (s.f1 - mean.f1);
    }
    stddev.precision = std::sqrt(stddev.precision / n);
    stddev.recall = std::sqrt(stddev.recall / n);
    stddev.f1 = std::sqrt(stddev.f1 / n);
    return {mean, stddev};
}

// Equal-frequency categories over the present values; equal values always
// share a category.
std::vector<std::size_t> discretize(std::vector<std::pair<double, std::size_t>>& values,
                                    std::size_t bins, std::size_t row_count) {
    std::sort(values.begin(), values.end());
    std::vector<std::size_t> category(row_count, 0);
    std::size_t n = values.size();
    // bin by sorted position, then pull runs of equal values into the category
    // of their first occurrence
    for (std::size_t i = 0; i < n; ++i) category[values[i].second] = i * bins / n;
    for (std::size_t i = 1; i < n; ++i)
        if (values[i].first == values[i - 1].first)
            category[values[i].second] = category[values[i - 1].second];
    return category;
}

nlohmann::ordered_json spec_json(const LearnerSpec& spec) {
    nlohmann::ordered_json params;
    params["seed"] = spec.seed;
    switch (spec.kind) {
        case LearnerKind::DecisionTree:
            params["confidence"] = spec.confidence;
            params["min_leaf"] = spec.min_leaf;
            break;
        case LearnerKind::RandomForest:
            params["trees"] = spec.forest_trees;
            break;
        case LearnerKind::NaiveBayes:
            break;
        case LearnerKind::Logistic:
            params["ridge"] = spec.ridge;
            params["max_iters"] = spec.max_iters;
            break;
        case LearnerKind::Bagging:
            params["iterations"] = spec.bagging_rounds;
            params["min_leaf"] = spec.min_leaf;
            break;
    }
    return params;
}

}  // namespace

const char* learner_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::DecisionTree: return "DecisionTree";
        case LearnerKind::RandomForest: return "RandomForest";
        case LearnerKind::NaiveBayes: return "NaiveBayes";
        case LearnerKind::Logistic: return "Logistic";
        case LearnerKind::Bagging: return "Bagging";
    }
    return "RandomForest";
}

LearnerKind parse_learner(const std::string& name) {
    if (name == "DecisionTree" || name == "dt") return LearnerKind::DecisionTree;
    if (name == "RandomForest" || name == "rf") return LearnerKind::RandomForest;
    if (name == "NaiveBayes" || name == "nb") return LearnerKind::NaiveBayes;
    if (name == "Logistic" || name == "lr") return LearnerKind::Logistic;
    if (name == "Bagging" || name == "bag") return LearnerKind::Bagging;
    throw_domain("unknown learner: " + name);
}

bool Tree::predict(const std::vector<std::optional<double>>& values) const {
    return pos_fraction(values) > 0.5;
}

double Tree::pos_fraction(const std::vector<std::optional<double>>& values) const {
    if (nodes.empty()) return 0.0;
    std::size_t at = 0;
    while (!nodes[at].leaf) {
        const TreeNode& node = nodes[at];
        const auto& v = values[static_cast<std::size_t>(node.feature)];
        bool left = v ? *v <= node.threshold : node.missing_goes_left;
        at = static_cast<std::size_t>(left ? node.left : node.right);
    }
    return nodes[at].pos_fraction;
}

TrainedModel train(const LearnerSpec& spec, const FeatureMatrix& matrix) {
    check_trainable(matrix);
    TrainedModel model;
    model.spec = spec;
    model.feature_names = matrix.feature_names;
    model.train_rows = matrix.rows.size();
    model.train_positives = matrix.positive_count();

    std::vector<std::size_t> all_rows(matrix.rows.size());
    std::iota(all_rows.begin(), all_rows.end(), 0);

    switch (spec.kind) {
        case LearnerKind::DecisionTree:
            model.tree = fit_tree(matrix, all_rows, spec.min_leaf);
            break;
        case LearnerKind::RandomForest: {
            std::mt19937_64 rng(spec.seed);
            std::size_t candidates = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::sqrt(static_cast<double>(matrix.feature_names.size()))));
            for (std::size_t t = 0; t < spec.forest_trees; ++t) {
                auto rows = bootstrap(matrix.rows.size(), rng);
                model.trees.push_back(fit_tree(matrix, rows, 1, candidates, &rng));
            }
            break;
        }
        case LearnerKind::NaiveBayes:
            model.nb = fit_nb(matrix);
            break;
        case LearnerKind::Logistic:
            model.logistic = fit_logistic(matrix, spec);
            break;
        case LearnerKind::Bagging: {
            std::mt19937_64 rng(spec.seed);
            for (std::size_t t = 0; t < spec.bagging_rounds; ++t) {
                auto rows = bootstrap(matrix.rows.size(), rng);
                model.trees.push_back(fit_tree(matrix, rows, spec.min_leaf));
            }
            break;
        }
    }
    return model;
}

double predict_score(const TrainedModel& model, const FeatureRow& row) {
    if (row.values.size() != model.feature_names.size())
        throw_domain("FeatureMismatch: row arity differs from the model");
    switch (model.spec.kind) {
        case LearnerKind::DecisionTree: return model.tree.pos_fraction(row.values);
        case LearnerKind::RandomForest:
        case LearnerKind::Bagging: return vote_score(model.trees, row);
        case LearnerKind::NaiveBayes: return nb_score(model.nb, row);
        case LearnerKind::Logistic: return logistic_score(model.logistic, row);
    }
    return 0.0;
}

bool predict(const TrainedModel& model, const FeatureRow& row) {
    // An even split votes "no" — conservative for the rare positive class.
    return predict_score(model, row) > 0.5;
}

SampleEval evaluate(const TrainedModel& model, const FeatureMatrix& test) {
    SampleEval eval;
    for (const auto& row : test.rows) {
        bool yes = predict(model, row);
        if (yes && row.impacted) ++eval.tp;
        else if (yes && !row.impacted) ++eval.fp;
        else if (!yes && row.impacted) ++eval.fn;
        else ++eval.tn;
    }
    eval.precision = eval.tp + eval.fp
                         ? static_cast<double>(eval.tp) / static_cast<double>(eval.tp + eval.fp)
                         : 0.0;
    eval.recall = eval.tp + eval.fn
                      ? static_cast<double>(eval.tp) / static_cast<double>(eval.tp + eval.fn)
                      : 0.0;
    double pr = eval.precision + eval.recall;
    eval.f1 = pr > 0 ? 2.0 * eval.precision * eval.recall / pr : 0.0;
    return eval;
}

EvalReport run_protocol(const LearnerSpec& spec, const FeatureMatrix& matrix,
                        const SampleSpec& sample) {
    auto [train_side, test_side] = time_split(matrix);
    EvalReport report;
    report.learner = learner_name(spec.kind);
    report.spec = spec;
    for (std::size_t rep = 1; rep <= sample.repeats; ++rep) {
        std::uint64_t seed = sample.seed + rep;
        FeatureMatrix balanced = undersample(train_side, seed);
        LearnerSpec rep_spec = spec;
        rep_spec.seed = spec.seed + rep;
        TrainedModel model = train(rep_spec, balanced);
        SampleEval eval = evaluate(model, test_side);
        eval.seed = seed;
        report.samples.push_back(eval);
    }
    std::tie(report.mean, report.stddev) = aggregate(report.samples);
    return report;
}

double igr(const FeatureMatrix& matrix, const std::string& feature_name, std::size_t bins) {
    auto it = std::find(matrix.feature_names.begin(), matrix.feature_names.end(), feature_name);
    if (it == matrix.feature_names.end()) throw_domain("unknown feature: " + feature_name);
    std::size_t f = static_cast<std::size_t>(it - matrix.feature_names.begin());
    if (bins == 0) bins = 1;

    std::vector<std::pair<double, std::size_t>> values;
    for (std::size_t r = 0; r < matrix.rows.size(); ++r)
        if (matrix.rows[r].values[f]) values.emplace_back(*matrix.rows[r].values[f], r);
    if (values.empty()) return 0.0;
    std::vector<std::size_t> category = discretize(values, bins, matrix.rows.size());

    std::map<std::size_t, std::pair<std::size_t, std::size_t>> cells;  // category -> (yes, no)
    std::size_t yes_total = 0, n = 0;
    for (const auto& [value, r] : values) {
        auto& cell = cells[category[r]];
        if (matrix.rows[r].impacted) {
            ++cell.first;
            ++yes_total;
        } else {
            ++cell.second;
        }
        ++n;
    }
    double h_label = entropy2(yes_total, n - yes_total);
    double h_cond = 0.0, iv = 0.0;
    for (const auto& [cat, cell] : cells) {
        std::size_t size = cell.first + cell.second;
        double p = static_cast<double>(size) / static_cast<double>(n);
        h_cond += p * entropy2(cell.first, cell.second);
        iv -= p * std::log2(p);
    }
    double ig = std::max(0.0, h_label - h_cond);
    if (iv <= 1e-12) return 0.0;
    return std::min(1.0, ig / iv);
}

std::vector<IgrEntry> igr_rank(const FeatureMatrix& matrix, std::size_t bins) {
    std::vector<IgrEntry> entries;
    for (const auto& name : matrix.feature_names)
        entries.push_back({name, igr(matrix, name, bins), 0});
    std::sort(entries.begin(), entries.end(), [](const IgrEntry& a, const IgrEntry& b) {
        if (a.igr != b.igr) return a.igr > b.igr;
        return a.feature < b.feature;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
    return entries;
}

PcaProjection pca_fit(const FeatureMatrix& matrix, double variance) {
    std::size_t d = matrix.feature_names.size();
    std::size_t n = matrix.rows.size();
    if (n < 2 || d == 0) throw_domain("pca_fit needs at least two rows and one feature");
    for (const auto& row : matrix.rows)
        for (const auto& v : row.values)
            if (!v) throw_domain("pca_fit requires complete rows (no missing values)");

    PcaProjection proj;
    proj.input_features = matrix.feature_names;
    proj.means.assign(d, 0.0);
    for (const auto& row : matrix.rows)
        for (std::size_t f = 0; f < d; ++f) proj.means[f] += *row.values[f];
    for (auto& m : proj.means) m /= static_cast<double>(n);

    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& row : matrix.rows)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j)
                cov[i][j] += (*row.values[i] - proj.means[i]) * (*row.values[j] - proj.means[j]);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov[i][j] /= static_cast<double>(n - 1);
            cov[j][i] = cov[i][j];
        }

    // Cyclic Jacobi rotations; eigenvectors accumulate in v (columns).
    std::vector<std::vector<double>> v(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;
    for (std::size_t sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += cov[p][q] * cov[p][q];
        if (std::sqrt(off) < 1e-10) break;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) {
                if (std::abs(cov[p][q]) < 1e-15) continue;
                double theta = (cov[q][q] - cov[p][p]) / (2.0 * cov[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    double akp = cov[k][p], akq = cov[k][q];
                    cov[k][p] = c * akp - s * akq;
                    cov[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double apk = cov[p][k], aqk = cov[q][k];
                    cov[p][k] = c * apk - s * aqk;
                    cov[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::pair<double, std::size_t>> eigen;
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double value = std::max(0.0, cov[i][i]);
        eigen.emplace_back(value, i);
        total += value;
    }
    std::sort(eigen.begin(), eigen.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    proj.total_variance = total;
    if (total <= 0) {
        proj.warnings.push_back("DegenerateCovariance: zero total variance");
        return proj;
    }
    double kept = 0.0;
    for (const auto& [value, col] : eigen) {
        if (kept >= variance * total - 1e-12) break;
        if (value <= 1e-12 * total) {
            proj.warnings.push_back("DegenerateCovariance: rank-deficient, zero eigenvalues dropped");
            break;
        }
        std::vector<double> component(d);
        for (std::size_t k = 0; k < d; ++k) component[k] = v[k][col];
        proj.components.push_back(std::move(component));
        proj.eigenvalues.push_back(value);
        kept += value;
    }
    return proj;
}

FeatureMatrix PcaProjection::apply(const FeatureMatrix& matrix) const {
    if (matrix.feature_names != input_features)
        throw_domain("FeatureMismatch: projection was fit on different features");
    FeatureMatrix out;
    for (std::size_t c = 0; c < components.size(); ++c)
        out.feature_names.push_back("PC" + std::to_string(c + 1));
    for (const auto& row : matrix.rows) {
        FeatureRow projected = row;
        projected.values.clear();
        for (const auto& component : components) {
            double acc = 0.0;
            for (std::size_t f = 0; f < component.size(); ++f) {
                double value = row.values[f] ? *row.values[f] : means[f];
                acc += component[f] * (value - means[f]);
            }
            projected.values.emplace_back(acc);
        }
        out.rows.push_back(std::move(projected));
    }
    return out;
}

FeatureMatrix project_features(const FeatureMatrix& matrix,
                               const std::vector<std::string>& features) {
    std::vector<std::size_t> cols;
    for (const auto& name : features) {
        auto it = std::find(matrix.feature_names.begin(), matrix.feature_names.end(), name);
        if (it == matrix.feature_names.end()) throw_domain("unknown feature: " + name);
        cols.push_back(static_cast<std::size_t>(it - matrix.feature_names.begin()));
    }
    FeatureMatrix out;
    out.feature_names = features;
    for (const auto& row : matrix.rows) {
        FeatureRow projected = row;
        projected.values.clear();
        for (std::size_t c : cols) projected.values.push_back(row.values[c]);
        out.rows.push_back(std::move(projected));
    }
    return out;
}

namespace {

// smaller subset wins ties, then lexicographic order
bool subset_preferred(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

SelectionResult wrapper_select(const LearnerSpec& spec, const FeatureMatrix& matrix,
                               const SampleSpec& inner, std::size_t patience) {
    std::map<std::vector<std::string>, double> scores;
    auto score_of = [&](const std::vector<std::string>& subset) {
        auto it = scores.find(subset);
        if (it != scores.end()) return it->second;
        double score = 0.0;
        if (!subset.empty()) {
            try {
                score = run_protocol(spec, project_features(matrix, subset), inner).mean.f1;
            } catch (const Error&) {
                score = 0.0;  // an unsplittable or degenerate restriction scores zero
            }
        }
        scores.emplace(subset, score);
        return score;
    };

    SelectionResult best;
    best.subset = {};
    best.score = score_of({});

    struct Node {
        double score;
        std::vector<std::string> subset;
    };
    std::vector<Node> open{{best.score, {}}};
    std::set<std::vector<std::string>> seen{{}};

    std::size_t non_improving = 0;
    while (non_improving < patience && !open.empty()) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < open.size(); ++i) {
            if (open[i].score > open[pick].score + 1e-12 ||
                (std::abs(open[i].score - open[pick].score) <= 1e-12 &&
                 subset_preferred(open[i].subset, open[pick].subset)))
                pick = i;
        }
        Node node = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

        double before = best.score;
        std::vector<std::vector<std::string>> neighbors;
        for (const auto& name : matrix.feature_names) {
            auto pos = std::find(node.subset.begin(), node.subset.end(), name);
            std::vector<std::string> next = node.subset;
            if (pos == node.subset.end()) {
                next.push_back(name);
                std::sort(next.begin(), next.end());
            } else {
                next.erase(next.begin() + (pos - node.subset.begin()));
            }
            neighbors.push_back(std::move(next));
        }
        for (auto& next : neighbors) {
            if (!seen.insert(next).second) continue;
            double s = score_of(next);
            if (s > best.score + 1e-12 ||
                (std::abs(s - best.score) <= 1e-12 && subset_preferred(next, best.subset))) {
                best.score = s;
                best.subset = next;
            }
            open.push_back({s, std::move(next)});
        }
        bool improved = before > 0 ? best.score > before * 1.001 : best.score > 1e-12;
        non_improving = improved ? 0 : non_improving + 1;
    }
    best.evaluated_subsets = scores.size();
    return best;
}

void write_eval_report(const EvalReport& report, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["learner"] = report.learner;
    doc["params"] = spec_json(report.spec);
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const auto& s : report.samples) {
        seeds.push_back(s.seed);
        samples.push_back({{"seed", s.seed},
                           {"tp", s.tp},
                           {"fp", s.fp},
                           {"tn", s.tn},
                           {"fn", s.fn},
                           {"precision", s.precision},
                           {"recall", s.recall},
                           {"f1", s.f1}});
    }
    doc["seeds"] = seeds;
    doc["per_sample"] = samples;
    doc["mean"] = {{"precision", report.mean.precision},
                   {"recall", report.mean.recall},
                   {"f1", report.mean.f1}};
    doc["stddev"] = {{"precision", report.stddev.precision},
                     {"recall", report.stddev.recall},
                     {"f1", report.stddev.f1}};
    out << doc.dump(2) << '\n';
}

void write_igr_rank(const std::vector<IgrEntry>& entries, std::ostream& out) {
    out << "feature,igr,rank\n";
    for (const auto& entry : entries)
        out << entry.feature << ',' << format_double(entry.igr) << ',' << entry.rank << '\n';
}

void write_selection(const std::string& learner, const SelectionResult& result,
                     std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["learner"] = learner;
    doc["subset"] = result.subset;
    doc["score"] = result.score;
    doc["evaluated_subsets"] = result.evaluated_subsets;
    out << doc.dump(2) << '\n';
}

}  // namespace ccp
