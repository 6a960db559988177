#ifndef CCP_DATASET_HPP
#define CCP_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "metrics.hpp"

namespace ccp {

struct FeatureRow {
    std::string requirement_key;
    std::string class_path;
    std::vector<std::optional<double>> values;
    bool impacted = false;
    std::int64_t req_first_ts = 0;
    std::string req_first_commit;
};

struct FeatureMatrix {
    std::vector<std::string> feature_names;
    std::vector<FeatureRow> rows;

    std::size_t positive_count() const;
};

struct SampleSpec {
    std::uint64_t seed = 1;
    std::size_t repeats = 20;
};

// One row per (feature requirement, candidate class existing at its first
// commit); rows ordered by (requirement first-commit time, id, class path).
FeatureMatrix build_matrix(const Corpus& corpus, const LinkResult& links,
                           const FeatureExtractor& extractor);

// Time-ordered split; the cut rounds to the nearest requirement boundary so a
// requirement's rows never straddle it.
std::pair<FeatureMatrix, FeatureMatrix> time_split(const FeatureMatrix& matrix,
                                                   double train_fraction = 0.8);

// All positives kept; an equal number of negatives drawn without replacement
// with a seeded PRNG; output re-sorted chronologically.
FeatureMatrix undersample(const FeatureMatrix& train, std::uint64_t seed);

void export_csv(const FeatureMatrix& matrix, std::ostream& out);
FeatureMatrix import_csv(std::istream& in);

// @RELATION impact, NUMERIC attributes, class attribute {yes,no}, missing "?".
void export_arff(const FeatureMatrix& matrix, std::ostream& out);

void export_csv_file(const FeatureMatrix& matrix, const std::string& path);
void export_arff_file(const FeatureMatrix& matrix, const std::string& path);

}  // namespace ccp

#endif
