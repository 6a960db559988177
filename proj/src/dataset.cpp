#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "common.hpp"

namespace ccp {

namespace {

bool row_order(const FeatureRow& a, const FeatureRow& b) {
    if (a.req_first_ts != b.req_first_ts) return a.req_first_ts < b.req_first_ts;
    if (a.req_first_commit != b.req_first_commit) return a.req_first_commit < b.req_first_commit;
    if (a.requirement_key != b.requirement_key) return a.requirement_key < b.requirement_key;
    return a.class_path < b.class_path;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
    }
    quoted.push_back('"');
    return quoted;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace

std::size_t FeatureMatrix::positive_count() const {
    std::size_t count = 0;
    for (const auto& row : rows) count += row.impacted ? 1 : 0;
    return count;
}

FeatureMatrix build_matrix(const Corpus& corpus, const LinkResult& links,
                           const FeatureExtractor& extractor) {
    FeatureMatrix matrix;
    matrix.feature_names = extractor.feature_names();
    for (const auto& change : links.changes) {
        const Requirement* req = corpus.find_requirement(change.requirement_key);
        if (!req || req->kind != IssueKind::NewFeature) continue;
        auto ctx = extractor.prepare(change);
        std::vector<std::pair<std::string, bool>> candidates;
        for (const auto& path : change.touched_files) candidates.emplace_back(path, true);
        for (const auto& path : change.untouched_files) candidates.emplace_back(path, false);
        std::sort(candidates.begin(), candidates.end());
        for (const auto& [class_path, impacted] : candidates) {
            FeatureRow row;
            row.requirement_key = change.requirement_key;
            row.class_path = class_path;
            row.impacted = impacted;
            row.req_first_ts = change.first_commit_ts;
            row.req_first_commit = change.first_commit_id;
            row.values = extractor.assemble(ctx, class_path).values;
            matrix.rows.push_back(std::move(row));
        }
    }
    std::sort(matrix.rows.begin(), matrix.rows.end(), row_order);
    return matrix;
}

std::pair<FeatureMatrix, FeatureMatrix> time_split(const FeatureMatrix& matrix,
                                                   double train_fraction) {
    if (matrix.rows.size() < 2) throw_domain("DegenerateSplit: need at least two rows");
    for (std::size_t i = 1; i < matrix.rows.size(); ++i)
        if (row_order(matrix.rows[i], matrix.rows[i - 1]))
            throw_domain("time_split requires a chronologically ordered matrix");

    // Cumulative row counts at requirement boundaries.
    std::vector<std::size_t> boundaries;
    for (std::size_t i = 1; i <= matrix.rows.size(); ++i) {
        if (i == matrix.rows.size() ||
            matrix.rows[i].requirement_key != matrix.rows[i - 1].requirement_key)
            boundaries.push_back(i);
    }
    double target = std::ceil(train_fraction * static_cast<double>(matrix.rows.size()));
    std::size_t cut = 0;
    double best_dist = -1;
    for (std::size_t b : boundaries) {
        if (b == matrix.rows.size()) continue;  // the test side must be non-empty
        double dist = std::abs(static_cast<double>(b) - target);
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            cut = b;
        }
    }
    if (cut == 0) throw_domain("DegenerateSplit: cannot place a requirement-aligned cut");

    FeatureMatrix train, test;
    train.feature_names = matrix.feature_names;
    test.feature_names = matrix.feature_names;
    train.rows.assign(matrix.rows.begin(), matrix.rows.begin() + static_cast<std::ptrdiff_t>(cut));
    test.rows.assign(matrix.rows.begin() + static_cast<std::ptrdiff_t>(cut), matrix.rows.end());
    return {std::move(train), std::move(test)};
}

FeatureMatrix undersample(const FeatureMatrix& train, std::uint64_t seed) {
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < train.rows.size(); ++i)
        (train.rows[i].impacted ? positives : negatives).push_back(i);
    if (positives.empty() || negatives.empty())
        throw_domain("undersample requires at least one positive and one negative row");
    if (negatives.size() < positives.size())
        throw_domain("InsufficientNegatives: " + std::to_string(negatives.size()) + " < " +
                     std::to_string(positives.size()));

    // Partial Fisher-Yates with explicit draws; stable across standard libraries.
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool = negatives;
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
        chosen.push_back(pool[i]);
    }

    FeatureMatrix balanced;
    balanced.feature_names = train.feature_names;
    for (std::size_t i : positives) balanced.rows.push_back(train.rows[i]);
    for (std::size_t i : chosen) balanced.rows.push_back(train.rows[i]);
    std::sort(balanced.rows.begin(), balanced.rows.end(), row_order);
    return balanced;
}

void export_csv(const FeatureMatrix& matrix, std::ostream& out) {
    out << "requirement_key,class_path";
    for (const auto& name : matrix.feature_names) out << ',' << csv_field(name);
    out << ",impacted\n";
    for (const auto& row : matrix.rows) {
        out << csv_field(row.requirement_key) << ',' << csv_field(row.class_path);
        for (const auto& value : row.values) {
            out << ',';
            if (value) out << format_double(*value);
        }
        out << ',' << (row.impacted ? "yes" : "no") << '\n';
    }
}

FeatureMatrix import_csv(std::istream& in) {
    FeatureMatrix matrix;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = parse_csv_line(line);
        if (header) {
            header = false;
            if (fields.size() < 3 || fields.front() != "requirement_key" || fields.back() != "impacted")
                throw_domain("unexpected CSV header");
            matrix.feature_names.assign(fields.begin() + 2, fields.end() - 1);
            continue;
        }
        if (fields.size() != matrix.feature_names.size() + 3)
            throw_domain("CSV row has wrong arity");
        FeatureRow row;
        row.requirement_key = fields[0];
        row.class_path = fields[1];
        for (std::size_t i = 2; i + 1 < fields.size(); ++i) {
            if (fields[i].empty())
                row.values.emplace_back(std::nullopt);
            else
                row.values.emplace_back(std::stod(fields[i]));
        }
        row.impacted = fields.back() == "yes";
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

void export_arff(const FeatureMatrix& matrix, std::ostream& out) {
    out << "@RELATION impact\n\n";
    for (const auto& name : matrix.feature_names) out << "@ATTRIBUTE " << name << " NUMERIC\n";
    out << "@ATTRIBUTE impacted {yes,no}\n\n@DATA\n";
    for (const auto& row : matrix.rows) {
        for (const auto& value : row.values) {
            if (value) out << format_double(*value);
            else out << '?';
            out << ',';
        }
        out << (row.impacted ? "yes" : "no") << '\n';
    }
}

void export_csv_file(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_io("IoFailure: cannot write " + path);
    export_csv(matrix, out);
}

void export_arff_file(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_io("IoFailure: cannot write " + path);
    export_arff(matrix, out);
}

}  // namespace ccp
