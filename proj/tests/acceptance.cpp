// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "dataset.hpp"
#include "learn.hpp"
#include "linker.hpp"
#include "metrics.hpp"
#include "stats.hpp"
#include "textsim.hpp"

#include "support/arff_check.hpp"
#include "support/builders.hpp"
#include "support/synthetic.hpp"

using namespace ccp;
using namespace ccp::testing;

namespace {

int failures = 0;

struct Criterion {
    std::string name;
    double limit_seconds;
    std::vector<std::string> problems;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Criterion(std::string n, double limit) : name(std::move(n)), limit_seconds(limit) {}

    void require(bool ok, const std::string& detail) {
        if (!ok) problems.push_back(detail);
    }

    void finish() {
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (limit_seconds > 0 && elapsed > limit_seconds)
            problems.push_back("runtime " + std::to_string(elapsed) + "s exceeds " +
                               std::to_string(limit_seconds) + "s");
        if (problems.empty()) {
            std::printf("PASS %s (%.2fs)\n", name.c_str(), elapsed);
        } else {
            ++failures;
            std::printf("FAIL %s (%.2fs)\n", name.c_str(), elapsed);
            for (const auto& p : problems) std::printf("     - %s\n", p.c_str());
        }
    }
};

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

ClassHistory flags(std::initializer_list<int> bits) {
    ClassHistory h;
    for (int b : bits) h.flags.push_back(static_cast<std::uint8_t>(b));
    return h;
}

// independent entropy arithmetic shared with nothing in the library
double entropy_of(const std::vector<double>& probs) {
    double h = 0;
    for (double p : probs)
        if (p > 0) h -= p * std::log2(p);
    return h;
}

double igr_oracle(const std::vector<std::pair<double, bool>>& data, std::size_t bins) {
    std::size_t n = data.size();
    if (n == 0) return 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (data[a].first != data[b].first) return data[a].first < data[b].first;
        return a < b;
    });
    std::vector<std::size_t> cat(n);
    for (std::size_t i = 0; i < n; ++i) cat[order[i]] = i * bins / n;
    for (std::size_t i = 1; i < n; ++i)
        if (data[order[i]].first == data[order[i - 1]].first) cat[order[i]] = cat[order[i - 1]];
    std::map<std::size_t, std::pair<double, double>> cells;
    double yes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        (data[i].second ? cells[cat[i]].first : cells[cat[i]].second) += 1.0;
        yes += data[i].second ? 1.0 : 0.0;
    }
    double nd = static_cast<double>(n);
    double h_label = entropy_of({yes / nd, 1.0 - yes / nd});
    double h_cond = 0, iv = 0;
    for (const auto& [c, cell] : cells) {
        double size = cell.first + cell.second;
        h_cond += size / nd * entropy_of({cell.first / size, cell.second / size});
        iv += -(size / nd) * std::log2(size / nd);
    }
    double ig = std::max(0.0, h_label - h_cond);
    return iv <= 1e-12 ? 0.0 : std::min(1.0, ig / iv);
}

double fisher_oracle(long long a, long long b, long long c, long long d) {
    auto log_comb = [](long long n, long long k) {
        return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
               std::lgamma(static_cast<double>(n - k + 1));
    };
    long long r1 = a + b, r2 = c + d, c1 = a + c, n = r1 + r2;
    auto log_prob = [&](long long x) {
        return log_comb(r1, x) + log_comb(r2, c1 - x) - log_comb(n, c1);
    };
    double observed = log_prob(a);
    double total = 0;
    for (long long x = std::max(0LL, c1 - r2); x <= std::min(r1, c1); ++x)
        if (log_prob(x) <= observed + 1e-9) total += std::exp(log_prob(x));
    return std::min(1.0, total);
}

TokenStream random_stream(std::mt19937_64& rng, std::size_t max_len = 8) {
    static const std::vector<std::string> vocab = {
        "parser", "index", "query",  "cache", "thread", "token", "stream", "merge",
        "split",  "score", "vector", "class", "metric", "rank",  "commit", "file"};
    std::size_t len = rng() % (max_len + 1);
    TokenStream out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(vocab[rng() % vocab.size()]);
    return out;
}

double synthetic_mean_f1(const Corpus& corpus, const LinkResult& links,
                         const ReleaseBoundaryResult& boundaries,
                         const ExternalMetricsTable& externals, const MetricsConfig& config) {
    FeatureExtractor extractor(corpus, links, boundaries, externals, config);
    FeatureMatrix matrix = build_matrix(corpus, links, extractor);
    LearnerSpec spec{.kind = LearnerKind::DecisionTree, .seed = 1};
    return run_protocol(spec, matrix, SampleSpec{1, 20}).mean.f1;
}

void criterion_1_tlcc() {
    Criterion c("criterion 1: temporal-locality golden table", 1.0);
    ClassHistory a = flags({1, 1, 1, 1, 0, 0});
    ClassHistory b = flags({0, 0, 1, 1, 1, 0});
    ClassHistory cc = flags({0, 0, 0, 0, 1, 1});
    c.require(near(tlcc_scp(a), 0.67, 0.005), "A SCP");
    c.require(near(tlcc_lin(a), 0.16, 0.005), "A Lin");
    c.require(near(tlcc_log(a), 0.47, 0.005), "A Log");
    c.require(near(tlcc_scp(b), 0.50, 0.005), "B SCP");
    c.require(near(tlcc_lin(b), 0.18, 0.005), "B Lin");
    c.require(near(tlcc_log(b), 0.51, 0.005), "B Log");
    c.require(near(tlcc_scp(cc), 0.33, 0.005), "C SCP");
    c.require(near(tlcc_lin(cc), 0.25, 0.005), "C Lin");
    c.require(near(tlcc_log(cc), 0.24, 0.005), "C Log");
    c.finish();
}

void criterion_2_precision() {
    Criterion c("criterion 2: evaluation arithmetic 17/(17+24)", 1.0);
    TrainedModel always_yes;
    always_yes.spec.kind = LearnerKind::DecisionTree;
    always_yes.feature_names = {"f"};
    always_yes.tree.nodes.push_back({true, true, 1.0, -1, 0, true, -1, -1});
    FeatureMatrix test;
    test.feature_names = {"f"};
    for (int i = 0; i < 41; ++i) {
        FeatureRow row;
        row.values = {0.0};
        row.impacted = i < 17;
        test.rows.push_back(row);
    }
    SampleEval eval = evaluate(always_yes, test);
    c.require(eval.tp == 17 && eval.fp == 24, "confusion counts");
    c.require(near(eval.precision, 0.415, 0.005), "precision " + std::to_string(eval.precision));
    c.finish();
}

void criterion_3_synthetic() {
    Criterion c("criterion 3: planted-signal corpus, R2RS on vs off", 60.0);
    SyntheticSpec spec;
    Corpus corpus = make_synthetic_corpus(spec);
    c.require(corpus.requirements.size() >= 50, "at least 50 requirements");
    std::set<std::string> classes;
    for (const auto& commit : corpus.commits)
        for (const auto& f : commit.files) classes.insert(f.path);
    c.require(classes.size() >= 200, "at least 200 classes");
    LinkResult links = link(corpus, LinkConfig{.project_key = "SYN"});
    ReleaseBoundaryResult boundaries = release_boundaries(corpus, links);
    ExternalMetricsTable noise = make_noise_externals(spec);
    ExternalMetricsTable empty;

    MetricsConfig with_r2rs;
    with_r2rs.families = {MetricFamily::R2RS};
    with_r2rs.techniques = {Technique::VSM};
    with_r2rs.distributions = {DistKind::Max};
    double f1_on = synthetic_mean_f1(corpus, links, boundaries, empty, with_r2rs);

    MetricsConfig without_r2rs;
    without_r2rs.families = {MetricFamily::SQ, MetricFamily::CKJM};
    double f1_off = synthetic_mean_f1(corpus, links, boundaries, noise, without_r2rs);

    c.require(f1_on >= 0.80, "mean F1 with R2RS = " + std::to_string(f1_on) + " < 0.80");
    c.require(f1_off <= 0.35, "mean F1 without R2RS = " + std::to_string(f1_off) + " > 0.35");
    c.finish();
}

void criterion_4_igr() {
    Criterion c("criterion 4: information-gain-ratio oracle equivalence", 0.0);
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t rows = 2 + rng() % 11;
        std::size_t bins = 1 + rng() % 4;
        std::size_t feature_count = 1 + rng() % 3;
        FeatureMatrix matrix;
        for (std::size_t f = 0; f < feature_count; ++f)
            matrix.feature_names.push_back("f" + std::to_string(f));
        std::vector<std::vector<std::pair<double, bool>>> data(feature_count);
        for (std::size_t i = 0; i < rows; ++i) {
            FeatureRow row;
            row.impacted = rng() % 2 == 0;
            for (std::size_t f = 0; f < feature_count; ++f) {
                double v = static_cast<double>(rng() % 6);
                row.values.push_back(v);
                data[f].emplace_back(v, row.impacted);
            }
            matrix.rows.push_back(row);
        }
        for (std::size_t f = 0; f < feature_count; ++f) {
            double got = igr(matrix, matrix.feature_names[f], bins);
            double expected = igr_oracle(data[f], bins);
            if (!near(got, expected, 1e-9)) {
                c.require(false, "trial " + std::to_string(trial) + " feature " + std::to_string(f) +
                                     ": " + std::to_string(got) + " vs " + std::to_string(expected));
                break;
            }
        }
    }
    FeatureMatrix toy;
    toy.feature_names = {"copy", "flat"};
    for (int i = 0; i < 12; ++i) {
        FeatureRow row;
        row.impacted = i < 6;
        row.values = {row.impacted ? 1.0 : 0.0, 5.0};
        toy.rows.push_back(row);
    }
    c.require(near(igr(toy, "copy"), 1.0, 1e-12), "label-identical feature scores 1");
    c.require(near(igr(toy, "flat"), 0.0, 1e-12), "constant feature scores 0");
    c.finish();
}

void criterion_5_properties() {
    Criterion c("criterion 5: randomized property suites", 0.0);
    std::mt19937_64 rng(4321);

    // similarity range and identity, >= 1000 cases
    {
        const Technique techniques[] = {Technique::VSM, Technique::JSD, Technique::GC,
                                        Technique::OPC, Technique::BC};
        int cases = 0;
        while (cases < 1000) {
            TokenStream a = random_stream(rng);
            TokenStream b = random_stream(rng);
            CorpusStats stats;
            stats.add_document(a);
            stats.add_document(b);
            for (Technique tech : techniques) {
                double sim = similarity(tech, a, b, stats);
                if (sim < 0.0 || sim > 1.0)
                    c.require(false, "similarity out of range: " + std::to_string(sim));
                if (!a.empty() && !near(similarity(tech, a, a, stats), 1.0, 1e-9))
                    c.require(false, "identity pair not 1");
                ++cases;
            }
        }
    }

    // Max >= Top5 >= Av, >= 1000 cases
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> scores(1 + rng() % 12);
        for (double& s : scores) s = static_cast<double>(rng() % 1000) / 999.0;
        double mx = distribution_score(scores, DistKind::Max);
        double av = distribution_score(scores, DistKind::Av);
        double t5 = distribution_score(scores, DistKind::Top5);
        if (!(mx >= t5 - 1e-12 && t5 >= av - 1e-12))
            c.require(false, "distribution ordering violated at trial " + std::to_string(trial));
    }

    // TLCC: Lin <= SCP, and flipping a miss into a touch never lowers any value
    for (int trial = 0; trial < 1000; ++trial) {
        ClassHistory h;
        std::size_t n = 2 + rng() % 12;
        std::vector<std::size_t> zeros;
        for (std::size_t i = 0; i < n; ++i) {
            h.flags.push_back(rng() % 2);
            if (!h.flags.back()) zeros.push_back(i);
        }
        if (tlcc_lin(h) > tlcc_scp(h) + 1e-12)
            c.require(false, "Lin exceeds SCP at trial " + std::to_string(trial));
        if (!zeros.empty()) {
            ClassHistory more = h;
            more.flags[zeros[rng() % zeros.size()]] = 1;
            if (tlcc_scp(more) + 1e-12 < tlcc_scp(h) || tlcc_lin(more) + 1e-12 < tlcc_lin(h) ||
                tlcc_log(more) + 1e-12 < tlcc_log(h))
                c.require(false, "touch monotonicity violated at trial " + std::to_string(trial));
        }
    }

    // anti-leak audit on a synthetic corpus: every input to a query strictly
    // precedes the query's first linked commit
    {
        Corpus corpus = make_synthetic_corpus();
        LinkResult links = link(corpus, LinkConfig{.project_key = "SYN"});
        ReleaseBoundaryResult boundaries = release_boundaries(corpus, links);
        ExternalMetricsTable externals;
        MetricsConfig config;
        config.families = {MetricFamily::R2RS, MetricFamily::TLCC};
        config.techniques = {Technique::VSM};
        config.distributions = {DistKind::Max};
        FeatureExtractor extractor(corpus, links, boundaries, externals, config);
        std::size_t checks = 0, leaks = 0;
        for (const RequirementChange* query : extractor.linked_order()) {
            auto ctx = extractor.prepare(*query);
            for (std::size_t p : ctx.priors) {
                const RequirementChange* prior = extractor.linked_order()[p];
                ++checks;
                if (!(prior->first_commit_ts < query->first_commit_ts ||
                      (prior->first_commit_ts == query->first_commit_ts &&
                       prior->first_commit_id < query->first_commit_id)))
                    ++leaks;
            }
            for (std::size_t p : ctx.tlcc_priors) {
                ++checks;
                if (extractor.linked_order()[p]->first_commit_ts > query->first_commit_ts) ++leaks;
            }
            for (const auto& path : {query->touched_files.begin()->c_str()}) {
                auto set = extractor.requirements_set(ctx, path);
                for (const RequirementChange* member : set) {
                    ++checks;
                    if (member->first_commit_ts >= query->first_commit_ts) ++leaks;
                }
            }
        }
        c.require(checks >= 1000, "anti-leak audit covered " + std::to_string(checks) + " inputs");
        c.require(leaks == 0, std::to_string(leaks) + " future-dated inputs found");
    }

    // undersample balance and seed determinism, >= 1000 cases
    {
        std::size_t cases = 0;
        for (int trial = 0; trial < 50; ++trial) {
            FeatureMatrix train;
            train.feature_names = {"f"};
            std::size_t reqs = 4 + rng() % 4, per = 6 + rng() % 6, pos = 1 + rng() % 2;
            for (std::size_t r = 0; r < reqs; ++r)
                for (std::size_t i = 0; i < per; ++i) {
                    FeatureRow row;
                    char key[16], cls[16];
                    std::snprintf(key, sizeof(key), "T-%03zu", r);
                    std::snprintf(cls, sizeof(cls), "C%03zu", i);
                    row.requirement_key = key;
                    row.class_path = cls;
                    row.req_first_ts = static_cast<std::int64_t>(r);
                    row.impacted = i < pos;
                    row.values = {static_cast<double>(rng() % 100)};
                    train.rows.push_back(row);
                }
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                FeatureMatrix a = undersample(train, seed);
                FeatureMatrix b = undersample(train, seed);
                if (a.positive_count() * 2 != a.rows.size())
                    c.require(false, "undersample imbalance at trial " + std::to_string(trial));
                if (a.rows.size() != b.rows.size())
                    c.require(false, "undersample nondeterminism at trial " + std::to_string(trial));
                for (std::size_t i = 0; i < a.rows.size(); ++i)
                    if (a.rows[i].requirement_key != b.rows[i].requirement_key ||
                        a.rows[i].class_path != b.rows[i].class_path)
                        c.require(false, "undersample nondeterminism at trial " + std::to_string(trial));
                ++cases;
            }
        }
        c.require(cases >= 1000, "undersample suite ran " + std::to_string(cases) + " cases");
    }

    // statistics invariants
    {
        auto kw = kruskal_wallis({{1.0, 1.0, 1.0}, {1.0, 1.0}});
        c.require(near(kw.h, 0.0, 1e-12) && near(kw.p, 1.0, 1e-12),
                  "identical groups must give H=0, p=1");
        double p = fisher_exact_2x2(3, 1, 1, 3);
        c.require(near(p, 0.4857, 1e-4), "Fisher [[3,1],[1,3]] = " + std::to_string(p));
        c.require(near(p, fisher_oracle(3, 1, 1, 3), 1e-9), "Fisher vs enumeration oracle");
    }
    c.finish();
}

void criterion_6_wrapper() {
    Criterion c("criterion 6: wrapper selection vs exhaustive search", 30.0);
    std::mt19937_64 rng(5);
    FeatureMatrix matrix;
    matrix.feature_names = {"noise_a", "noise_b", "noise_c", "perfect"};
    for (std::size_t r = 0; r < 12; ++r)
        for (std::size_t i = 0; i < 6; ++i) {
            FeatureRow row;
            char key[16], cls[16];
            std::snprintf(key, sizeof(key), "T-%03zu", r);
            std::snprintf(cls, sizeof(cls), "C%03zu", i);
            row.requirement_key = key;
            row.class_path = cls;
            row.req_first_ts = static_cast<std::int64_t>(r);
            row.impacted = i < 2;
            row.values = {static_cast<double>(rng() % 10), static_cast<double>(rng() % 10),
                          static_cast<double>(rng() % 10), row.impacted ? 1.0 : 0.0};
            matrix.rows.push_back(row);
        }
    LearnerSpec spec{.kind = LearnerKind::DecisionTree, .seed = 1};
    SampleSpec inner{1, 5};
    SelectionResult result = wrapper_select(spec, matrix, inner);
    c.require(result.subset == std::vector<std::string>{"perfect"},
              "wrapper picked a different subset");

    std::vector<std::string> best_subset;
    double best_score = -1;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<std::string> subset;
        for (unsigned bit = 0; bit < 4; ++bit)
            if (mask & (1u << bit)) subset.push_back(matrix.feature_names[bit]);
        std::sort(subset.begin(), subset.end());
        double score = 0;
        if (!subset.empty())
            score = run_protocol(spec, project_features(matrix, subset), inner).mean.f1;
        bool better = score > best_score + 1e-12 ||
                      (std::fabs(score - best_score) <= 1e-12 &&
                       (subset.size() < best_subset.size() ||
                        (subset.size() == best_subset.size() && subset < best_subset)));
        if (better) {
            best_score = score;
            best_subset = subset;
        }
    }
    c.require(best_subset == result.subset, "exhaustive search disagrees with the wrapper");
    c.finish();
}

void criterion_7_exports() {
    Criterion c("criterion 7: export fidelity (ARFF grammar, CSV round-trip)", 0.0);
    std::mt19937_64 rng(6);
    FeatureMatrix matrix;
    matrix.feature_names = {"f1", "f2", "f3"};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t i = 0; i < 5; ++i) {
            FeatureRow row;
            char key[16], cls[16];
            std::snprintf(key, sizeof(key), "T-%03zu", r);
            std::snprintf(cls, sizeof(cls), "C%03zu", i);
            row.requirement_key = key;
            row.class_path = cls;
            row.req_first_ts = static_cast<std::int64_t>(r);
            row.impacted = i == 0;
            row.values = {static_cast<double>(rng() % 1000) / 7.0, 0.1 + 0.2,
                          rng() % 3 == 0 ? std::optional<double>{} : std::optional<double>{1.5}};
            matrix.rows.push_back(row);
        }

    std::ostringstream arff;
    export_arff(matrix, arff);
    std::istringstream arff_in(arff.str());
    std::string verdict = check_arff(arff_in);
    c.require(verdict.empty(), "ARFF grammar: " + verdict);

    std::ostringstream csv;
    export_csv(matrix, csv);
    std::istringstream csv_in(csv.str());
    FeatureMatrix back = import_csv(csv_in);
    bool same = back.rows.size() == matrix.rows.size() && back.feature_names == matrix.feature_names;
    for (std::size_t i = 0; same && i < matrix.rows.size(); ++i)
        same = back.rows[i].requirement_key == matrix.rows[i].requirement_key &&
               back.rows[i].class_path == matrix.rows[i].class_path &&
               back.rows[i].impacted == matrix.rows[i].impacted &&
               back.rows[i].values == matrix.rows[i].values;
    c.require(same, "CSV round-trip lost data");
    std::ostringstream again;
    export_csv(back, again);
    c.require(again.str() == csv.str(), "CSV re-export differs byte-for-byte");
    c.finish();
}

}  // namespace

int main() {
    criterion_1_tlcc();
    criterion_2_precision();
    criterion_3_synthetic();
    criterion_4_igr();
    criterion_5_properties();
    criterion_6_wrapper();
    criterion_7_exports();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
