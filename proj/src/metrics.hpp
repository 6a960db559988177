#ifndef CCP_METRICS_HPP
#define CCP_METRICS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "linker.hpp"
#include "textsim.hpp"

namespace ccp {

// Touch flags T(1..N) over the prior requirement sequence, oldest first.
struct ClassHistory {
    std::vector<std::uint8_t> flags;
};

// Sum T(i) / N.
double tlcc_scp(const ClassHistory& history);

// (Sum T(i)/(1+N-i)) / N; recent touches weigh more.
double tlcc_lin(const ClassHistory& history);

// (Sum T(i)/ln(1+N-i)) / N; the lag-0 term (ln 1 = 0) contributes zero.
double tlcc_log(const ClassHistory& history);

enum class DistKind { Max, Av, Top5 };

const char* dist_kind_name(DistKind kind);
DistKind parse_dist_kind(const std::string& name);

// Max / mean / mean of the five largest; empty -> 0.
double distribution_score(std::span<const double> scores, DistKind kind);

// Pairwise technique score of the query against each set member, folded.
double r2rs(const TokenStream& query, const std::vector<const TokenStream*>& set_members,
            Technique technique, DistKind kind, const CorpusStats& stats);

// Direct requirement-to-class similarity; VSM and JSD only.
double r2c(const TokenStream& query, const TokenStream& class_text, Technique technique,
           const CorpusStats& stats);

inline constexpr std::array<const char*, 11> kExternalMetricNames = {
    "SQ_Com",   "SQ_NCLOC", "SQ_Viol",  "CKJM_WMC",  "CKJM_DIT", "CKJM_NOC",
    "CKJM_CBO", "CKJM_RFC", "CKJM_LCOM", "CKJM_CA",  "CKJM_NPM"};

bool is_external_metric_name(const std::string& name);

struct ExternalMetricsTable {
    // (release_id, class_path) -> metric name -> value
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> rows;
    std::vector<std::string> warnings;

    std::optional<double> lookup(const std::string& release_id, const std::string& class_path,
                                 const std::string& metric) const;
};

// CSV with header release_id,class_path,metric,value. Last write wins on
// duplicate keys, with a warning.
ExternalMetricsTable ingest_external(std::istream& in);

enum class MetricFamily { R2RS, R2C, TLCC, SQ, CKJM };

const char* family_name(MetricFamily family);
MetricFamily parse_family(const std::string& name);

struct MetricsConfig {
    std::vector<MetricFamily> families{MetricFamily::R2RS, MetricFamily::R2C, MetricFamily::TLCC,
                                       MetricFamily::SQ, MetricFamily::CKJM};
    std::vector<Technique> techniques{Technique::VSM, Technique::JSD, Technique::GC, Technique::OPC,
                                      Technique::BC};
    std::vector<DistKind> distributions{DistKind::Max, DistKind::Av, DistKind::Top5};
    bool tlcc_per_release = true;   // otherwise per requirement
    bool history_all_kinds = true;  // Bug/Other touches feed histories and sets
    std::size_t requirements_set_cap = 10;

    bool has_family(MetricFamily family) const;
    std::vector<std::string> feature_names() const;
};

struct MetricVector {
    std::vector<std::optional<double>> values;  // aligned with MetricsConfig::feature_names()
};

// Per-query inputs assembled once, then reused for every candidate class of
// that requirement. All inputs originate strictly before the query's first
// linked commit (anti-leak).
class FeatureExtractor {
public:
    FeatureExtractor(const Corpus& corpus, const LinkResult& links,
                     const ReleaseBoundaryResult& boundaries, const ExternalMetricsTable& externals,
                     MetricsConfig config);

    struct QueryContext {
        const RequirementChange* query = nullptr;
        CorpusStats stats;                   // priors' texts plus the query itself
        std::vector<std::size_t> priors;     // indices into linked_order(), strictly past
        std::vector<std::size_t> tlcc_priors;  // truncated at the release boundary if configured
        mutable std::map<std::pair<std::string, int>, double> pair_cache;
    };

    const MetricsConfig& config() const { return config_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    // Ordered by first linked commit; drives row ordering downstream.
    const std::vector<const RequirementChange*>& linked_order() const { return linked_order_; }

    QueryContext prepare(const RequirementChange& query) const;
    MetricVector assemble(const QueryContext& ctx, const std::string& class_path) const;

    ClassHistory history_for(const QueryContext& ctx, const std::string& class_path) const;
    std::vector<const RequirementChange*> requirements_set(const QueryContext& ctx,
                                                           const std::string& class_path) const;

    // Class text used by R2C; identifier-split path tokens unless a source
    // snapshot provider supplies file content.
    void set_class_text_provider(std::function<std::string(const std::string&)> provider);

private:
    const Corpus& corpus_;
    const ExternalMetricsTable& externals_;
    MetricsConfig config_;
    std::vector<std::string> feature_names_;
    std::vector<const RequirementChange*> linked_order_;
    std::map<std::string, std::pair<std::int64_t, std::string>> release_cutoff_;
    std::function<std::string(const std::string&)> class_text_provider_;
    mutable std::map<std::string, TokenStream> requirement_tokens_;
    mutable std::map<std::string, TokenStream> class_tokens_;

    const TokenStream& tokens_of(const Requirement& req) const;
    const TokenStream& tokens_of_class(const std::string& class_path) const;
    double pair_score(const QueryContext& ctx, const Requirement& member, Technique technique) const;
};

}  // namespace ccp

#endif
