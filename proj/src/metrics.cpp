#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "common.hpp"

namespace ccp {

namespace {

void require_history(const ClassHistory& history) {
    if (history.flags.empty()) throw_domain("EmptyHistory");
}

}  // namespace

double tlcc_scp(const ClassHistory& history) {
    require_history(history);
    double sum = 0;
    for (auto flag : history.flags) sum += flag;
    return sum / static_cast<double>(history.flags.size());
}

double tlcc_lin(const ClassHistory& history) {
    require_history(history);
    std::size_t n = history.flags.size();
    double sum = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (history.flags[i - 1]) sum += 1.0 / static_cast<double>(1 + n - i);
    return sum / static_cast<double>(n);
}

double tlcc_log(const ClassHistory& history) {
    require_history(history);
    std::size_t n = history.flags.size();
    double sum = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (!history.flags[i - 1]) continue;
        double denom = std::log(static_cast<double>(1 + n - i));
        if (denom > 0) sum += 1.0 / denom;  // the lag-0 term contributes zero
    }
    return sum / static_cast<double>(n);
}

const char* dist_kind_name(DistKind kind) {
    switch (kind) {
        case DistKind::Max: return "Max";
        case DistKind::Av: return "Av";
        case DistKind::Top5: return "Top5";
    }
    return "Max";
}

DistKind parse_dist_kind(const std::string& name) {
    if (name == "Max") return DistKind::Max;
    if (name == "Av") return DistKind::Av;
    if (name == "Top5") return DistKind::Top5;
    throw_domain("unknown distribution score: " + name);
}

double distribution_score(std::span<const double> scores, DistKind kind) {
    if (scores.empty()) return 0.0;
    switch (kind) {
        case DistKind::Max:
            return *std::max_element(scores.begin(), scores.end());
        case DistKind::Av: {
            double sum = 0;
            for (double s : scores) sum += s;
            return sum / static_cast<double>(scores.size());
        }
        case DistKind::Top5: {
            std::vector<double> sorted(scores.begin(), scores.end());
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            std::size_t take = std::min<std::size_t>(5, sorted.size());
            double sum = 0;
            for (std::size_t i = 0; i < take; ++i) sum += sorted[i];
            return sum / static_cast<double>(take);
        }
    }
    return 0.0;
}

double r2rs(const TokenStream& query, const std::vector<const TokenStream*>& set_members,
            Technique technique, DistKind kind, const CorpusStats& stats) {
    if (set_members.empty()) return 0.0;
    std::vector<double> scores;
    scores.reserve(set_members.size());
    for (const TokenStream* member : set_members)
        scores.push_back(similarity(technique, query, *member, stats));
    return distribution_score(scores, kind);
}

double r2c(const TokenStream& query, const TokenStream& class_text, Technique technique,
           const CorpusStats& stats) {
    if (technique != Technique::VSM && technique != Technique::JSD)
        throw_domain("r2c supports VSM and JSD only");
    return similarity(technique, query, class_text, stats);
}

bool is_external_metric_name(const std::string& name) {
    for (const char* known : kExternalMetricNames)
        if (name == known) return true;
    return false;
}

std::optional<double> ExternalMetricsTable::lookup(const std::string& release_id,
                                                   const std::string& class_path,
                                                   const std::string& metric) const {
    auto it = rows.find({release_id, class_path});
    if (it == rows.end()) return std::nullopt;
    auto mit = it->second.find(metric);
    if (mit == it->second.end()) return std::nullopt;
    return mit->second;
}

ExternalMetricsTable ingest_external(std::istream& in) {
    ExternalMetricsTable table;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 4 || trim(fields[0]) != "release_id")
                throw_domain("externals CSV must start with header release_id,class_path,metric,value");
            continue;
        }
        if (fields.size() != 4)
            throw_domain("externals CSV line " + std::to_string(line_no) + ": expected 4 fields");
        std::string release = trim(fields[0]);
        std::string class_path = trim(fields[1]);
        std::string metric = trim(fields[2]);
        if (!is_external_metric_name(metric))
            throw_domain("UnknownMetricName: " + metric + " at line " + std::to_string(line_no));
        double value;
        try {
            std::size_t pos = 0;
            value = std::stod(trim(fields[3]), &pos);
            if (pos != trim(fields[3]).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorCode::Domain,
                        "NonNumericValue: '" + trim(fields[3]) + "' at line " + std::to_string(line_no));
        }
        if (value < 0)
            throw_domain("external metric values must be non-negative (line " + std::to_string(line_no) + ")");
        auto& row = table.rows[{release, class_path}];
        if (row.count(metric))
            table.warnings.push_back("duplicate entry for (" + release + ", " + class_path + ", " +
                                     metric + "); last value kept");
        row[metric] = value;
    }
    return table;
}

const char* family_name(MetricFamily family) {
    switch (family) {
        case MetricFamily::R2RS: return "R2RS";
        case MetricFamily::R2C: return "R2C";
        case MetricFamily::TLCC: return "TLCC";
        case MetricFamily::SQ: return "SQ";
        case MetricFamily::CKJM: return "CKJM";
    }
    return "R2RS";
}

MetricFamily parse_family(const std::string& name) {
    if (name == "R2RS") return MetricFamily::R2RS;
    if (name == "R2C") return MetricFamily::R2C;
    if (name == "TLCC") return MetricFamily::TLCC;
    if (name == "SQ") return MetricFamily::SQ;
    if (name == "CKJM") return MetricFamily::CKJM;
    throw_domain("unknown metric family: " + name);
}

bool MetricsConfig::has_family(MetricFamily family) const {
    return std::find(families.begin(), families.end(), family) != families.end();
}

std::vector<std::string> MetricsConfig::feature_names() const {
    std::vector<std::string> names;
    if (has_family(MetricFamily::R2RS))
        for (Technique tech : techniques)
            for (DistKind dist : distributions)
                names.push_back(std::string("R2RS_") + technique_name(tech) + "_" + dist_kind_name(dist));
    if (has_family(MetricFamily::R2C)) {
        names.emplace_back("R2C_VSM");
        names.emplace_back("R2C_JSD");
    }
    if (has_family(MetricFamily::TLCC)) {
        names.emplace_back("TLCC_SCP");
        names.emplace_back("TLCC_Lin");
        names.emplace_back("TLCC_Log");
    }
    if (has_family(MetricFamily::SQ)) {
        names.emplace_back("SQ_Com");
        names.emplace_back("SQ_NCLOC");
        names.emplace_back("SQ_Viol");
    }
    if (has_family(MetricFamily::CKJM))
        for (const char* name : {"CKJM_WMC", "CKJM_DIT", "CKJM_NOC", "CKJM_CBO", "CKJM_RFC",
                                 "CKJM_LCOM", "CKJM_CA", "CKJM_NPM"})
            names.emplace_back(name);
    return names;
}

FeatureExtractor::FeatureExtractor(const Corpus& corpus, const LinkResult& links,
                                   const ReleaseBoundaryResult& boundaries,
                                   const ExternalMetricsTable& externals, MetricsConfig config)
    : corpus_(corpus), externals_(externals), config_(std::move(config)) {
    feature_names_ = config_.feature_names();
    for (const auto& change : links.changes) {
        if (!config_.history_all_kinds) {
            const Requirement* req = corpus_.find_requirement(change.requirement_key);
            if (!req || req->kind != IssueKind::NewFeature) continue;
        }
        linked_order_.push_back(&change);
    }
    // links.changes are already sorted by (first_ts, first_commit_id).
    for (const auto& boundary : boundaries.boundaries)
        release_cutoff_[boundary.release_id] = {boundary.boundary_ts, boundary.boundary_commit_id};
}

void FeatureExtractor::set_class_text_provider(std::function<std::string(const std::string&)> provider) {
    class_text_provider_ = std::move(provider);
    class_tokens_.clear();
}

const TokenStream& FeatureExtractor::tokens_of(const Requirement& req) const {
    auto it = requirement_tokens_.find(req.key);
    if (it != requirement_tokens_.end()) return it->second;
    TokenStream tokens = preprocess(req.title + " " + req.description, false);
    return requirement_tokens_.emplace(req.key, std::move(tokens)).first->second;
}

const TokenStream& FeatureExtractor::tokens_of_class(const std::string& class_path) const {
    auto it = class_tokens_.find(class_path);
    if (it != class_tokens_.end()) return it->second;
    std::string text = class_text_provider_ ? class_text_provider_(class_path) : class_path;
    TokenStream tokens = preprocess(text, true);
    return class_tokens_.emplace(class_path, std::move(tokens)).first->second;
}

FeatureExtractor::QueryContext FeatureExtractor::prepare(const RequirementChange& query) const {
    QueryContext ctx;
    ctx.query = &query;
    auto before_query = [&](const RequirementChange& prior) {
        if (prior.first_commit_ts != query.first_commit_ts)
            return prior.first_commit_ts < query.first_commit_ts;
        return prior.first_commit_id < query.first_commit_id;
    };
    for (std::size_t i = 0; i < linked_order_.size(); ++i)
        if (linked_order_[i]->requirement_key != query.requirement_key &&
            before_query(*linked_order_[i]))
            ctx.priors.push_back(i);

    ctx.tlcc_priors = ctx.priors;
    if (config_.tlcc_per_release) {
        const Requirement* req = corpus_.find_requirement(query.requirement_key);
        if (req && req->release_id) {
            auto it = release_cutoff_.find(*req->release_id);
            if (it != release_cutoff_.end()) {
                const auto& [cut_ts, cut_id] = it->second;
                ctx.tlcc_priors.clear();
                for (std::size_t i : ctx.priors) {
                    const RequirementChange* prior = linked_order_[i];
                    if (prior->first_commit_ts < cut_ts ||
                        (prior->first_commit_ts == cut_ts && prior->first_commit_id <= cut_id))
                        ctx.tlcc_priors.push_back(i);
                }
            }
        }
    }

    const Requirement* query_req = corpus_.find_requirement(query.requirement_key);
    for (std::size_t i : ctx.priors)
        ctx.stats.add_document(tokens_of(*corpus_.find_requirement(linked_order_[i]->requirement_key)));
    if (query_req) ctx.stats.add_document(tokens_of(*query_req));
    return ctx;
}

ClassHistory FeatureExtractor::history_for(const QueryContext& ctx,
                                           const std::string& class_path) const {
    ClassHistory history;
    history.flags.reserve(ctx.tlcc_priors.size());
    for (std::size_t i : ctx.tlcc_priors)
        history.flags.push_back(linked_order_[i]->touched_files.count(class_path) ? 1 : 0);
    return history;
}

std::vector<const RequirementChange*> FeatureExtractor::requirements_set(
    const QueryContext& ctx, const std::string& class_path) const {
    std::vector<const RequirementChange*> members;
    for (std::size_t i : ctx.priors)
        if (linked_order_[i]->touched_files.count(class_path)) members.push_back(linked_order_[i]);
    if (members.size() > config_.requirements_set_cap)
        members.erase(members.begin(),
                      members.end() - static_cast<std::ptrdiff_t>(config_.requirements_set_cap));
    return members;
}

double FeatureExtractor::pair_score(const QueryContext& ctx, const Requirement& member,
                                    Technique technique) const {
    auto key = std::make_pair(member.key, static_cast<int>(technique));
    auto it = ctx.pair_cache.find(key);
    if (it != ctx.pair_cache.end()) return it->second;
    const Requirement* query_req = corpus_.find_requirement(ctx.query->requirement_key);
    double score = similarity(technique, tokens_of(*query_req), tokens_of(member), ctx.stats);
    ctx.pair_cache.emplace(key, score);
    return score;
}

MetricVector FeatureExtractor::assemble(const QueryContext& ctx,
                                        const std::string& class_path) const {
    MetricVector vec;
    vec.values.reserve(feature_names_.size());
    const Requirement* query_req = corpus_.find_requirement(ctx.query->requirement_key);

    if (config_.has_family(MetricFamily::R2RS)) {
        auto members = requirements_set(ctx, class_path);
        for (Technique tech : config_.techniques) {
            std::vector<double> scores;
            scores.reserve(members.size());
            for (const RequirementChange* member : members)
                scores.push_back(pair_score(ctx, *corpus_.find_requirement(member->requirement_key), tech));
            for (DistKind dist : config_.distributions)
                vec.values.emplace_back(distribution_score(scores, dist));
        }
    }
    if (config_.has_family(MetricFamily::R2C)) {
        const TokenStream& query_tokens = tokens_of(*query_req);
        const TokenStream& class_tokens = tokens_of_class(class_path);
        vec.values.emplace_back(r2c(query_tokens, class_tokens, Technique::VSM, ctx.stats));
        vec.values.emplace_back(r2c(query_tokens, class_tokens, Technique::JSD, ctx.stats));
    }
    if (config_.has_family(MetricFamily::TLCC)) {
        ClassHistory history = history_for(ctx, class_path);
        if (history.flags.empty()) {
            vec.values.emplace_back(0.0);
            vec.values.emplace_back(0.0);
            vec.values.emplace_back(0.0);
        } else {
            vec.values.emplace_back(tlcc_scp(history));
            vec.values.emplace_back(tlcc_lin(history));
            vec.values.emplace_back(tlcc_log(history));
        }
    }
    std::string release = query_req && query_req->release_id ? *query_req->release_id : "";
    if (config_.has_family(MetricFamily::SQ))
        for (const char* name : {"SQ_Com", "SQ_NCLOC", "SQ_Viol"})
            vec.values.push_back(externals_.lookup(release, class_path, name));
    if (config_.has_family(MetricFamily::CKJM))
        for (const char* name : {"CKJM_WMC", "CKJM_DIT", "CKJM_NOC", "CKJM_CBO", "CKJM_RFC",
                                 "CKJM_LCOM", "CKJM_CA", "CKJM_NPM"})
            vec.values.push_back(externals_.lookup(release, class_path, name));
    return vec;
}

}  // namespace ccp
