#include "pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "stats.hpp"

namespace ccp {

namespace {

namespace fs = std::filesystem;

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ',';
        out += item;
    }
    return out;
}

std::vector<std::string> family_names(const MetricsConfig& config) {
    std::vector<std::string> names;
    for (MetricFamily f : config.families) names.emplace_back(family_name(f));
    return names;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("IoFailure: cannot read " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_io("IoFailure: cannot write " + path);
    return out;
}

std::string out_path(const RunConfig& config, const std::string& name) {
    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    return (dir / name).string();
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw_domain("expected a boolean, got: " + value);
}

void write_json(const nlohmann::ordered_json& doc, const std::string& path) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

}  // namespace

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "commits") config.commits_path = value;
    else if (key == "issues") config.issues_path = value;
    else if (key == "releases") config.releases_path = value;
    else if (key == "externals") config.externals_path = value;
    else if (key == "class_text_dir") config.class_text_dir = value;
    else if (key == "out") config.out_dir = value;
    else if (key == "project_key") config.project_key = value;
    else if (key == "families") {
        config.metrics.families.clear();
        for (const auto& item : split(value, ','))
            if (!trim(item).empty()) config.metrics.families.push_back(parse_family(trim(item)));
    } else if (key == "techniques") {
        config.metrics.techniques.clear();
        for (const auto& item : split(value, ','))
            if (!trim(item).empty()) config.metrics.techniques.push_back(parse_technique(trim(item)));
    } else if (key == "distributions") {
        config.metrics.distributions.clear();
        for (const auto& item : split(value, ','))
            if (!trim(item).empty())
                config.metrics.distributions.push_back(parse_dist_kind(trim(item)));
    } else if (key == "tlcc_per_release") {
        config.metrics.tlcc_per_release = parse_bool(value);
    } else if (key == "history_all_kinds") {
        config.metrics.history_all_kinds = parse_bool(value);
    } else if (key == "set_cap") {
        config.metrics.requirements_set_cap = static_cast<std::size_t>(std::stoul(value));
    } else if (key == "learner") {
        config.learner.kind = parse_learner(value);
    } else if (key == "seed") {
        config.sample.seed = std::stoull(value);
        config.learner.seed = config.sample.seed;
    } else if (key == "repeats") {
        config.sample.repeats = static_cast<std::size_t>(std::stoul(value));
        if (config.sample.repeats < 1) throw_domain("repeats must be >= 1");
    } else if (key == "igr_bins") {
        config.igr_bins = static_cast<std::size_t>(std::stoul(value));
    } else {
        throw_domain("unknown config key: " + key);
    }
}

RunConfig parse_run_config(std::istream& in) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw_domain("config line " + std::to_string(line_no) + ": expected key=value");
        apply_override(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    auto in = open_input(path);
    return parse_run_config(in);
}

std::string canonical_config(const RunConfig& config) {
    std::ostringstream out;
    out << "commits=" << config.commits_path << '\n'
        << "issues=" << config.issues_path << '\n'
        << "releases=" << config.releases_path << '\n'
        << "externals=" << config.externals_path << '\n'
        << "class_text_dir=" << config.class_text_dir << '\n'
        << "out=" << config.out_dir << '\n'
        << "project_key=" << config.project_key << '\n'
        << "families=" << join_list(family_names(config.metrics)) << '\n';
    std::vector<std::string> techniques, distributions;
    for (Technique t : config.metrics.techniques) techniques.emplace_back(technique_name(t));
    for (DistKind d : config.metrics.distributions) distributions.emplace_back(dist_kind_name(d));
    out << "techniques=" << join_list(techniques) << '\n'
        << "distributions=" << join_list(distributions) << '\n'
        << "tlcc_per_release=" << (config.metrics.tlcc_per_release ? "true" : "false") << '\n'
        << "history_all_kinds=" << (config.metrics.history_all_kinds ? "true" : "false") << '\n'
        << "set_cap=" << config.metrics.requirements_set_cap << '\n'
        << "learner=" << learner_name(config.learner.kind) << '\n'
        << "seed=" << config.sample.seed << '\n'
        << "repeats=" << config.sample.repeats << '\n'
        << "igr_bins=" << config.igr_bins << '\n';
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config(config))));
    return buf;
}

PipelineState load_pipeline(const RunConfig& config) {
    if (config.project_key.empty()) throw_domain("project_key is required");
    if (config.commits_path.empty() || config.issues_path.empty())
        throw_domain("commits and issues input paths are required");

    PipelineState state;
    state.config = config;
    auto commits_in = open_input(config.commits_path);
    auto issues_in = open_input(config.issues_path);
    std::vector<std::string> releases;
    if (!config.releases_path.empty()) {
        auto releases_in = open_input(config.releases_path);
        releases = parse_releases(releases_in);
    }
    state.corpus = assemble_corpus(config.project_key, parse_commit_log(commits_in),
                                   parse_issues(issues_in, config.project_key),
                                   std::move(releases));

    LinkConfig link_config;
    link_config.project_key = config.project_key;
    link_config.history_all_kinds = config.metrics.history_all_kinds;
    state.links = link(state.corpus, link_config);
    state.boundaries = release_boundaries(state.corpus, state.links);

    if (!config.externals_path.empty()) {
        auto externals_in = open_input(config.externals_path);
        state.externals = ingest_external(externals_in);
    }
    return state;
}

FeatureMatrix pipeline_matrix(const PipelineState& state) {
    FeatureExtractor extractor(state.corpus, state.links, state.boundaries, state.externals,
                               state.config.metrics);
    if (!state.config.class_text_dir.empty()) {
        std::string dir = state.config.class_text_dir;
        extractor.set_class_text_provider([dir](const std::string& class_path) {
            std::ifstream in(fs::path(dir) / class_path);
            if (!in) return class_path;  // fall back to identifier tokens of the path
            std::ostringstream text;
            text << in.rdbuf();
            return text.str();
        });
    }
    return build_matrix(state.corpus, state.links, extractor);
}

std::string cmd_ingest(const RunConfig& config) {
    PipelineState state = load_pipeline(config);
    ValidationReport report = validate(state.corpus);
    nlohmann::ordered_json doc;
    doc["config_hash"] = config_hash(config);
    doc["project_key"] = config.project_key;
    doc["commits"] = report.commit_count;
    doc["requirements"] = {{"new_feature", report.feature_count},
                           {"bug", report.bug_count},
                           {"other", report.other_count}};
    doc["distinct_files"] = report.distinct_file_count;
    doc["warnings"] = report.warnings;
    write_json(doc, out_path(config, "ingest-report.json"));
    std::ostringstream summary;
    summary << "ingested " << report.commit_count << " commits, "
            << report.feature_count + report.bug_count + report.other_count << " requirements ("
            << report.warnings.size() << " warnings)";
    return summary.str();
}

std::string cmd_link(const RunConfig& config) {
    PipelineState state = load_pipeline(config);
    write_link_report(state.corpus, state.links, out_path(config, "link-report.json"),
                      config_hash(config));
    std::ostringstream summary;
    summary << "linked " << state.links.changes.size() << "/"
            << state.links.changes.size() + state.links.unlinked_requirements.size()
            << " requirements";
    return summary.str();
}

std::string cmd_matrix(const RunConfig& config) {
    PipelineState state = load_pipeline(config);
    FeatureMatrix matrix = pipeline_matrix(state);
    export_csv_file(matrix, out_path(config, "matrix.csv"));
    export_arff_file(matrix, out_path(config, "matrix.arff"));

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["rows"] = matrix.rows.size();
    manifest["positives"] = matrix.positive_count();
    try {
        auto [train_side, test_side] = time_split(matrix);
        manifest["train_rows"] = train_side.rows.size();
        manifest["test_rows"] = test_side.rows.size();
        manifest["boundary_requirement"] = test_side.rows.front().requirement_key;
    } catch (const Error& err) {
        manifest["split_error"] = err.what();
    }
    write_json(manifest, out_path(config, "split.json"));

    std::ostringstream summary;
    summary << "matrix " << matrix.rows.size() << " rows x " << matrix.feature_names.size()
            << " features, " << matrix.positive_count() << " positives";
    return summary.str();
}

std::string cmd_eval(const RunConfig& config) {
    PipelineState state = load_pipeline(config);
    FeatureMatrix matrix = pipeline_matrix(state);
    LearnerSpec spec = config.learner;
    EvalReport report = run_protocol(spec, matrix, config.sample);
    std::ostringstream body;
    write_eval_report(report, body);
    nlohmann::ordered_json doc;
    doc["config_hash"] = config_hash(config);
    doc["report"] = nlohmann::ordered_json::parse(body.str());
    write_json(doc, out_path(config, "eval-report.json"));

    std::ostringstream summary;
    summary << report.learner << " mean F1 " << format_double(report.mean.f1) << " over "
            << report.samples.size() << " samples";
    return summary.str();
}

std::string cmd_igr(const RunConfig& config) {
    PipelineState state = load_pipeline(config);
    FeatureMatrix matrix = pipeline_matrix(state);
    auto entries = igr_rank(matrix, config.igr_bins);
    auto out = open_output(out_path(config, "igr-rank.csv"));
    out << "# config_hash=" << config_hash(config) << '\n';
    write_igr_rank(entries, out);
    std::ostringstream summary;
    summary << "ranked " << entries.size() << " features";
    if (!entries.empty()) summary << "; top: " << entries.front().feature;
    return summary.str();
}

std::string cmd_select(const RunConfig& config) {
    PipelineState state = load_pipeline(config);
    FeatureMatrix matrix = pipeline_matrix(state);
    SampleSpec inner{config.sample.seed, 5};
    SelectionResult result = wrapper_select(config.learner, matrix, inner);
    // the chosen subset is re-scored under the full protocol
    if (!result.subset.empty()) {
        EvalReport full =
            run_protocol(config.learner, project_features(matrix, result.subset), config.sample);
        result.score = full.mean.f1;
    }
    auto out = open_output(out_path(config, "selection.json"));
    nlohmann::ordered_json doc;
    doc["config_hash"] = config_hash(config);
    doc["learner"] = learner_name(config.learner.kind);
    doc["subset"] = result.subset;
    doc["score"] = result.score;
    doc["evaluated_subsets"] = result.evaluated_subsets;
    out << doc.dump(2) << '\n';
    std::ostringstream summary;
    summary << "selected " << result.subset.size() << " features, score "
            << format_double(result.score);
    return summary.str();
}

std::string cmd_stats(const RunConfig& config, const std::string& report_a,
                      const std::string& report_b) {
    auto load_f1 = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw_io("IoFailure: cannot read " + path);
        nlohmann::json doc = nlohmann::json::parse(in, nullptr, true, true);
        const nlohmann::json& report = doc.contains("report") ? doc["report"] : doc;
        std::vector<double> f1;
        for (const auto& sample : report.at("per_sample")) f1.push_back(sample.at("f1"));
        if (f1.empty()) throw_domain("no per-sample entries in " + path);
        return f1;
    };
    std::vector<std::vector<double>> groups{load_f1(report_a), load_f1(report_b)};
    KruskalWallisResult kw = kruskal_wallis(groups);

    StatsTest test;
    test.name = "kruskal_wallis";
    test.statistic = kw.h;
    test.df = kw.df;
    test.p = kw.p;
    test.reject = kw.p < 0.05;
    if (kw.degenerate) test.notes.push_back("degenerate: all observations equal");
    if (kw.small_sample) test.notes.push_back("small-sample caveat: a group has fewer than 5 observations");
    auto out = open_output(out_path(config, "stats-report.json"));
    nlohmann::ordered_json doc;
    doc["config_hash"] = config_hash(config);
    doc["alpha"] = 0.05;
    doc["inputs"] = {report_a, report_b};
    doc["tests"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json entry;
    entry["test"] = test.name;
    entry["statistic"] = test.statistic;
    entry["df"] = test.df;
    entry["p"] = test.p;
    entry["reject"] = test.reject;
    entry["notes"] = test.notes;
    doc["tests"].push_back(entry);
    out << doc.dump(2) << '\n';

    std::ostringstream summary;
    summary << "H=" << format_double(kw.h) << " p=" << format_double(kw.p)
            << (test.reject ? " (reject at 0.05)" : " (no rejection at 0.05)");
    return summary.str();
}

std::string cmd_report(const RunConfig& config) {
    nlohmann::ordered_json doc;
    doc["config_hash"] = config_hash(config);
    doc["config"] = canonical_config(config);
    nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
    for (const char* name : {"ingest-report.json", "link-report.json", "matrix.csv",
                             "matrix.arff", "split.json", "eval-report.json", "igr-rank.csv",
                             "selection.json", "stats-report.json"}) {
        fs::path path = fs::path(config.out_dir) / name;
        if (fs::exists(path)) artifacts.push_back(name);
    }
    doc["artifacts"] = artifacts;
    write_json(doc, out_path(config, "run-report.json"));
    return "run report with " + std::to_string(artifacts.size()) + " artifacts";
}

}  // namespace ccp
