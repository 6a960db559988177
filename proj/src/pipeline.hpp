#ifndef CCP_PIPELINE_HPP
#define CCP_PIPELINE_HPP

#include <string>
#include <vector>

#include "corpus.hpp"
#include "dataset.hpp"
#include "learn.hpp"
#include "linker.hpp"
#include "metrics.hpp"

namespace ccp {

// Resolved run settings; every artifact embeds the hash of this state so a
// rerun with the same inputs is byte-identical.
struct RunConfig {
    std::string commits_path;
    std::string issues_path;
    std::string releases_path;   // optional
    std::string externals_path;  // optional
    std::string class_text_dir;  // optional source snapshot for R2C
    std::string out_dir = ".";
    std::string project_key;
    MetricsConfig metrics;
    LearnerSpec learner;
    SampleSpec sample;
    std::size_t igr_bins = 10;
};

// key=value lines; '#' starts a comment. Unknown keys are rejected.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

std::string canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

struct PipelineState {
    RunConfig config;
    Corpus corpus;
    LinkResult links;
    ReleaseBoundaryResult boundaries;
    ExternalMetricsTable externals;
};

PipelineState load_pipeline(const RunConfig& config);
FeatureMatrix pipeline_matrix(const PipelineState& state);

// Each command writes its artifact(s) under config.out_dir and returns a
// one-line human summary.
std::string cmd_ingest(const RunConfig& config);
std::string cmd_link(const RunConfig& config);
std::string cmd_matrix(const RunConfig& config);
std::string cmd_eval(const RunConfig& config);
std::string cmd_igr(const RunConfig& config);
std::string cmd_select(const RunConfig& config);
std::string cmd_stats(const RunConfig& config, const std::string& report_a,
                      const std::string& report_b);
std::string cmd_report(const RunConfig& config);

}  // namespace ccp

#endif
