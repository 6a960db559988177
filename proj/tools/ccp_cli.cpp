// Command-line front end; everything goes through the public C API.
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ccp/ccp.h"

namespace {

struct RunDeleter {
    void operator()(ccp_run* run) const { ccp_run_destroy(run); }
};

using RunHandle = std::unique_ptr<ccp_run, RunDeleter>;

int fail(const ccp_run* run, int status) {
    std::fprintf(stderr, "error: %s\n", ccp_run_last_error(run));
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"requirement-to-class impact pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ccp_version()));

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    bool with_r2rs = false, without_r2rs = false;

    auto add_override = [&](const std::string& key) {
        return [&overrides, key](const std::string& value) { overrides.emplace_back(key, value); };
    };

    app.add_option_function<std::string>("--config", [&](const std::string& v) { config_path = v; },
                                         "key=value config file");
    app.add_option_function<std::string>("--commits", add_override("commits"), "commits.jsonl path");
    app.add_option_function<std::string>("--issues", add_override("issues"), "issues.jsonl path");
    app.add_option_function<std::string>("--releases", add_override("releases"), "releases.txt path");
    app.add_option_function<std::string>("--externals", add_override("externals"),
                                         "externals.csv path");
    app.add_option_function<std::string>("--class-text-dir", add_override("class_text_dir"),
                                         "source snapshot directory for requirement-to-class text");
    app.add_option_function<std::string>("--project-key", add_override("project_key"),
                                         "issue key prefix, e.g. TIKA");
    app.add_option_function<std::string>("--out", add_override("out"), "output directory");
    app.add_option_function<std::string>("--families", add_override("families"),
                                         "comma list: R2RS,R2C,TLCC,SQ,CKJM");
    app.add_option_function<std::string>("--technique", add_override("techniques"),
                                         "comma list: VSM,JSD,GC,OPC,BC");
    app.add_option_function<std::string>("--distribution", add_override("distributions"),
                                         "comma list: Max,Av,Top5");
    app.add_option_function<std::string>("--learner", add_override("learner"),
                                         "DecisionTree|RandomForest|NaiveBayes|Logistic|Bagging");
    app.add_option_function<std::string>("--seed", add_override("seed"), "base seed");
    app.add_option_function<std::string>("--repeats", add_override("repeats"),
                                         "undersampling repeats");
    app.add_flag("--with-r2rs", with_r2rs, "enable all metric families");
    app.add_flag("--without-r2rs", without_r2rs, "drop the R2RS family");

    for (const char* name : {"ingest", "link", "matrix", "eval", "igr", "select", "report"})
        app.add_subcommand(name);

    auto* stats = app.add_subcommand("stats", "compare two eval reports");
    std::string report_a, report_b;
    stats->add_option("report_a", report_a)->required();
    stats->add_option("report_b", report_b)->required();

    auto* sim = app.add_subcommand("sim", "score two texts with one technique");
    std::string sim_technique = "VSM", sim_a, sim_b;
    sim->add_option("--technique", sim_technique);
    sim->add_option("text_a", sim_a)->required();
    sim->add_option("text_b", sim_b)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sim->parsed()) {
        double score = 0.0;
        if (ccp_text_similarity(sim_technique.c_str(), sim_a.c_str(), sim_b.c_str(), &score) !=
            CCP_OK) {
            std::fprintf(stderr, "error: unknown technique %s\n", sim_technique.c_str());
            return 1;
        }
        std::printf("%.6f\n", score);
        return 0;
    }

    RunHandle run(ccp_run_create());
    if (!run) {
        std::fprintf(stderr, "error: out of memory\n");
        return 2;
    }
    if (!config_path.empty()) {
        int status = ccp_run_load_config(run.get(), config_path.c_str());
        if (status != CCP_OK) return fail(run.get(), status);
    }
    for (const auto& [key, value] : overrides) {
        int status = ccp_run_set(run.get(), key.c_str(), value.c_str());
        if (status != CCP_OK) return fail(run.get(), status);
    }
    if (without_r2rs) {
        int status = ccp_run_set(run.get(), "families", "R2C,TLCC,SQ,CKJM");
        if (status != CCP_OK) return fail(run.get(), status);
    } else if (with_r2rs) {
        int status = ccp_run_set(run.get(), "families", "R2RS,R2C,TLCC,SQ,CKJM");
        if (status != CCP_OK) return fail(run.get(), status);
    }

    int status;
    if (stats->parsed()) {
        status = ccp_run_stats(run.get(), report_a.c_str(), report_b.c_str());
    } else {
        status = ccp_run_command(run.get(), app.get_subcommands().front()->get_name().c_str());
    }
    if (status != CCP_OK) return fail(run.get(), status);
    std::printf("%s\n", ccp_run_summary(run.get()));
    return 0;
}
