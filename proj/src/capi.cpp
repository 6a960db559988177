#include "ccp/ccp.h"

#include <exception>
#include <string>

#include "common.hpp"
#include "pipeline.hpp"
#include "stats.hpp"
#include "textsim.hpp"

struct ccp_run {
    ccp::RunConfig config;
    std::string summary;
    std::string last_error;
};

namespace {

int code_of(const ccp::Error& err) {
    return err.code() == ccp::ErrorCode::Domain ? CCP_ERR_DOMAIN : CCP_ERR_IO;
}

template <typename Fn>
int guarded(ccp_run* run, Fn&& fn) {
    if (!run) return CCP_ERR_DOMAIN;
    try {
        run->last_error.clear();
        fn();
        return CCP_OK;
    } catch (const ccp::Error& err) {
        run->last_error = err.what();
        return code_of(err);
    } catch (const std::exception& err) {
        run->last_error = err.what();
        return CCP_ERR_DOMAIN;
    }
}

}  // namespace

extern "C" {

const char* ccp_version(void) { return "1.0.0"; }

ccp_run* ccp_run_create(void) { return new (std::nothrow) ccp_run; }

void ccp_run_destroy(ccp_run* run) { delete run; }

int ccp_run_load_config(ccp_run* run, const char* path) {
    return guarded(run, [&] {
        if (!path) ccp::throw_domain("null config path");
        run->config = ccp::load_run_config(path);
    });
}

int ccp_run_set(ccp_run* run, const char* key, const char* value) {
    return guarded(run, [&] {
        if (!key || !value) ccp::throw_domain("null key or value");
        ccp::apply_override(run->config, key, value);
    });
}

int ccp_run_command(ccp_run* run, const char* name) {
    return guarded(run, [&] {
        if (!name) ccp::throw_domain("null command name");
        std::string command = name;
        if (command == "ingest") run->summary = ccp::cmd_ingest(run->config);
        else if (command == "link") run->summary = ccp::cmd_link(run->config);
        else if (command == "matrix") run->summary = ccp::cmd_matrix(run->config);
        else if (command == "eval") run->summary = ccp::cmd_eval(run->config);
        else if (command == "igr") run->summary = ccp::cmd_igr(run->config);
        else if (command == "select") run->summary = ccp::cmd_select(run->config);
        else if (command == "report") run->summary = ccp::cmd_report(run->config);
        else ccp::throw_domain("unknown command: " + command);
    });
}

int ccp_run_stats(ccp_run* run, const char* report_a, const char* report_b) {
    return guarded(run, [&] {
        if (!report_a || !report_b) ccp::throw_domain("two eval report paths are required");
        run->summary = ccp::cmd_stats(run->config, report_a, report_b);
    });
}

const char* ccp_run_summary(const ccp_run* run) { return run ? run->summary.c_str() : ""; }

const char* ccp_run_last_error(const ccp_run* run) { return run ? run->last_error.c_str() : ""; }

int ccp_text_similarity(const char* technique, const char* text_a, const char* text_b,
                        double* similarity_out) {
    if (!technique || !text_a || !text_b || !similarity_out) return CCP_ERR_DOMAIN;
    try {
        ccp::Technique tech = ccp::parse_technique(technique);
        ccp::TokenStream a = ccp::preprocess(text_a, false);
        ccp::TokenStream b = ccp::preprocess(text_b, false);
        ccp::CorpusStats stats;
        stats.add_document(a);
        stats.add_document(b);
        *similarity_out = ccp::similarity(tech, a, b, stats);
        return CCP_OK;
    } catch (const std::exception&) {
        return CCP_ERR_DOMAIN;
    }
}

int ccp_fisher_exact_2x2(uint64_t a, uint64_t b, uint64_t c, uint64_t d, double* p_out) {
    if (!p_out) return CCP_ERR_DOMAIN;
    try {
        *p_out = ccp::fisher_exact_2x2(a, b, c, d);
        return CCP_OK;
    } catch (const ccp::Error&) {
        return CCP_ERR_DOMAIN;
    }
}

}  // extern "C"
