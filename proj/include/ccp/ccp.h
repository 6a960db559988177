#ifndef CCP_H
#define CCP_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; ccp_run_last_error() carries the message for nonzero codes. */
#define CCP_OK 0
#define CCP_ERR_DOMAIN 1
#define CCP_ERR_IO 2

const char* ccp_version(void);

/* Opaque pipeline run: configure with key=value pairs or a config file, then
 * dispatch commands. Not thread-safe; use one handle per thread. */
typedef struct ccp_run ccp_run;

ccp_run* ccp_run_create(void);
void ccp_run_destroy(ccp_run* run);

int ccp_run_load_config(ccp_run* run, const char* path);
int ccp_run_set(ccp_run* run, const char* key, const char* value);

/* name: ingest | link | matrix | eval | igr | select | report.
 * The one-line summary of the last successful command is kept on the handle. */
int ccp_run_command(ccp_run* run, const char* name);

/* Kruskal-Wallis over the per-sample F1 values of two eval reports. */
int ccp_run_stats(ccp_run* run, const char* report_a, const char* report_b);

/* Valid until the next call on the same handle. */
const char* ccp_run_summary(const ccp_run* run);
const char* ccp_run_last_error(const ccp_run* run);

/* Stateless helpers. */
int ccp_text_similarity(const char* technique, const char* text_a, const char* text_b,
                        double* similarity_out);
int ccp_fisher_exact_2x2(uint64_t a, uint64_t b, uint64_t c, uint64_t d, double* p_out);

#ifdef __cplusplus
}
#endif

#endif
