#ifndef CCP_LINKER_HPP
#define CCP_LINKER_HPP

#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace ccp {

struct LinkConfig {
    std::string project_key;
    std::vector<std::string> class_extensions{".java"};

    // Whether Bug/Other touches feed class histories (features always do).
    bool history_all_kinds = true;

    // Instantiated pattern for key K: .*K-([0-9]+).*  All matches collected.
    std::string regex_pattern() const;

    bool is_class_file(const std::string& path) const;
};

struct RequirementChange {
    std::string requirement_key;
    std::vector<std::string> linked_commits;  // ordered by (timestamp, id)
    std::set<std::string> touched_files;
    std::set<std::string> untouched_files;
    std::string first_commit_id;
    std::int64_t first_commit_ts = 0;
};

struct ReleaseBoundary {
    std::string release_id;
    std::string boundary_commit_id;  // empty when the release starts at the repo root
    std::int64_t boundary_ts = 0;
    bool at_root = false;
};

struct LinkResult {
    std::vector<RequirementChange> changes;        // one per requirement with >=1 match
    std::vector<std::string> unlinked_requirements;
    std::size_t linked_commit_count = 0;
    std::size_t total_commit_count = 0;
};

struct ReleaseBoundaryResult {
    std::vector<ReleaseBoundary> boundaries;
    std::vector<std::string> warnings;  // releases with no linked requirement
};

// Scans every commit message for <KEY>-<number> references and assembles the
// per-requirement change records, including the approximate untouched-file set
// reconstructed by replaying Added/Deleted events up to the first linked commit.
LinkResult link(const Corpus& corpus, const LinkConfig& config);

ReleaseBoundaryResult release_boundaries(const Corpus& corpus, const LinkResult& links);

void write_link_report(const Corpus& corpus, const LinkResult& links, const std::string& path,
                       const std::string& config_hash);

}  // namespace ccp

#endif
