#ifndef CCP_CORPUS_HPP
#define CCP_CORPUS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ccp {

enum class ChangeKind { Added, Modified, Deleted };

struct FileChange {
    std::string path;
    ChangeKind kind = ChangeKind::Modified;

    bool operator==(const FileChange&) const = default;
};

struct Commit {
    std::string id;
    std::vector<std::string> parents;
    std::int64_t timestamp = 0;  // UTC seconds since epoch
    std::string message;
    std::vector<FileChange> files;

    bool operator==(const Commit&) const = default;
};

enum class IssueKind { NewFeature, Bug, Other };

struct Requirement {
    std::string key;
    IssueKind kind = IssueKind::Other;
    std::string title;
    std::string description;
    std::int64_t created = 0;
    std::optional<std::string> release_id;

    bool operator==(const Requirement&) const = default;
};

// Immutable once assembled. Commits sorted by (timestamp, id), requirements by
// (created, key). Safe to share across threads.
struct Corpus {
    std::string project_key;
    std::vector<Commit> commits;
    std::vector<Requirement> requirements;
    std::vector<std::string> releases;  // chronological order as declared

    const Commit* find_commit(const std::string& id) const;
    const Requirement* find_requirement(const std::string& key) const;

    bool operator==(const Corpus& other) const {
        return project_key == other.project_key && commits == other.commits &&
               requirements == other.requirements && releases == other.releases;
    }

    std::unordered_map<std::string, std::size_t> commit_index;
    std::unordered_map<std::string, std::size_t> requirement_index;
};

// Total order over commits used everywhere downstream.
inline bool commit_before(const Commit& a, const Commit& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
}

struct ValidationReport {
    std::size_t commit_count = 0;
    std::size_t feature_count = 0;
    std::size_t bug_count = 0;
    std::size_t other_count = 0;
    std::size_t distinct_file_count = 0;
    std::vector<std::string> warnings;
};

std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t seconds);

ChangeKind parse_change_kind(const std::string& text);
const char* change_kind_name(ChangeKind kind);
IssueKind map_issue_kind(const std::string& type_field);
const char* issue_kind_name(IssueKind kind);

// One JSON object per line; throws Error("MalformedRecord...") with the line
// number, Error("DuplicateCommit...") on repeated ids.
std::vector<Commit> parse_commit_log(std::istream& in);

// Rejects keys that do not start with "<project_key>-".
std::vector<Requirement> parse_issues(std::istream& in, const std::string& project_key);

std::vector<std::string> parse_releases(std::istream& in);

Corpus assemble_corpus(std::string project_key, std::vector<Commit> commits,
                       std::vector<Requirement> requirements,
                       std::vector<std::string> releases);

ValidationReport validate(const Corpus& corpus);

// Inverse of the parsers; round-trips through parse_commit_log/parse_issues.
void serialize_commits(const Corpus& corpus, std::ostream& out);
void serialize_issues(const Corpus& corpus, std::ostream& out);

}  // namespace ccp

#endif
