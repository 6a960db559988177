#include "linker.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "common.hpp"

namespace ccp {

namespace {

std::string escape_regex(const std::string& text) {
    static const std::string special = R"(\.^$|()[]{}*+?)";
    std::string out;
    for (char c : text) {
        if (special.find(c) != std::string::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string LinkConfig::regex_pattern() const {
    return ".*" + escape_regex(project_key) + "-([0-9]+).*";
}

bool LinkConfig::is_class_file(const std::string& path) const {
    for (const auto& ext : class_extensions)
        if (path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
            return true;
    return false;
}

LinkResult link(const Corpus& corpus, const LinkConfig& config) {
    LinkResult result;
    result.total_commit_count = corpus.commits.size();

    // Case-sensitive scan over the full message; all matches collected.
    std::regex key_regex(escape_regex(config.project_key) + "-([0-9]+)");

    std::unordered_map<std::string, std::size_t> change_of_key;  // key -> index in changes
    std::vector<std::vector<std::size_t>> commits_of_change;     // commit indices per change

    for (std::size_t ci = 0; ci < corpus.commits.size(); ++ci) {
        const Commit& commit = corpus.commits[ci];
        std::unordered_set<std::string> keys_in_commit;
        for (auto it = std::sregex_iterator(commit.message.begin(), commit.message.end(), key_regex);
             it != std::sregex_iterator(); ++it) {
            keys_in_commit.insert(config.project_key + "-" + (*it)[1].str());
        }
        bool linked = false;
        for (const auto& key : keys_in_commit) {
            const Requirement* req = corpus.find_requirement(key);
            if (!req) continue;  // number does not name a known requirement
            linked = true;
            auto [it, inserted] = change_of_key.try_emplace(key, result.changes.size());
            if (inserted) {
                RequirementChange change;
                change.requirement_key = key;
                result.changes.push_back(std::move(change));
                commits_of_change.emplace_back();
            }
            commits_of_change[it->second].push_back(ci);
        }
        if (linked) ++result.linked_commit_count;
    }

    // Commit indices already arrive in (timestamp, id) order.
    for (std::size_t i = 0; i < result.changes.size(); ++i) {
        RequirementChange& change = result.changes[i];
        for (std::size_t ci : commits_of_change[i]) {
            const Commit& commit = corpus.commits[ci];
            change.linked_commits.push_back(commit.id);
            for (const auto& fc : commit.files)
                if (config.is_class_file(fc.path)) change.touched_files.insert(fc.path);
        }
        change.first_commit_id = change.linked_commits.front();
        change.first_commit_ts = corpus.commits[commits_of_change[i].front()].timestamp;
    }

    // Untouched files: replay Added/Deleted events once, snapshotting the live
    // class universe at each requirement's first linked commit.
    std::map<std::size_t, std::vector<std::size_t>> changes_at_commit;  // commit idx -> change idx
    for (std::size_t i = 0; i < result.changes.size(); ++i)
        changes_at_commit[commits_of_change[i].front()].push_back(i);

    std::unordered_set<std::string> live;
    std::unordered_map<std::string, std::int64_t> first_seen;
    for (std::size_t ci = 0; ci < corpus.commits.size(); ++ci) {
        const Commit& commit = corpus.commits[ci];
        for (const auto& fc : commit.files) {
            if (!config.is_class_file(fc.path)) continue;
            if (fc.kind == ChangeKind::Deleted) {
                live.erase(fc.path);
            } else {
                live.insert(fc.path);
                first_seen.try_emplace(fc.path, commit.timestamp);
            }
        }
        auto it = changes_at_commit.find(ci);
        if (it == changes_at_commit.end()) continue;
        for (std::size_t idx : it->second) {
            RequirementChange& change = result.changes[idx];
            const Requirement* req = corpus.find_requirement(change.requirement_key);
            for (const auto& path : live) {
                if (first_seen.at(path) > req->created) continue;
                if (change.touched_files.count(path)) continue;
                change.untouched_files.insert(path);
            }
        }
    }

    for (const auto& req : corpus.requirements)
        if (!change_of_key.count(req.key)) result.unlinked_requirements.push_back(req.key);

    // Deterministic output order regardless of discovery order.
    std::sort(result.changes.begin(), result.changes.end(),
              [](const RequirementChange& a, const RequirementChange& b) {
                  if (a.first_commit_ts != b.first_commit_ts) return a.first_commit_ts < b.first_commit_ts;
                  if (a.first_commit_id != b.first_commit_id) return a.first_commit_id < b.first_commit_id;
                  return a.requirement_key < b.requirement_key;
              });
    return result;
}

ReleaseBoundaryResult release_boundaries(const Corpus& corpus, const LinkResult& links) {
    ReleaseBoundaryResult result;
    std::unordered_map<std::string, const RequirementChange*> earliest;  // release -> change
    for (const auto& change : links.changes) {
        const Requirement* req = corpus.find_requirement(change.requirement_key);
        if (!req || !req->release_id) continue;
        auto [it, inserted] = earliest.try_emplace(*req->release_id, &change);
        if (!inserted) {
            const RequirementChange* cur = it->second;
            if (change.first_commit_ts < cur->first_commit_ts ||
                (change.first_commit_ts == cur->first_commit_ts &&
                 change.first_commit_id < cur->first_commit_id))
                it->second = &change;
        }
    }
    for (const auto& release : corpus.releases) {
        auto it = earliest.find(release);
        if (it == earliest.end()) {
            result.warnings.push_back("release " + release + " has no linked requirement; omitted");
            continue;
        }
        const RequirementChange* change = it->second;
        const Commit* first = corpus.find_commit(change->first_commit_id);
        ReleaseBoundary boundary;
        boundary.release_id = release;
        if (first->parents.empty()) {
            bool is_root = !corpus.commits.empty() && corpus.commits.front().id == first->id;
            if (!is_root)
                throw_domain("OrphanCommit: " + first->id + " has no parent and is not the repository root");
            boundary.at_root = true;
            boundary.boundary_ts = first->timestamp - 1;  // synthetic pre-history marker
        } else {
            const Commit* parent = corpus.find_commit(first->parents.front());
            if (!parent)
                throw_domain("OrphanCommit: parent " + first->parents.front() + " of " + first->id +
                             " is not in the corpus");
            boundary.boundary_commit_id = parent->id;
            boundary.boundary_ts = parent->timestamp;
        }
        result.boundaries.push_back(std::move(boundary));
    }
    return result;
}

void write_link_report(const Corpus& corpus, const LinkResult& links, const std::string& path,
                       const std::string& config_hash) {
    nlohmann::json report;
    report["project_key"] = corpus.project_key;
    report["config_hash"] = config_hash;
    report["total_commits"] = links.total_commit_count;
    report["linked_commits"] = links.linked_commit_count;
    report["linked_commit_fraction"] =
        links.total_commit_count == 0
            ? 0.0
            : static_cast<double>(links.linked_commit_count) / static_cast<double>(links.total_commit_count);
    nlohmann::json linked = nlohmann::json::array();
    for (const auto& change : links.changes) {
        linked.push_back({{"requirement", change.requirement_key},
                          {"commits", change.linked_commits},
                          {"first_commit", change.first_commit_id},
                          {"touched_files", change.touched_files.size()},
                          {"untouched_files", change.untouched_files.size()}});
    }
    report["linked"] = linked;
    report["unlinked"] = links.unlinked_requirements;
    std::ofstream out(path);
    if (!out) throw_io("cannot write " + path);
    out << report.dump(2) << '\n';
}

}  // namespace ccp
