#include "corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "common.hpp"

namespace ccp {

namespace {

using nlohmann::json;

// Howard Hinnant's days-from-civil; avoids timegm and local-time pitfalls.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

int parse_digits(const std::string& s, std::size_t pos, std::size_t count) {
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (i >= s.size() || s[i] < '0' || s[i] > '9')
            throw_domain("MalformedRecord: bad timestamp '" + s + "'");
        value = value * 10 + (s[i] - '0');
    }
    return value;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS followed by Z, +hh:mm, -hh:mm, +hhmm or -hhmm.
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' ||
        (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':')
        throw_domain("MalformedRecord: bad timestamp '" + text + "'");
    int year = parse_digits(text, 0, 4);
    int month = parse_digits(text, 5, 2);
    int day = parse_digits(text, 8, 2);
    int hour = parse_digits(text, 11, 2);
    int minute = parse_digits(text, 14, 2);
    int second = parse_digits(text, 17, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        throw_domain("MalformedRecord: bad timestamp '" + text + "'");

    std::int64_t offset = 0;
    if (text.size() > 19) {
        char sign = text[19];
        if (sign == 'Z' && text.size() == 20) {
            offset = 0;
        } else if (sign == '+' || sign == '-') {
            std::string tz = text.substr(20);
            int oh = 0, om = 0;
            if (tz.size() == 5 && tz[2] == ':') {
                oh = parse_digits(tz, 0, 2);
                om = parse_digits(tz, 3, 2);
            } else if (tz.size() == 4) {
                oh = parse_digits(tz, 0, 2);
                om = parse_digits(tz, 2, 2);
            } else {
                throw_domain("MalformedRecord: bad timezone in '" + text + "'");
            }
            offset = (oh * 3600 + om * 60) * (sign == '-' ? -1 : 1);
        } else {
            throw_domain("MalformedRecord: bad timezone in '" + text + "'");
        }
    }
    std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

ChangeKind parse_change_kind(const std::string& text) {
    if (text == "Added") return ChangeKind::Added;
    if (text == "Modified") return ChangeKind::Modified;
    if (text == "Deleted") return ChangeKind::Deleted;
    throw_domain("MalformedRecord: unknown change kind '" + text + "'");
}

const char* change_kind_name(ChangeKind kind) {
    switch (kind) {
        case ChangeKind::Added: return "Added";
        case ChangeKind::Modified: return "Modified";
        case ChangeKind::Deleted: return "Deleted";
    }
    return "Modified";
}

IssueKind map_issue_kind(const std::string& type_field) {
    if (type_field == "New Feature" || type_field == "NewFeature") return IssueKind::NewFeature;
    if (type_field == "Bug") return IssueKind::Bug;
    return IssueKind::Other;
}

const char* issue_kind_name(IssueKind kind) {
    switch (kind) {
        case IssueKind::NewFeature: return "NewFeature";
        case IssueKind::Bug: return "Bug";
        case IssueKind::Other: return "Other";
    }
    return "Other";
}

const Commit* Corpus::find_commit(const std::string& id) const {
    auto it = commit_index.find(id);
    return it == commit_index.end() ? nullptr : &commits[it->second];
}

const Requirement* Corpus::find_requirement(const std::string& key) const {
    auto it = requirement_index.find(key);
    return it == requirement_index.end() ? nullptr : &requirements[it->second];
}

std::vector<Commit> parse_commit_log(std::istream& in) {
    std::vector<Commit> commits;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object())
            throw_domain("MalformedRecord at line " + std::to_string(line_no));
        try {
            Commit commit;
            commit.id = record.at("id").get<std::string>();
            if (commit.id.empty()) throw_domain("empty id");
            for (const auto& p : record.value("parents", json::array()))
                commit.parents.push_back(p.get<std::string>());
            commit.timestamp = parse_iso8601(record.at("timestamp").get<std::string>());
            commit.message = record.value("message", "");
            for (const auto& f : record.value("files", json::array())) {
                FileChange change;
                change.path = f.at("path").get<std::string>();
                if (change.path.empty()) throw_domain("empty path");
                change.kind = parse_change_kind(f.at("kind").get<std::string>());
                commit.files.push_back(std::move(change));
            }
            if (!seen.insert(commit.id).second)
                throw Error(ErrorCode::Domain, "DuplicateCommit: " + commit.id);
            commits.push_back(std::move(commit));
        } catch (const json::exception&) {
            throw_domain("MalformedRecord at line " + std::to_string(line_no));
        } catch (const Error& e) {
            if (std::string_view(e.what()).starts_with("DuplicateCommit")) throw;
            throw_domain("MalformedRecord at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::sort(commits.begin(), commits.end(), commit_before);
    return commits;
}

std::vector<Requirement> parse_issues(std::istream& in, const std::string& project_key) {
    std::vector<Requirement> requirements;
    std::unordered_set<std::string> seen;
    std::string prefix = project_key + "-";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object())
            throw_domain("MalformedRecord at line " + std::to_string(line_no));
        try {
            Requirement req;
            req.key = record.at("key").get<std::string>();
            if (!req.key.starts_with(prefix))
                throw Error(ErrorCode::Domain, "KeyPrefixMismatch: " + req.key);
            if (!seen.insert(req.key).second)
                throw_domain("duplicate requirement key " + req.key);
            req.kind = map_issue_kind(record.at("type").get<std::string>());
            req.title = record.value("summary", "");
            req.description = record.value("description", "");
            req.created = parse_iso8601(record.at("created").get<std::string>());
            if (record.contains("fixVersion") && !record["fixVersion"].is_null()) {
                std::string v = record["fixVersion"].get<std::string>();
                if (!v.empty()) req.release_id = v;
            }
            requirements.push_back(std::move(req));
        } catch (const json::exception&) {
            throw_domain("MalformedRecord at line " + std::to_string(line_no));
        } catch (const Error& e) {
            if (std::string_view(e.what()).starts_with("KeyPrefixMismatch")) throw;
            throw_domain("MalformedRecord at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::stable_sort(requirements.begin(), requirements.end(),
                     [](const Requirement& a, const Requirement& b) {
                         if (a.created != b.created) return a.created < b.created;
                         return a.key < b.key;
                     });
    return requirements;
}

std::vector<std::string> parse_releases(std::istream& in) {
    std::vector<std::string> releases;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        std::string id = trim(line);
        if (id.empty()) continue;
        if (!seen.insert(id).second) throw_domain("duplicate release id " + id);
        releases.push_back(std::move(id));
    }
    return releases;
}

Corpus assemble_corpus(std::string project_key, std::vector<Commit> commits,
                       std::vector<Requirement> requirements, std::vector<std::string> releases) {
    Corpus corpus;
    corpus.project_key = std::move(project_key);
    corpus.commits = std::move(commits);
    corpus.requirements = std::move(requirements);
    corpus.releases = std::move(releases);
    std::sort(corpus.commits.begin(), corpus.commits.end(), commit_before);
    std::stable_sort(corpus.requirements.begin(), corpus.requirements.end(),
                     [](const Requirement& a, const Requirement& b) {
                         if (a.created != b.created) return a.created < b.created;
                         return a.key < b.key;
                     });
    if (!corpus.releases.empty()) {
        std::unordered_set<std::string> known(corpus.releases.begin(), corpus.releases.end());
        for (const auto& req : corpus.requirements) {
            if (req.release_id && !known.count(*req.release_id))
                throw_domain("requirement " + req.key + " references unknown release " + *req.release_id);
        }
    }
    for (std::size_t i = 0; i < corpus.commits.size(); ++i)
        corpus.commit_index[corpus.commits[i].id] = i;
    for (std::size_t i = 0; i < corpus.requirements.size(); ++i)
        corpus.requirement_index[corpus.requirements[i].key] = i;
    return corpus;
}

ValidationReport validate(const Corpus& corpus) {
    ValidationReport report;
    report.commit_count = corpus.commits.size();
    std::set<std::string> files;
    for (const auto& commit : corpus.commits)
        for (const auto& change : commit.files) files.insert(change.path);
    report.distinct_file_count = files.size();
    std::int64_t last_commit_ts = corpus.commits.empty() ? 0 : corpus.commits.back().timestamp;
    for (const auto& req : corpus.requirements) {
        switch (req.kind) {
            case IssueKind::NewFeature: ++report.feature_count; break;
            case IssueKind::Bug: ++report.bug_count; break;
            case IssueKind::Other: ++report.other_count; break;
        }
        if (!corpus.commits.empty() && req.created > last_commit_ts)
            report.warnings.push_back("requirement " + req.key + " created after the last commit");
    }
    return report;
}

void serialize_commits(const Corpus& corpus, std::ostream& out) {
    for (const auto& commit : corpus.commits) {
        json record;
        record["id"] = commit.id;
        record["parents"] = commit.parents;
        record["timestamp"] = format_iso8601(commit.timestamp);
        record["message"] = commit.message;
        json files = json::array();
        for (const auto& change : commit.files)
            files.push_back({{"path", change.path}, {"kind", change_kind_name(change.kind)}});
        record["files"] = files;
        out << record.dump() << '\n';
    }
}

void serialize_issues(const Corpus& corpus, std::ostream& out) {
    for (const auto& req : corpus.requirements) {
        json record;
        record["key"] = req.key;
        record["type"] = req.kind == IssueKind::NewFeature ? "New Feature" : issue_kind_name(req.kind);
        record["summary"] = req.title;
        record["description"] = req.description;
        record["created"] = format_iso8601(req.created);
        if (req.release_id) record["fixVersion"] = *req.release_id;
        out << record.dump() << '\n';
    }
}

}  // namespace ccp
