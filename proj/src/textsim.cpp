#include "textsim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "porter.hpp"

namespace ccp {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// camelCase, ALLCAPSRun and letter/digit boundaries.
bool identifier_boundary(const std::string& word, std::size_t i) {
    char prev = word[i - 1];
    char cur = word[i];
    if (is_lower(prev) && is_upper(cur)) return true;
    if (is_alpha(prev) && is_digit(cur)) return true;
    if (is_digit(prev) && is_alpha(cur)) return true;
    if (is_upper(prev) && is_upper(cur) && i + 1 < word.size() && is_lower(word[i + 1])) return true;
    return false;
}

void emit_token(std::string word, bool split_identifiers, TokenStream& out) {
    if (word.empty()) return;
    std::vector<std::string> parts;
    if (split_identifiers) {
        std::size_t start = 0;
        for (std::size_t i = 1; i < word.size(); ++i)
            if (identifier_boundary(word, i)) {
                parts.push_back(word.substr(start, i - start));
                start = i;
            }
        parts.push_back(word.substr(start));
    } else {
        parts.push_back(std::move(word));
    }
    for (auto& part : parts) {
        for (char& c : part) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::string stemmed = porter_stem(part);
        if (!stemmed.empty()) out.push_back(std::move(stemmed));
    }
}

std::map<std::string, double> term_counts(const TokenStream& tokens) {
    std::map<std::string, double> counts;
    for (const auto& t : tokens) counts[t] += 1.0;
    return counts;
}

}  // namespace

TokenStream preprocess(std::string_view text, bool split_identifiers) {
    TokenStream out;
    std::string current;
    for (char c : text) {
        if (is_alnum(c)) {
            current.push_back(c);
        } else if (!current.empty()) {
            emit_token(std::move(current), split_identifiers, out);
            current.clear();
        }
    }
    emit_token(std::move(current), split_identifiers, out);
    return out;
}

void CorpusStats::add_document(const TokenStream& doc) {
    ++doc_count;
    std::map<std::string, double> counts = term_counts(doc);
    for (const auto& [term, _] : counts) ++doc_freq[term];
}

double CorpusStats::idf(const std::string& term) const {
    std::size_t n = std::max<std::size_t>(doc_count, 1);
    auto it = doc_freq.find(term);
    std::size_t df = it == doc_freq.end() ? 1 : it->second;
    return std::log(static_cast<double>(n) / static_cast<double>(df));
}

double term_sim_exact(const std::string& a, const std::string& b) { return a == b ? 1.0 : 0.0; }

double vsm_similarity(const TokenStream& a, const TokenStream& b, const CorpusStats& stats) {
    if (a.empty() || b.empty()) return 0.0;
    auto ca = term_counts(a);
    auto cb = term_counts(b);
    auto cosine = [&](bool use_idf) {
        double dot = 0, na = 0, nb = 0;
        for (const auto& [term, tf] : ca) {
            double w = tf * (use_idf ? stats.idf(term) : 1.0);
            na += w * w;
            auto it = cb.find(term);
            if (it != cb.end()) dot += w * it->second * (use_idf ? stats.idf(term) : 1.0);
        }
        for (const auto& [term, tf] : cb) {
            double w = tf * (use_idf ? stats.idf(term) : 1.0);
            nb += w * w;
        }
        if (na <= 0 || nb <= 0) return -1.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };
    double sim = cosine(true);
    // Every term appearing in all documents zeroes the idf vector; the raw
    // term-frequency cosine keeps the comparison meaningful there.
    if (sim < 0) sim = cosine(false);
    if (sim < 0) return 0.0;
    return std::clamp(sim, 0.0, 1.0);
}

double jsd_similarity(const TokenStream& a, const TokenStream& b) {
    if (a.empty() || b.empty()) return 0.0;
    auto ca = term_counts(a);
    auto cb = term_counts(b);
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    std::map<std::string, std::pair<double, double>> dist;
    for (const auto& [term, tf] : ca) dist[term].first = tf / na;
    for (const auto& [term, tf] : cb) dist[term].second = tf / nb;
    double jsd = 0;
    for (const auto& [term, pq] : dist) {
        double p = pq.first, q = pq.second;
        double m = 0.5 * (p + q);
        if (p > 0) jsd += 0.5 * p * std::log2(p / m);
        if (q > 0) jsd += 0.5 * q * std::log2(q / m);
    }
    return std::clamp(1.0 - jsd, 0.0, 1.0);
}

double bleu_similarity(const TokenStream& candidate, const TokenStream& reference) {
    std::size_t len = candidate.size();
    std::size_t ref_len = reference.size();
    if (len == 0) return 0.0;
    double floor = 1.0 / (2.0 * static_cast<double>(len));
    double log_sum = 0;
    std::size_t orders = 0;
    // orders longer than the candidate contribute nothing (vacuous precision),
    // so a stream compared with itself scores exactly 1
    std::size_t max_order = std::min<std::size_t>(4, len);
    for (std::size_t n = 1; n <= max_order; ++n) {
        std::map<std::vector<std::string>, double> ref_grams;
        if (ref_len >= n)
            for (std::size_t i = 0; i + n <= ref_len; ++i)
                ref_grams[{reference.begin() + i, reference.begin() + i + n}] += 1.0;
        double matched = 0;
        double total = 0;
        if (len >= n) {
            std::map<std::vector<std::string>, double> cand_grams;
            for (std::size_t i = 0; i + n <= len; ++i)
                cand_grams[{candidate.begin() + i, candidate.begin() + i + n}] += 1.0;
            for (const auto& [gram, count] : cand_grams) {
                total += count;
                auto it = ref_grams.find(gram);
                if (it != ref_grams.end()) matched += std::min(count, it->second);
            }
        }
        double precision = (matched > 0 && total > 0) ? matched / total : floor;
        log_sum += std::log(precision);
        ++orders;
    }
    double score = std::exp(log_sum / static_cast<double>(orders));
    double brevity = 1.0;
    if (ref_len > len)
        brevity = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(len));
    return std::clamp(score * brevity, 0.0, 1.0);
}

double greedy_similarity(const TokenStream& a, const TokenStream& b, const TermSim& term_sim) {
    if (a.empty()) return 0.0;
    double sum = 0;
    for (const auto& ta : a) {
        double best = 0;
        for (const auto& tb : b) best = std::max(best, term_sim(ta, tb));
        sum += best;
    }
    return std::clamp(sum / static_cast<double>(a.size()), 0.0, 1.0);
}

double max_assignment_weight(const std::vector<std::vector<double>>& weights) {
    std::size_t n = weights.size();
    if (n == 0) return 0.0;
    std::size_t m = weights[0].size();
    if (m == 0) return 0.0;
    // Work with rows <= cols; the assignment is symmetric.
    if (n > m) {
        std::vector<std::vector<double>> transposed(m, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) transposed[j][i] = weights[i][j];
        return max_assignment_weight(transposed);
    }
    // Shortest augmenting path on cost = -weight with dual potentials.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = match[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0;
    for (std::size_t j = 1; j <= m; ++j)
        if (match[j] != 0) total += weights[match[j] - 1][j - 1];
    return total;
}

double optimum_similarity(const TokenStream& a, const TokenStream& b, const TermSim& term_sim) {
    if (a.empty() || b.empty()) return 0.0;
    std::vector<std::vector<double>> weights(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) weights[i][j] = term_sim(a[i], b[j]);
    double total = max_assignment_weight(weights);
    return std::clamp(total / static_cast<double>(std::max(a.size(), b.size())), 0.0, 1.0);
}

const char* technique_name(Technique technique) {
    switch (technique) {
        case Technique::VSM: return "VSM";
        case Technique::JSD: return "JSD";
        case Technique::GC: return "GC";
        case Technique::OPC: return "OPC";
        case Technique::BC: return "BC";
    }
    return "VSM";
}

Technique parse_technique(const std::string& name) {
    if (name == "VSM") return Technique::VSM;
    if (name == "JSD") return Technique::JSD;
    if (name == "GC") return Technique::GC;
    if (name == "OPC") return Technique::OPC;
    if (name == "BC") return Technique::BC;
    throw std::invalid_argument("unknown similarity technique: " + name);
}

double similarity(Technique technique, const TokenStream& a, const TokenStream& b,
                  const CorpusStats& stats) {
    switch (technique) {
        case Technique::VSM: return vsm_similarity(a, b, stats);
        case Technique::JSD: return jsd_similarity(a, b);
        case Technique::GC: return greedy_similarity(a, b, term_sim_exact);
        case Technique::OPC: return optimum_similarity(a, b, term_sim_exact);
        case Technique::BC: return bleu_similarity(a, b);
    }
    return 0.0;
}

}  // namespace ccp
