#ifndef CCP_TEXTSIM_HPP
#define CCP_TEXTSIM_HPP

#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ccp {

// Lowercase stemmed terms; no empty token, alphanumeric characters only.
using TokenStream = std::vector<std::string>;

// Non-alphanumerics become spaces, optional camelCase/underscore/digit
// splitting, lowercase, Porter stem. No stop-word removal.
TokenStream preprocess(std::string_view text, bool split_identifiers);

// Document frequencies backing the idf weights.
struct CorpusStats {
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> doc_freq;

    void add_document(const TokenStream& doc);

    // idf = ln(N/df); unseen terms get df = 1.
    double idf(const std::string& term) const;
};

using TermSim = std::function<double(const std::string&, const std::string&)>;

double term_sim_exact(const std::string& a, const std::string& b);

// Cosine of tf-idf vectors; both-empty -> 0.
double vsm_similarity(const TokenStream& a, const TokenStream& b, const CorpusStats& stats);

// 1 - JSD(P,Q) with base-2 logs over term relative frequencies; both-empty -> 0.
double jsd_similarity(const TokenStream& a, const TokenStream& b);

// Sentence score: geometric mean of clipped 1..4-gram precisions (floored at
// 1/(2*len) when a count is zero) times the brevity penalty. Asymmetric.
double bleu_similarity(const TokenStream& candidate, const TokenStream& reference);

// Mean over a's terms of the best term_sim match in b; empty a -> 0.
double greedy_similarity(const TokenStream& a, const TokenStream& b, const TermSim& term_sim);

// Maximum-weight one-to-one assignment, normalized by max(|a|,|b|).
double optimum_similarity(const TokenStream& a, const TokenStream& b, const TermSim& term_sim);

// Exact solver behind optimum_similarity: maximum-weight assignment of rows to
// distinct columns for a non-negative rows x cols weight matrix.
double max_assignment_weight(const std::vector<std::vector<double>>& weights);

enum class Technique { VSM, JSD, GC, OPC, BC };

const char* technique_name(Technique technique);
Technique parse_technique(const std::string& name);

// Dispatch with the exact-match term similarity for GC/OPC.
double similarity(Technique technique, const TokenStream& a, const TokenStream& b,
                  const CorpusStats& stats);

}  // namespace ccp

#endif
