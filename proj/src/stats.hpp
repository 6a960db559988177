#ifndef CCP_STATS_HPP
#define CCP_STATS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ccp {

struct KruskalWallisResult {
    double h = 0.0;
    std::size_t df = 0;
    double p = 1.0;
    bool degenerate = false;      // all observations equal
    bool small_sample = false;    // some group has fewer than 5 observations
};

// Mid-rank ties, the standard tie correction, chi-square upper-tail p with
// k-1 degrees of freedom.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Two-sided by probability ordering: sum of hypergeometric probabilities of
// all same-margin tables at most as probable as the observed one.
double fisher_exact_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);

struct StatsTest {
    std::string name;       // "kruskal_wallis" or "fisher_exact"
    double statistic = 0.0; // H, or the observed table probability for Fisher
    std::size_t df = 0;
    double p = 1.0;
    bool reject = false;    // at alpha = 0.05
    std::vector<std::string> notes;
};

void write_stats_report(const std::vector<StatsTest>& tests, std::ostream& out);

}  // namespace ccp

#endif
