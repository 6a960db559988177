#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "common.hpp"

namespace ccp {

namespace {

double log_factorial(std::uint64_t n) {
    return std::lgamma(static_cast<double>(n) + 1.0);
}

// P(table | fixed margins) under the hypergeometric model.
double table_log_prob(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    std::uint64_t n = a + b + c + d;
    return log_factorial(a + b) + log_factorial(c + d) + log_factorial(a + c) +
           log_factorial(b + d) - log_factorial(n) - log_factorial(a) - log_factorial(b) -
           log_factorial(c) - log_factorial(d);
}

}  // namespace

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw_domain("kruskal_wallis needs at least two groups");
    std::size_t n = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw_domain("kruskal_wallis groups must be non-empty");
        n += g.size();
    }
    if (n < 3) throw_domain("kruskal_wallis needs at least three observations");

    KruskalWallisResult result;
    result.df = groups.size() - 1;
    for (const auto& g : groups) result.small_sample |= g.size() < 5;

    std::vector<std::pair<double, std::size_t>> pooled;  // (value, group)
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
        for (double v : groups[gi]) pooled.emplace_back(v, gi);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    if (pooled.front().first == pooled.back().first) {
        result.degenerate = true;
        result.h = 0.0;
        result.p = 1.0;
        return result;
    }

    // mid-ranks over tie runs; accumulate the tie correction term
    std::vector<double> rank_sum(groups.size(), 0.0);
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        double run = static_cast<double>(j - i);
        tie_term += run * run * run - run;
        for (std::size_t k = i; k < j; ++k) rank_sum[pooled[k].second] += mid_rank;
        i = j;
    }

    double nd = static_cast<double>(n);
    double h = 0.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        double ni = static_cast<double>(groups[gi].size());
        double mean_rank = rank_sum[gi] / ni;
        double diff = mean_rank - (nd + 1.0) / 2.0;
        h += ni * diff * diff;
    }
    h *= 12.0 / (nd * (nd + 1.0));
    double correction = 1.0 - tie_term / (nd * nd * nd - nd);
    if (correction > 0) h /= correction;
    result.h = h;

    boost::math::chi_squared dist(static_cast<double>(result.df));
    result.p = std::clamp(boost::math::cdf(boost::math::complement(dist, h)), 0.0, 1.0);
    if (result.p <= 0) result.p = std::numeric_limits<double>::min();
    return result;
}

double fisher_exact_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    std::uint64_t row1 = a + b, row2 = c + d, col1 = a + c, col2 = b + d;
    if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0)
        throw_domain("ZeroMargin: every row and column total must be positive");

    double observed = table_log_prob(a, b, c, d);
    std::uint64_t a_min = col1 > row2 ? col1 - row2 : 0;
    std::uint64_t a_max = std::min(row1, col1);
    double p = 0.0;
    for (std::uint64_t ai = a_min; ai <= a_max; ++ai) {
        std::uint64_t bi = row1 - ai;
        std::uint64_t ci = col1 - ai;
        std::uint64_t di = row2 - ci;
        double lp = table_log_prob(ai, bi, ci, di);
        if (lp <= observed + 1e-9) p += std::exp(lp);
    }
    return std::min(1.0, p);
}

void write_stats_report(const std::vector<StatsTest>& tests, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["alpha"] = 0.05;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& test : tests) {
        nlohmann::ordered_json entry;
        entry["test"] = test.name;
        entry["statistic"] = test.statistic;
        entry["df"] = test.df;
        entry["p"] = test.p;
        entry["reject"] = test.reject;
        entry["notes"] = test.notes;
        arr.push_back(std::move(entry));
    }
    doc["tests"] = arr;
    out << doc.dump(2) << '\n';
}

}  // namespace ccp
