#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "common.hpp"
#include "stats.hpp"

using namespace ccp;

namespace {

// independent enumeration of all tables with the observed margins
double fisher_oracle(std::array<std::array<long long, 2>, 2> t) {
    auto log_comb = [](long long n, long long k) {
        return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
               std::lgamma(static_cast<double>(n - k + 1));
    };
    long long r1 = t[0][0] + t[0][1], r2 = t[1][0] + t[1][1];
    long long c1 = t[0][0] + t[1][0];
    long long n = r1 + r2;
    auto log_prob = [&](long long a) {
        return log_comb(r1, a) + log_comb(r2, c1 - a) - log_comb(n, c1);
    };
    double observed = log_prob(t[0][0]);
    long long a_min = std::max(0LL, c1 - r2), a_max = std::min(r1, c1);
    double total = 0;
    for (long long a = a_min; a <= a_max; ++a)
        if (log_prob(a) <= observed + 1e-9) total += std::exp(log_prob(a));
    return std::min(1.0, total);
}

}  // namespace

TEST_CASE("identical groups give H = 0 and p = 1 with the degenerate flag set") {
    auto result = kruskal_wallis({{2.0, 2.0, 2.0}, {2.0, 2.0}});
    CHECK(result.degenerate);
    CHECK(result.h == doctest::Approx(0.0));
    CHECK(result.p == doctest::Approx(1.0));
}

TEST_CASE("kruskal-wallis matches the hand-ranked textbook example") {
    // ranks 1..6 with no ties: H = 12/(6*7) * (6*4 + 15^2/3... ) computed by hand = 3.857
    auto result = kruskal_wallis({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
    CHECK_FALSE(result.degenerate);
    CHECK(result.df == 1);
    CHECK(result.h == doctest::Approx(3.857142857).epsilon(1e-6));
    CHECK(result.p > 0.0);
    CHECK(result.p < 0.05);
}

TEST_CASE("ties are handled with mid-ranks and the tie correction") {
    auto tied = kruskal_wallis({{1.0, 2.0, 2.0}, {2.0, 3.0, 4.0}});
    // oracle: compute H by explicit mid-ranks
    std::vector<std::pair<double, int>> all = {{1, 0}, {2, 0}, {2, 0}, {2, 1}, {3, 1}, {4, 1}};
    std::sort(all.begin(), all.end());
    std::vector<double> ranks(all.size());
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[k] = mid;
        i = j;
    }
    double r0 = 0, r1 = 0;
    for (std::size_t i = 0; i < all.size(); ++i) (all[i].second == 0 ? r0 : r1) += ranks[i];
    double n = 6;
    double h = 12.0 / (n * (n + 1)) * (r0 * r0 / 3 + r1 * r1 / 3) - 3 * (n + 1);
    double correction = 1.0 - (27.0 - 3.0) / (n * n * n - n);  // one run of three ties
    CHECK(tied.h == doctest::Approx(h / correction).epsilon(1e-9));
}

TEST_CASE("the statistic is invariant under monotone transforms") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> groups(2 + rng() % 2);
        for (auto& g : groups) {
            std::size_t len = 2 + rng() % 5;
            for (std::size_t i = 0; i < len; ++i)
                g.push_back(static_cast<double>(rng() % 40));
        }
        std::size_t total = 0;
        bool varied = false;
        double first = groups[0][0];
        for (auto& g : groups)
            for (double v : g) {
                ++total;
                varied = varied || v != first;
            }
        if (total < 3 || !varied) continue;
        auto base = kruskal_wallis(groups);
        auto transformed = groups;
        for (auto& g : transformed)
            for (double& v : g) v = std::exp(v / 10.0) + 5.0;
        auto mapped = kruskal_wallis(transformed);
        CAPTURE(trial);
        CHECK(mapped.h == doctest::Approx(base.h).epsilon(1e-9));
        CHECK(mapped.p == doctest::Approx(base.p).epsilon(1e-9));
    }
}

TEST_CASE("kruskal-wallis rejects malformed input") {
    CHECK_THROWS_AS(kruskal_wallis({{1.0, 2.0, 3.0}}), Error);
    CHECK_THROWS_AS(kruskal_wallis({{1.0, 2.0}, {}}), Error);
    CHECK_THROWS_AS(kruskal_wallis({{1.0}, {2.0}}), Error);
}

TEST_CASE("small groups set the small-sample flag") {
    auto result = kruskal_wallis({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(result.small_sample);
    auto big = kruskal_wallis({{1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12}});
    CHECK_FALSE(big.small_sample);
}

TEST_CASE("fisher exact test reproduces the worked 2x2 example") {
    // [[3,1],[1,3]]: two-sided p = 34/70
    double p = fisher_exact_2x2(3, 1, 1, 3);
    CHECK(p == doctest::Approx(34.0 / 70.0).epsilon(1e-4));
}

TEST_CASE("fisher matches the enumeration oracle on random tables") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        std::array<std::array<long long, 2>, 2> t;
        for (auto& row : t)
            for (auto& cell : row) cell = static_cast<long long>(rng() % 12);
        if (t[0][0] + t[0][1] == 0 || t[1][0] + t[1][1] == 0 ||
            t[0][0] + t[1][0] == 0 || t[0][1] + t[1][1] == 0)
            continue;
        CAPTURE(trial);
        double p = fisher_exact_2x2(t[0][0], t[0][1], t[1][0], t[1][1]);
        CHECK(p == doctest::Approx(fisher_oracle(t)).epsilon(1e-9));
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("a uniform table is maximally insignificant") {
    CHECK(fisher_exact_2x2(1, 1, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("stronger diagonal concentration strictly lowers the p-value") {
    double prev = 1.1;
    for (long long k = 1; k <= 8; ++k) {
        double p = fisher_exact_2x2(k, 0, 0, k);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("fisher is symmetric under row and column swaps") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<std::array<long long, 2>, 2> t;
        for (auto& row : t)
            for (auto& cell : row) cell = 1 + static_cast<long long>(rng() % 10);
        double p = fisher_exact_2x2(t[0][0], t[0][1], t[1][0], t[1][1]);
        CHECK(fisher_exact_2x2(t[1][0], t[1][1], t[0][0], t[0][1]) ==
              doctest::Approx(p).epsilon(1e-12));
        CHECK(fisher_exact_2x2(t[0][1], t[0][0], t[1][1], t[1][0]) ==
              doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("an empty margin is rejected") {
    CHECK_THROWS_WITH_AS(fisher_exact_2x2(0, 0, 3, 4), doctest::Contains("ZeroMargin"),
                         Error);
    CHECK_THROWS_WITH_AS(fisher_exact_2x2(0, 3, 0, 4), doctest::Contains("ZeroMargin"),
                         Error);
}
