#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gramevo/rng.hpp"
#include "gramevo/stats.hpp"

using namespace gramevo;

namespace {

// Independent exact oracle: recursive enumeration of which pooled positions
// belong to the first sample, two-sided p = 2 * min tail, capped at 1.
// Written against sorted midranks computed from scratch.
struct ExactOracle {
    std::vector<double> rank;
    size_t na = 0;
    double u_observed = 0.0;
    long total = 0, le = 0, ge = 0;

    void recurse(size_t next, size_t chosen, double rank_sum) {
        if (chosen == na) {
            double u = rank_sum - static_cast<double>(na) * (na + 1) / 2.0;
            ++total;
            if (u <= u_observed + 1e-9) ++le;
            if (u >= u_observed - 1e-9) ++ge;
            return;
        }
        if (rank.size() - next < na - chosen) return;
        recurse(next + 1, chosen + 1, rank_sum + rank[next]);
        recurse(next + 1, chosen, rank_sum);
    }
};

double oracle_two_sided_p(std::vector<double> a, std::vector<double> b, double* u_out = nullptr) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const size_t n = pooled.size();

    // midranks, recomputed independently
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return pooled[x] < pooled[y]; });
    std::vector<double> rank(n);
    for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = (i + j) / 2.0 + 1.0;
        i = j + 1;
    }
    double rank_sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) rank_sum += rank[i];
    double u = rank_sum - static_cast<double>(a.size()) * (a.size() + 1) / 2.0;
    if (u_out) *u_out = u;

    ExactOracle oracle;
    oracle.rank = rank;
    oracle.na = a.size();
    oracle.u_observed = u;
    oracle.recurse(0, 0, 0.0);
    return std::min(1.0, 2.0 * std::min(oracle.le, oracle.ge) / static_cast<double>(oracle.total));
}

}  // namespace

TEST_CASE("mann_whitney_u: fully separated tiny samples") {
    std::vector<double> a = {1, 2}, b = {3, 4};
    auto r = mann_whitney_u(a, b);
    CHECK(r.u == 0.0);
    CHECK(r.p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));  // 2 * (1/6)
}

TEST_CASE("mann_whitney_u: identical samples") {
    std::vector<double> a = {1, 2, 3}, b = {1, 2, 3};
    auto r = mann_whitney_u(a, b);
    CHECK(r.u == doctest::Approx(4.5));  // n^2 / 2
    CHECK(r.p >= 0.99);
}

TEST_CASE("mann_whitney_u: U(a,b) + U(b,a) = |a||b|") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + rng.uniform_int(10)), b(1 + rng.uniform_int(10));
        for (auto& v : a) v = rng.uniform_int(6);  // heavy ties on purpose
        for (auto& v : b) v = rng.uniform_int(6);
        auto ab = mann_whitney_u(a, b);
        auto ba = mann_whitney_u(b, a);
        CHECK(ab.u + ba.u == doctest::Approx(a.size() * b.size()).epsilon(1e-12));
    }
}

TEST_CASE("mann_whitney_u: empty sample is an error") {
    std::vector<double> a = {1.0}, empty;
    CHECK_THROWS_AS(mann_whitney_u(a, empty), std::invalid_argument);
    CHECK_THROWS_AS(mann_whitney_u(empty, a), std::invalid_argument);
}

TEST_CASE("mann_whitney_u agrees with exact enumeration up to 8 per side") {
    Rng rng(2);
    for (size_t na = 1; na <= 8; ++na) {
        for (size_t nb = 1; nb <= 8; ++nb) {
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<double> a(na), b(nb);
                for (auto& v : a) v = rng.uniform_int(8);  // ties likely
                for (auto& v : b) v = rng.uniform_int(8);
                double u_oracle = 0.0;
                double p_oracle = oracle_two_sided_p(a, b, &u_oracle);
                auto r = mann_whitney_u(a, b);
                CHECK(r.u == doctest::Approx(u_oracle).epsilon(1e-12));
                CHECK(std::abs(r.p - p_oracle) <= 0.02);
            }
        }
    }
}

TEST_CASE("mann_whitney_u: normal approximation stays near exact where it takes over") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(9), b(rep % 2 ? 8 : 9);
        for (auto& v : a) v = rng.uniform01() + (rep % 3 == 0 ? 0.4 : 0.0);
        for (auto& v : b) v = rng.uniform01();
        auto r = mann_whitney_u(a, b);  // one side > 8 -> normal path
        double p_oracle = oracle_two_sided_p(a, b);
        CHECK(std::abs(r.p - p_oracle) <= 0.02);
    }
}

TEST_CASE("mann_whitney_u: z is usable even when p is exact") {
    std::vector<double> a = {1, 2, 3, 4}, b = {10, 11, 12, 13};
    auto r = mann_whitney_u(a, b);
    CHECK(r.z < 0.0);
    CHECK(std::abs(r.z) > 2.0);
}

TEST_CASE("kruskal_wallis: hand-computed fixture") {
    std::vector<std::vector<double>> groups = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    auto r = kruskal_wallis(groups);
    CHECK(r.h == doctest::Approx(7.2).epsilon(1e-9));
    CHECK(r.p == doctest::Approx(std::exp(-3.6)).epsilon(1e-9));  // df=2: survival = exp(-H/2)
}

TEST_CASE("kruskal_wallis: identical constants report no difference") {
    std::vector<std::vector<double>> groups = {{5, 5, 5}, {5, 5}, {5, 5, 5, 5}};
    auto r = kruskal_wallis(groups);
    CHECK(r.h == 0.0);
    CHECK(r.p == 1.0);
}

TEST_CASE("kruskal_wallis: permuting groups leaves H unchanged") {
    std::vector<std::vector<double>> groups = {{1, 5, 3}, {2, 2, 8}, {9, 4, 6}};
    auto base = kruskal_wallis(groups);
    std::vector<std::vector<double>> permuted = {groups[2], groups[0], groups[1]};
    CHECK(kruskal_wallis(permuted).h == doctest::Approx(base.h).epsilon(1e-12));
}

TEST_CASE("kruskal_wallis: fewer than two groups is an error") {
    std::vector<std::vector<double>> one = {{1, 2, 3}};
    CHECK_THROWS_AS(kruskal_wallis(one), std::invalid_argument);
    std::vector<std::vector<double>> with_empty = {{1.0}, {}};
    CHECK_THROWS_AS(kruskal_wallis(with_empty), std::invalid_argument);
}

TEST_CASE("rank tests are invariant under monotone transforms") {
    Rng rng(4);
    std::vector<double> a(12), b(9);
    for (auto& v : a) v = rng.uniform01() * 4 - 2;
    for (auto& v : b) v = rng.uniform01() * 4 - 2;
    auto base = mann_whitney_u(a, b);
    std::vector<double> ea = a, eb = b;
    for (auto& v : ea) v = std::exp(v);
    for (auto& v : eb) v = std::exp(v);
    auto transformed = mann_whitney_u(ea, eb);
    CHECK(base.u == transformed.u);
    CHECK(base.p == transformed.p);

    std::vector<std::vector<double>> groups = {a, b};
    std::vector<std::vector<double>> egroups = {ea, eb};
    CHECK(kruskal_wallis(groups).h == kruskal_wallis(egroups).h);
}

TEST_CASE("bonferroni") {
    std::vector<double> one = {0.01};
    CHECK(bonferroni(one) == std::vector<double>{0.01});
    std::vector<double> three = {0.01, 0.02, 0.04};
    auto c = bonferroni(three);
    CHECK(c[0] == doctest::Approx(0.03));
    CHECK(c[1] == doctest::Approx(0.06));
    CHECK(c[2] == doctest::Approx(0.12));
    std::vector<double> cap = {0.5, 0.6};
    CHECK(bonferroni(cap) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("effect_size_r: thresholds") {
    CHECK(effect_size_r(0.0, 100).r == 0.0);
    auto medium = effect_size_r(7.07, 200);
    CHECK(medium.r == doctest::Approx(0.49992).epsilon(1e-4));
    CHECK(medium.category == EffectCategory::medium);
    auto large = effect_size_r(10.0, 200);
    CHECK(large.r == doctest::Approx(0.7071).epsilon(1e-3));
    CHECK(large.category == EffectCategory::large);
    auto small = effect_size_r(2.0, 200);
    CHECK(small.category == EffectCategory::small_);
    // insignificant corrected p collapses the category
    CHECK(effect_size_r(10.0, 200, 0.2, 0.05).category == EffectCategory::none);
    CHECK_THROWS_AS(effect_size_r(1.0, 1), std::invalid_argument);
}

TEST_CASE("effect_symbol") {
    CHECK(effect_symbol(EffectCategory::none) == "~");
    CHECK(effect_symbol(EffectCategory::small_) == "+");
    CHECK(effect_symbol(EffectCategory::medium) == "++");
    CHECK(effect_symbol(EffectCategory::large) == "+++");
}

TEST_CASE("chi_squared_sf sanity") {
    CHECK(chi_squared_sf(7.2, 2) == doctest::Approx(std::exp(-3.6)).epsilon(1e-9));
    CHECK(chi_squared_sf(3.841, 1) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(chi_squared_sf(0.0, 5) == 1.0);
    CHECK(chi_squared_sf(1000.0, 5) < 1e-100);
}

TEST_CASE("normal_sf sanity") {
    CHECK(normal_sf(0.0) == doctest::Approx(0.5));
    CHECK(normal_sf(1.959964) == doctest::Approx(0.025).epsilon(1e-4));
    CHECK(normal_sf(-1.959964) == doctest::Approx(0.975).epsilon(1e-4));
}
