#include "gramevo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gramevo {

namespace {

// Midranks of the pooled sample, 1-based.
std::vector<double> midranks(std::span<const double> pooled) {
    const size_t n = pooled.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return pooled[x] < pooled[y]; });
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    return rank;
}

// sum over tie groups of t^3 - t
double tie_term(std::span<const double> pooled) {
    std::vector<double> sorted(pooled.begin(), pooled.end());
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        double t = static_cast<double>(j - i + 1);
        total += t * t * t - t;
        i = j + 1;
    }
    return total;
}

double u_from_ranks(const std::vector<double>& rank, std::span<const size_t> positions, size_t na) {
    double rank_sum = 0.0;
    for (size_t p : positions) rank_sum += rank[p];
    return rank_sum - static_cast<double>(na) * (static_cast<double>(na) + 1.0) / 2.0;
}

// Two-sided p by enumerating every assignment of na positions out of n to
// the first sample, over the observed pooled values (ties included).
double exact_two_sided_p(const std::vector<double>& rank, size_t na, double u_observed) {
    const size_t n = rank.size();
    std::vector<size_t> comb(na);
    std::iota(comb.begin(), comb.end(), size_t{0});
    long total = 0, le = 0, ge = 0;
    constexpr double eps = 1e-9;
    while (true) {
        double u = u_from_ranks(rank, comb, na);
        ++total;
        if (u <= u_observed + eps) ++le;
        if (u >= u_observed - eps) ++ge;
        // next combination, lexicographic
        size_t i = na;
        while (i > 0 && comb[i - 1] == n - na + i - 1) --i;
        if (i == 0) break;
        ++comb[i - 1];
        for (size_t k = i; k < na; ++k) comb[k] = comb[k - 1] + 1;
    }
    double tail = std::min(le, ge);
    return std::min(1.0, 2.0 * tail / static_cast<double>(total));
}

}  // namespace

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

namespace {

// Regularized incomplete gamma functions, series + continued fraction.
double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi_squared_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    double a = df / 2.0, half = x / 2.0;
    return half < a + 1.0 ? 1.0 - gamma_p_series(a, half) : gamma_q_cf(a, half);
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");

    const size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> rank = midranks(pooled);

    std::vector<size_t> a_positions(na);
    std::iota(a_positions.begin(), a_positions.end(), size_t{0});
    MannWhitneyResult r;
    r.u = u_from_ranks(rank, a_positions, na);

    // normal approximation with tie correction and continuity correction
    double mean_u = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    double nn = static_cast<double>(n);
    double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                 ((nn + 1.0) - tie_term(pooled) / (nn * (nn - 1.0)));
    if (var > 0.0) {
        double d = r.u - mean_u;
        double cc = d > 0.5 ? d - 0.5 : (d < -0.5 ? d + 0.5 : 0.0);
        r.z = cc / std::sqrt(var);
    }

    // Exact enumeration whenever both sides are small enough for it to be
    // cheap (at most C(16,8) = 12870 splits); the normal approximation can
    // drift past the promised tolerance on tie-heavy samples at that size.
    if (na <= 8 && nb <= 8)
        r.p = exact_two_sided_p(rank, na, r.u);
    else
        r.p = std::min(1.0, 2.0 * normal_sf(std::abs(r.z)));
    return r;
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw std::invalid_argument("kruskal_wallis: need at least 2 groups");
    for (const auto& g : groups)
        if (g.empty()) throw std::invalid_argument("kruskal_wallis: empty group");

    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    const double n = static_cast<double>(pooled.size());
    std::vector<double> rank = midranks(pooled);

    double stat = 0.0;
    size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (size_t i = 0; i < g.size(); ++i) rank_sum += rank[offset + i];
        offset += g.size();
        stat += rank_sum * rank_sum / static_cast<double>(g.size());
    }
    double h = 12.0 / (n * (n + 1.0)) * stat - 3.0 * (n + 1.0);

    double correction = 1.0 - tie_term(pooled) / (n * n * n - n);
    KruskalWallisResult r;
    if (correction <= 0.0) return r;  // every value tied: H = 0, p = 1
    r.h = h / correction;
    r.p = chi_squared_sf(r.h, static_cast<double>(groups.size()) - 1.0);
    return r;
}

std::vector<double> bonferroni(std::span<const double> p_values) {
    std::vector<double> out(p_values.begin(), p_values.end());
    for (auto& p : out) p = std::min(1.0, p * static_cast<double>(p_values.size()));
    return out;
}

EffectSize effect_size_r(double z, int n_total, double corrected_p, double alpha) {
    if (n_total < 2) throw std::invalid_argument("effect_size_r: n_total must be >= 2");
    EffectSize e;
    e.r = std::abs(z) / std::sqrt(static_cast<double>(n_total));
    if (corrected_p >= alpha)
        e.category = EffectCategory::none;
    else if (e.r <= 0.3)
        e.category = EffectCategory::small_;
    else if (e.r <= 0.5)
        e.category = EffectCategory::medium;
    else
        e.category = EffectCategory::large;
    return e;
}

std::string effect_symbol(EffectCategory c) {
    switch (c) {
        case EffectCategory::none: return "~";
        case EffectCategory::small_: return "+";
        case EffectCategory::medium: return "++";
        case EffectCategory::large: return "+++";
    }
    return "?";
}

}  // namespace gramevo
