#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gramevo {

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p = 1.0;  // two-sided
    double z = 0.0;  // normal approximation, tie-corrected, continuity-corrected
};

// Rank-sum U with midrank tie handling. The two-sided p comes from exact
// enumeration of all rank splits while both sides have at most 8
// observations, and from the tie- and continuity-corrected normal
// approximation beyond that. z is always the normal-approximation value so
// an effect size can be derived from it.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct KruskalWallisResult {
    double h = 0.0;
    double p = 1.0;  // chi-square, k-1 degrees of freedom
};

// Tie-corrected H over two or more non-empty groups. When every pooled value
// is identical the statistic is reported as 0 (no difference).
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Each p value multiplied by the comparison count (the vector length),
// capped at 1.
std::vector<double> bonferroni(std::span<const double> p_values);

enum class EffectCategory { none, small_, medium, large };

struct EffectSize {
    double r = 0.0;
    EffectCategory category = EffectCategory::none;
};

// r = |z| / sqrt(n_total); small r <= 0.3, medium r <= 0.5, large beyond.
// The category collapses to none when the corrected p fails the alpha level.
EffectSize effect_size_r(double z, int n_total, double corrected_p = 0.0, double alpha = 0.05);

// Display symbol used in comparison tables: ~ / + / ++ / +++.
std::string effect_symbol(EffectCategory c);

// Survival functions used by the tests above, exposed for reuse.
double normal_sf(double z);
double chi_squared_sf(double x, double df);

}  // namespace gramevo
