#pragma once

#include <span>
#include <vector>

namespace botlab {

/// 1-based ranks with tied values sharing their average rank.
std::vector<double> midranks(std::span<const double> xs);

/// Sizes of the groups of tied values (groups of size 1 omitted).
std::vector<std::size_t> tie_group_sizes(std::span<const double> xs);

/// Complementary error function. Series expansion below 2, continued
/// fraction above; absolute error below 1e-15 on the real line.
double erfc_approx(double x);

/// Standard normal CDF and survival function built on erfc_approx.
double normal_cdf(double z);
double normal_sf(double z);

/// Spearman rank correlation (Pearson on midranks). Returns 0 when either
/// sample has no rank variance.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace botlab
