#pragma once

#include <span>

namespace protoattn {

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 * sd / sqrt(n), sample sd; 0 for n < 2
  double sd = 0.0;
  std::size_t n = 0;
};

MeanCi mean_ci95(std::span<const double> samples);

struct MannWhitneyResult {
  double u_a = 0.0;  // rank sum of a minus n_a (n_a + 1) / 2
  double u_b = 0.0;
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

/// Two-sided Mann-Whitney U test with midranks for ties. Uses the exact
/// permutation distribution when both samples have fewer than
/// kMannWhitneyExactLimit values, otherwise the normal approximation with tie
/// correction and continuity correction. Throws std::invalid_argument on an
/// empty sample.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kMannWhitneyExactLimit = 20;

}  // namespace protoattn
