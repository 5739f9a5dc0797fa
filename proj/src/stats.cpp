#include "protoattn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace protoattn {

MeanCi mean_ci95(std::span<const double> samples) {
  MeanCi r;
  r.n = samples.size();
  if (r.n == 0) return r;
  r.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : samples) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(r.n - 1));
  r.half_width = 1.96 * r.sd / std::sqrt(static_cast<double>(r.n));
  return r;
}

namespace {

// Midranks of the pooled sample, doubled so they are integers.
std::vector<long> doubled_midranks(const std::vector<double>& pooled, double& tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<long> ranks(n);
  tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const long twice_mid = static_cast<long>(i + 1 + j + 1);  // (first + last) rank, 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = twice_mid;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: samples must be non-empty");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const auto ranks2 = doubled_midranks(pooled, tie_term);

  long rank_sum2 = 0;
  for (std::size_t i = 0; i < na; ++i) rank_sum2 += ranks2[i];
  const double base = static_cast<double>(na) * (na + 1) / 2.0;
  MannWhitneyResult r;
  r.u_a = rank_sum2 / 2.0 - base;
  r.u_b = static_cast<double>(na) * nb - r.u_a;

  const bool all_tied = std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled[0]; });
  if (all_tied) {
    r.p_value = 1.0;
    r.exact = na < kMannWhitneyExactLimit && nb < kMannWhitneyExactLimit;
    return r;
  }

  if (na < kMannWhitneyExactLimit && nb < kMannWhitneyExactLimit) {
    // Permutation distribution of the doubled rank sum of the first sample:
    // count[k][s] = number of k-subsets of the pooled ranks with sum s.
    const long max_sum = std::accumulate(ranks2.begin(), ranks2.end(), 0L);
    std::vector<std::vector<double>> count(na + 1, std::vector<double>(max_sum + 1, 0.0));
    count[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const long r2 = ranks2[i];
      for (std::size_t k = std::min(na, i + 1); k >= 1; --k)
        for (long s = max_sum; s >= r2; --s) count[k][s] += count[k - 1][s - r2];
    }
    double total = 0.0, le = 0.0, ge = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      const double c = count[na][s];
      total += c;
      if (s <= rank_sum2) le += c;
      if (s >= rank_sum2) ge += c;
    }
    r.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
    r.exact = true;
    return r;
  }

  const double mean_u = static_cast<double>(na) * nb / 2.0;
  const double nd = static_cast<double>(n);
  const double var = static_cast<double>(na) * nb / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
  const double z = (std::abs(r.u_a - mean_u) - 0.5) / std::sqrt(var);
  r.p_value = z <= 0.0 ? 1.0 : std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

}  // namespace protoattn
