#pragma once

// CMA-ES with weighted recombination, rank-one and rank-mu covariance
// updates, and cumulative step-size adaptation. Minimises by default.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "protoattn/rng.hpp"

namespace protoattn {

struct CmaState {
  int dim = 0;
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd cov;
  Eigen::VectorXd path_c;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd weights;  // mu positive weights, sum 1, non-increasing
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;
  std::int64_t generation = 0;

  // Cached decomposition cov = B diag(D^2) B^T.
  Eigen::MatrixXd eigen_basis;
  Eigen::VectorXd eigen_sqrt;  // D
  std::int64_t eigen_generation = -1;

  /// Generations between eigendecompositions.
  std::int64_t eigen_interval() const;
};

/// Starts at mean = initial_mean (zero vector when empty) with identity
/// covariance. Throws ConfigError for dim < 1, lambda < 4 or sigma0 <= 0.
CmaState cma_init(int dim, double sigma0, int lambda, std::span<const double> initial_mean = {});

/// Draws lambda candidates mean + sigma * B D z. Refreshes the cached
/// eigendecomposition when stale.
std::vector<Eigen::VectorXd> cma_ask(CmaState& state, CounterRng& rng);

/// Ranks the candidates (stable, ties by index; non-finite fitness ranks
/// worst) and performs one update. With maximize set, fitness is negated.
void cma_tell(CmaState& state, std::span<const Eigen::VectorXd> candidates, std::span<const double> fitnesses,
              bool maximize = false);

/// Recomputes B and D from the covariance. Re-symmetrises and clamps
/// eigenvalues below 1e-12.
void cma_update_eigen(CmaState& state);

/// Ranking used by cma_tell, exposed for tests.
std::vector<int> cma_rank(std::span<const double> fitnesses, bool maximize);

using WarningSink = std::function<void(const std::string&)>;
/// Replaces the default stderr sink for optimizer warnings.
void set_cma_warning_sink(WarningSink sink);

}  // namespace protoattn
