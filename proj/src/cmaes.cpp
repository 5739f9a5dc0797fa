#include "protoattn/cmaes.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <mutex>
#include <numeric>
#include <string>

#include "protoattn/errors.hpp"

namespace protoattn {

namespace {

constexpr double kEigenFloor = 1e-12;

std::mutex g_sink_mutex;
WarningSink g_sink;

void warn(const std::string& msg) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink)
    g_sink(msg);
  else
    std::cerr << "cmaes: warning: " << msg << '\n';
}

}  // namespace

void set_cma_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

std::int64_t CmaState::eigen_interval() const {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(1.0 / (10.0 * dim * (c_1 + c_mu)))));
}

CmaState cma_init(int dim, double sigma0, int lambda, std::span<const double> initial_mean) {
  if (dim < 1) throw ConfigError("cmaes: dimension must be at least 1");
  if (lambda < 4) throw ConfigError("cmaes: population must be at least 4, got " + std::to_string(lambda));
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ConfigError("cmaes: sigma0 must be positive and finite");
  if (!initial_mean.empty() && static_cast<int>(initial_mean.size()) != dim)
    throw ConfigError("cmaes: initial mean length does not match dimension");

  CmaState s;
  s.dim = dim;
  s.lambda = lambda;
  s.mu = lambda / 2;
  s.mean = Eigen::VectorXd::Zero(dim);
  if (!initial_mean.empty())
    for (int i = 0; i < dim; ++i) s.mean[i] = initial_mean[i];
  s.sigma = sigma0;
  s.cov = Eigen::MatrixXd::Identity(dim, dim);
  s.path_c = Eigen::VectorXd::Zero(dim);
  s.path_sigma = Eigen::VectorXd::Zero(dim);

  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i) s.weights[i] = std::log(s.mu + 0.5) - std::log(i + 1.0);
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  const double n = dim;
  const double me = s.mu_eff;
  s.c_c = (4.0 + me / n) / (n + 4.0 + 2.0 * me / n);
  s.c_sigma = (me + 2.0) / (n + me + 5.0);
  s.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + me);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (0.25 + me + 1.0 / me - 2.0) / ((n + 2.0) * (n + 2.0) + me));
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((me - 1.0) / (n + 1.0)) - 1.0) + s.c_sigma;
  s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  s.eigen_basis = Eigen::MatrixXd::Identity(dim, dim);
  s.eigen_sqrt = Eigen::VectorXd::Ones(dim);
  s.eigen_generation = 0;
  return s;
}

void cma_update_eigen(CmaState& s) {
  Eigen::MatrixXd sym = 0.5 * (s.cov + s.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    warn("eigendecomposition failed; keeping previous basis");
    return;
  }
  Eigen::VectorXd values = solver.eigenvalues();
  bool clamped = false;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] >= kEigenFloor)) {
      values[i] = kEigenFloor;
      clamped = true;
    }
  }
  s.eigen_basis = solver.eigenvectors();
  s.eigen_sqrt = values.cwiseSqrt();
  if (clamped) {
    warn("covariance not positive definite; eigenvalues clamped to 1e-12");
    s.cov = s.eigen_basis * values.asDiagonal() * s.eigen_basis.transpose();
  } else {
    s.cov = sym;
  }
  s.eigen_generation = s.generation;
}

std::vector<Eigen::VectorXd> cma_ask(CmaState& s, CounterRng& rng) {
  if (s.generation - s.eigen_generation >= s.eigen_interval()) cma_update_eigen(s);
  const Eigen::MatrixXd bd = s.eigen_basis * s.eigen_sqrt.asDiagonal();
  std::vector<Eigen::VectorXd> out;
  out.reserve(s.lambda);
  Eigen::VectorXd z(s.dim);
  for (int k = 0; k < s.lambda; ++k) {
    for (int i = 0; i < s.dim; ++i) z[i] = rng.normal();
    out.emplace_back(s.mean + s.sigma * (bd * z));
  }
  return out;
}

std::vector<int> cma_rank(std::span<const double> fitnesses, bool maximize) {
  const std::size_t n = fitnesses.size();
  std::vector<double> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = maximize ? -fitnesses[i] : fitnesses[i];
    key[i] = std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  return order;
}

void cma_tell(CmaState& s, std::span<const Eigen::VectorXd> candidates, std::span<const double> fitnesses,
              bool maximize) {
  if (static_cast<int>(candidates.size()) != s.lambda || fitnesses.size() != candidates.size())
    throw std::invalid_argument("cma_tell: expected " + std::to_string(s.lambda) + " candidates and fitnesses");
  int non_finite = 0;
  for (double f : fitnesses) non_finite += !std::isfinite(f);
  if (non_finite > 0) warn(std::to_string(non_finite) + " non-finite fitness value(s) ranked worst");

  const auto order = cma_rank(fitnesses, maximize);

  // Flat fitness carries no selection information; recombination would just
  // move the mean toward the first mu sample indices. Keep the distribution
  // and widen the step size instead.
  const bool flat = std::all_of(fitnesses.begin(), fitnesses.end(), [&](double f) {
    return f == fitnesses[0] || (!std::isfinite(f) && !std::isfinite(fitnesses[0]));
  });
  if (flat) {
    warn("flat fitness; increasing step size");
    s.sigma *= std::exp(0.2 + s.c_sigma / s.d_sigma);
    ++s.generation;
    return;
  }

  const int n = s.dim;
  const Eigen::VectorXd old_mean = s.mean;
  Eigen::MatrixXd steps(n, s.mu);  // (x_i - m) / sigma for the selected points
  for (int i = 0; i < s.mu; ++i) steps.col(i) = (candidates[order[i]] - old_mean) / s.sigma;
  const Eigen::VectorXd y_w = steps * s.weights;
  s.mean = old_mean + s.sigma * y_w;

  // C^{-1/2} y_w = B D^{-1} B^T y_w
  const Eigen::VectorXd inv_sqrt_y =
      s.eigen_basis * (s.eigen_basis.transpose() * y_w).cwiseQuotient(s.eigen_sqrt);
  s.path_sigma = (1.0 - s.c_sigma) * s.path_sigma + std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * inv_sqrt_y;

  const double ps_norm = s.path_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - s.c_sigma, 2.0 * static_cast<double>(s.generation + 1));
  const bool h_sigma = ps_norm / std::sqrt(decay) / s.chi_n < 1.4 + 2.0 / (n + 1.0);

  s.path_c = (1.0 - s.c_c) * s.path_c;
  if (h_sigma) s.path_c += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * y_w;

  const double delta_h = h_sigma ? 0.0 : s.c_c * (2.0 - s.c_c);
  const Eigen::MatrixXd weighted_steps = steps * s.weights.asDiagonal();
  s.cov *= (1.0 - s.c_1 - s.c_mu + s.c_1 * delta_h);
  s.cov.noalias() += s.c_1 * (s.path_c * s.path_c.transpose());
  s.cov.noalias() += s.c_mu * (weighted_steps * steps.transpose());
  s.cov = 0.5 * (s.cov + s.cov.transpose());

  s.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  ++s.generation;
}

}  // namespace protoattn
