#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "benchmarks.hpp"
#include "protoattn/cmaes.hpp"
#include "protoattn/errors.hpp"

using namespace protoattn;

namespace {

struct QuietWarnings {
  int count = 0;
  QuietWarnings() {
    set_cma_warning_sink([this](const std::string&) { ++count; });
  }
  ~QuietWarnings() { set_cma_warning_sink(nullptr); }
};

}  // namespace

TEST_SUITE("cmaes") {
  TEST_CASE("initial state") {
    const auto s = cma_init(4, 0.3, 8);
    CHECK(s.mu == 4);
    CHECK(s.weights.size() == 4);
    CHECK(s.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
    for (int i = 0; i < 4; ++i) CHECK(s.weights[i] > 0.0);
    for (int i = 1; i < 4; ++i) CHECK(s.weights[i] < s.weights[i - 1]);
    CHECK(s.cov == Eigen::MatrixXd::Identity(4, 4));
    CHECK(s.mean.isZero(0.0));
    CHECK(s.sigma == 0.3);
  }

  TEST_CASE("mu_eff by hand for lambda 8") {
    const auto s = cma_init(4, 1.0, 8);
    double raw[4], total = 0.0;
    for (int i = 0; i < 4; ++i) total += raw[i] = std::log(4.5) - std::log(i + 1.0);
    double sq = 0.0;
    for (double r : raw) sq += (r / total) * (r / total);
    CHECK(s.mu_eff == doctest::Approx(1.0 / sq).epsilon(1e-13));
    CHECK(s.mu_eff == doctest::Approx(2.6001788).epsilon(1e-7));
  }

  TEST_CASE("invalid settings are configuration errors") {
    CHECK_THROWS_AS(cma_init(0, 0.1, 8), ConfigError);
    CHECK_THROWS_AS(cma_init(3, 0.1, 3), ConfigError);
    CHECK_THROWS_AS(cma_init(3, 0.0, 8), ConfigError);
    CHECK_THROWS_AS(cma_init(3, -1.0, 8), ConfigError);
  }

  TEST_CASE("tiny sigma samples the mean") {
    const std::vector<double> m{0.5, -1.0, 2.0};
    auto s = cma_init(3, 1e-300, 6, m);
    CounterRng rng(1);
    for (const auto& c : cma_ask(s, rng))
      for (int i = 0; i < 3; ++i) CHECK(c[i] == m[i]);
  }

  TEST_CASE("sampling is deterministic per seed") {
    auto a = cma_init(5, 0.7, 10), b = cma_init(5, 0.7, 10);
    CounterRng ra(42), rb(42);
    const auto ca = cma_ask(a, ra), cb = cma_ask(b, rb);
    for (std::size_t i = 0; i < ca.size(); ++i) CHECK(ca[i] == cb[i]);
  }

  TEST_CASE("sample covariance matches sigma^2 C") {
    auto s = cma_init(5, 0.5, 100);
    Eigen::MatrixXd a(5, 5);
    CounterRng seed_rng(3);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = seed_rng.uniform(-1, 1);
    s.cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(5, 5);
    cma_update_eigen(s);
    CounterRng rng(4);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(5);
    const int draws = 100000;
    for (int batch = 0; batch < draws / 100; ++batch)
      for (const auto& c : cma_ask(s, rng)) {
        const Eigen::VectorXd d = c - s.mean;
        acc += d * d.transpose();
        mean_acc += d;
      }
    const Eigen::MatrixXd sample = acc / draws;
    const Eigen::MatrixXd target = s.sigma * s.sigma * s.cov;
    CHECK((sample - target).norm() / target.norm() < 0.05);
    CHECK(mean_acc.norm() / draws < 0.02);
  }

  TEST_CASE("ranking is stable and pushes non-finite values last") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> f{3.0, 1.0, nan, 1.0, -inf, 2.0};
    CHECK(cma_rank(f, false) == std::vector<int>{1, 3, 5, 0, 2, 4});
    CHECK(cma_rank(f, true) == std::vector<int>{0, 5, 1, 3, 2, 4});
  }

  TEST_CASE("non-finite fitness warns and is ranked worst") {
    QuietWarnings quiet;
    auto s = cma_init(3, 0.5, 6);
    CounterRng rng(5);
    const auto c = cma_ask(s, rng);
    std::vector<double> f{1, 2, 3, std::numeric_limits<double>::quiet_NaN(), 5, 6};
    cma_tell(s, c, f);
    CHECK(quiet.count >= 1);
    CHECK(s.mean.allFinite());
  }

  TEST_CASE("flat fitness leaves the mean and covariance unchanged") {
    QuietWarnings quiet;
    auto s = cma_init(4, 0.5, 8, std::vector<double>{1, 2, 3, 4});
    CounterRng rng(6);
    const auto before = s;
    const auto c = cma_ask(s, rng);
    cma_tell(s, c, std::vector<double>(8, 7.0));
    CHECK(s.mean == before.mean);
    CHECK(s.cov == before.cov);
    CHECK(s.sigma > before.sigma);
    CHECK(s.generation == 1);
  }

  TEST_CASE("maximize equals minimizing the negation") {
    auto a = cma_init(6, 0.4, 12), b = cma_init(6, 0.4, 12);
    CounterRng ra(7), rb(7);
    for (int g = 0; g < 30; ++g) {
      const auto ca = cma_ask(a, ra);
      const auto cb = cma_ask(b, rb);
      std::vector<double> fa, fb;
      for (const auto& x : ca) fa.push_back(-bench::rosenbrock(x));
      for (const auto& x : cb) fb.push_back(bench::rosenbrock(x));
      cma_tell(a, ca, fa, true);
      cma_tell(b, cb, fb, false);
    }
    CHECK(a.mean == b.mean);
    CHECK(a.cov == b.cov);
    CHECK(a.sigma == b.sigma);
  }

  TEST_CASE("trajectory is a function of seed and fitness sequence") {
    auto run = [] {
      auto s = cma_init(4, 0.5, 8);
      CounterRng rng(8);
      for (int g = 0; g < 50; ++g) {
        const auto c = cma_ask(s, rng);
        std::vector<double> f;
        for (const auto& x : c) f.push_back(bench::sphere(x) + x[0]);
        cma_tell(s, c, f);
      }
      return s;
    };
    const auto a = run(), b = run();
    CHECK(a.mean == b.mean);
    CHECK(a.cov == b.cov);
    CHECK(a.path_c == b.path_c);
    CHECK(a.path_sigma == b.path_sigma);
    CHECK(a.sigma == b.sigma);
  }

  TEST_CASE("property: covariance stays symmetric positive definite under random fitness") {
    QuietWarnings quiet;
    auto s = cma_init(6, 1.0, 8);
    CounterRng rng(9), fit_rng(10);
    bool ok = true;
    for (int g = 0; g < 10000; ++g) {
      const auto c = cma_ask(s, rng);
      std::vector<double> f(c.size());
      for (auto& v : f) v = fit_rng.uniform();
      cma_tell(s, c, f);
      if (g % 50 == 0) {
        cma_update_eigen(s);
        ok = ok && bench::symmetric_pd(s.cov) && s.sigma > 0.0 && std::isfinite(s.sigma);
      }
    }
    CHECK(ok);
    CHECK((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("lazy eigendecomposition interval") {
    auto s = cma_init(10, 0.3, 16);
    CHECK(s.eigen_interval() == 1);
    auto big = cma_init(200, 0.3, 16);
    const double expect = std::floor(1.0 / (10.0 * 200 * (big.c_1 + big.c_mu)));
    CHECK(big.eigen_interval() == static_cast<std::int64_t>(std::max(1.0, expect)));
    CHECK(big.eigen_interval() > 1);
  }

  TEST_CASE("sphere: best-so-far never increases and converges") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto s = cma_init(10, 0.3, 16, std::vector<double>(10, 0.5));
      CounterRng rng(seed);
      double best = std::numeric_limits<double>::infinity();
      double prev = best;
      for (int g = 0; g < 250; ++g) {
        const auto c = cma_ask(s, rng);
        std::vector<double> f;
        for (const auto& x : c) f.push_back(bench::sphere(x));
        for (double v : f) best = std::min(best, v);
        REQUIRE(best <= prev);
        prev = best;
        cma_tell(s, c, f);
      }
      CHECK(best < 1e-15);
    }
  }

  TEST_CASE("rosenbrock dim 5 reaches 1e-6 for most seeds") {
    QuietWarnings quiet;
    std::vector<double> bests;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
      bests.push_back(bench::tutorial_run(bench::rosenbrock, 5, 16, 30000, 1e-6, seed).best);
    CHECK(bench::median(bests) < 1e-6);
  }
}
