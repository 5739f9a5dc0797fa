#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "protoattn/rng.hpp"
#include "protoattn/stats.hpp"

using namespace protoattn;
using namespace oracle;

TEST_SUITE("stats") {
  TEST_CASE("mean and 95% interval by hand") {
    const std::vector<double> x{2.0, 4.0, 4.0, 5.0, 10.0};
    const auto ci = mean_ci95(x);
    CHECK(ci.n == 5);
    CHECK(ci.mean == doctest::Approx(5.0));
    const double sd = std::sqrt((9.0 + 1.0 + 1.0 + 0.0 + 25.0) / 4.0);
    CHECK(ci.sd == doctest::Approx(sd));
    CHECK(ci.half_width == doctest::Approx(1.96 * sd / std::sqrt(5.0)));
  }

  TEST_CASE("constant samples have zero width") {
    const std::vector<double> x(40, 7.25);
    const auto ci = mean_ci95(x);
    CHECK(ci.mean == 7.25);
    CHECK(ci.half_width == 0.0);
    CHECK(mean_ci95(std::vector<double>{3.0}).half_width == 0.0);
  }

  TEST_CASE("mann-whitney examples") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const auto r = mann_whitney_u(a, b);
    CHECK(r.exact);
    CHECK(r.u_a == 0.0);
    CHECK(r.u_b == 9.0);
    CHECK(r.p_value == doctest::Approx(0.1).epsilon(1e-12));
    const auto same = mann_whitney_u(a, a);
    CHECK(same.p_value == 1.0);
    const std::vector<double> tied(6, 2.0);
    CHECK(mann_whitney_u(tied, tied).p_value == 1.0);
    CHECK_THROWS_AS(mann_whitney_u(std::vector<double>{}, a), std::invalid_argument);
  }

  TEST_CASE("exact mode agrees with enumeration for every size pair up to 8") {
    CounterRng rng(1);
    for (int na = 1; na <= 8; ++na)
      for (int nb = 1; nb <= 8; ++nb)
        for (int distinct : {3, 100}) {
          const auto a = sample(rng, na, distinct);
          const auto b = sample(rng, nb, distinct);
          const auto r = mann_whitney_u(a, b);
          const auto e = enumerate_mwu(a, b);
          REQUIRE(r.exact);
          CHECK(r.u_a == doctest::Approx(e.u_a));
          CHECK(r.u_a + r.u_b == doctest::Approx(na * nb));
          CHECK(r.p_value == doctest::Approx(e.p).epsilon(1e-12));
        }
  }

  TEST_CASE("swapping the samples keeps the two-sided p") {
    CounterRng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      const int na = 1 + static_cast<int>(rng.below(30));
      const int nb = 1 + static_cast<int>(rng.below(30));
      const auto a = sample(rng, na, 1 + static_cast<int>(rng.below(40)));
      const auto b = sample(rng, nb, 1 + static_cast<int>(rng.below(40)));
      const auto ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
      CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
      CHECK(ab.u_a == ba.u_b);
    }
  }

  TEST_CASE("normal approximation with tie and continuity corrections") {
    // Reference values from scipy.stats.mannwhitneyu (asymptotic, continuity).
    std::vector<double> a, b;
    for (int i = 1; i <= 25; ++i) a.push_back(i);
    for (int i = 5; i < 30; ++i) b.push_back(i + 0.5);
    const auto r = mann_whitney_u(a, b);
    CHECK_FALSE(r.exact);
    CHECK(r.u_a == 210.0);
    CHECK(r.p_value == doctest::Approx(0.0478057953309806).epsilon(1e-10));

    const std::vector<double> ta{1, 2, 2, 3, 3, 3, 4, 5, 5, 6, 7, 8, 8, 9, 10, 10, 11, 12, 13, 14, 14};
    const std::vector<double> tb{3, 4, 4, 5, 6, 6, 7, 8, 9, 9, 10, 11, 12, 12, 13, 15, 16, 17, 18, 19, 20, 21};
    const auto t = mann_whitney_u(ta, tb);
    CHECK(t.u_a == 136.0);
    CHECK(t.p_value == doctest::Approx(0.021462192972724083).epsilon(1e-10));
  }

  TEST_CASE("exact p for a mixed sample against scipy") {
    const std::vector<double> a{1.5, 2.5, 0.3, 4.4, 2.2}, b{3.1, 5.2, 6.6, 0.9, 7.7, 8.1};
    const auto r = mann_whitney_u(a, b);
    CHECK(r.u_a == 5.0);
    CHECK(r.p_value == doctest::Approx(0.08225108225108226).epsilon(1e-12));
  }

  TEST_CASE("property: p-values lie in (0, 1]") {
    CounterRng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
      const auto a = sample(rng, 1 + static_cast<int>(rng.below(40)), 50);
      const auto b = sample(rng, 1 + static_cast<int>(rng.below(40)), 50);
      const double p = mann_whitney_u(a, b).p_value;
      CHECK(p > 0.0);
      CHECK(p <= 1.0);
    }
  }
}
