#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "protoattn/attention.hpp"

using namespace protoattn;
using namespace oracle;

TEST_SUITE("attention") {
  TEST_CASE("parameter and slope budget") {
    CHECK(AttentionParams::param_count(11, 2) == 63);
    CHECK(AttentionParams::prelu_count(11, 2) == 15);
    const auto p = AttentionParams::zeros(11, 2);
    CHECK(p.prelu_count() == 15);
    CHECK(p.input_slopes.size() + p.q_slopes.size() + p.k_slopes.size() == 15);
  }

  TEST_CASE("prelu examples") {
    auto one = [](double x, double a) {
      Eigen::VectorXd xv(1), av(1);
      xv << x;
      av << a;
      return prelu(xv, av)[0];
    };
    CHECK(one(-2.0, 0.5) == -1.0);
    CHECK(one(-3.0, -1.0) == 3.0);
    CHECK(one(4.0, 0.5) == 4.0);
    CounterRng rng(1);
    for (int i = 0; i < 100; ++i) {
      const double x = rng.uniform(-5, 5);
      CHECK(one(x, 1.0) == x);
    }
    CHECK_THROWS_AS(prelu(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)), std::invalid_argument);
  }

  TEST_CASE("zero parameters embed to zero") {
    CounterRng rng(2);
    const auto e = embed(random_tokens(rng, 5), AttentionParams::zeros(11, 2));
    CHECK(e.q.isZero(0.0));
    CHECK(e.k.isZero(0.0));
  }

  TEST_CASE("embedding matches scalar oracle") {
    CounterRng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_params(rng);
      const auto t = random_tokens(rng, 6);
      const auto e = embed(t, p);
      const auto ref = scalar_pipeline(t, p, 1);
      for (int r = 0; r < 6; ++r)
        for (int j = 0; j < 2; ++j) {
          CHECK(e.q(r, j) == doctest::Approx(ref.q[r][j]).epsilon(1e-12));
          CHECK(e.k(r, j) == doctest::Approx(ref.k[r][j]).epsilon(1e-12));
        }
    }
  }

  TEST_CASE("unit slopes reduce to a plain linear layer") {
    CounterRng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      auto p = random_params(rng);
      p.input_slopes.setOnes();
      p.q_slopes.setOnes();
      p.k_slopes.setOnes();
      const auto t = random_tokens(rng, 1 + static_cast<int>(rng.below(12)));
      const auto e = embed(t, p);
      const auto ref = scalar_pipeline(t, p, 3, false);
      for (Eigen::Index r = 0; r < t.rows(); ++r)
        for (int j = 0; j < 2; ++j) {
          CHECK(std::abs(e.q(r, j) - ref.q[r][j]) <= 1e-12);
          CHECK(std::abs(e.k(r, j) - ref.k[r][j]) <= 1e-12);
        }
      const auto s = attention_scores(e.q, e.k);
      for (Eigen::Index a = 0; a < t.rows(); ++a)
        for (Eigen::Index b = 0; b < t.rows(); ++b) CHECK(std::abs(s(a, b) - ref.scores[a][b]) <= 1e-12);
    }
  }

  TEST_CASE("permuting tokens permutes embeddings and importance") {
    CounterRng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(10));
      const auto p = random_params(rng);
      const auto t = random_tokens(rng, n);
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
      TokenMatrix tp(n, kFeatureDim);
      for (int i = 0; i < n; ++i) tp.row(i) = t.row(perm[i]);
      const auto e = embed(t, p), ep = embed(tp, p);
      const auto imp = importance(attention_scores(e.q, e.k));
      const auto impp = importance(attention_scores(ep.q, ep.k));
      for (int i = 0; i < n; ++i) {
        CHECK(ep.q.row(i) == e.q.row(perm[i]));
        CHECK(ep.k.row(i) == e.k.row(perm[i]));
        CHECK(impp[i] == doctest::Approx(imp[perm[i]]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("score examples") {
    Eigen::MatrixXd q1(1, 2), k1(1, 2);
    q1 << 3.0, -2.0;
    k1 << 0.5, 7.0;
    CHECK(attention_scores(q1, k1)(0, 0) == 1.0);
    const auto u = attention_scores(Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(4, 2));
    CHECK(u.isApproxToConstant(0.25, 1e-15));
    CHECK(importance(u).isApproxToConstant(1.0, 1e-15));
    CHECK(importance(attention_scores(q1, k1))[0] == 1.0);
  }

  TEST_CASE("large logits stay finite") {
    Eigen::MatrixXd q(2, 2), k(2, 2);
    q << 800, 0, -800, 0;
    k << 1, 0, 2, 0;
    const auto s = attention_scores(q, k);
    CHECK(s.allFinite());
    CHECK(s.row(0).sum() == doctest::Approx(1.0));
    CHECK(s(0, 1) == doctest::Approx(1.0));
    CHECK(s(1, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("property: rows sum to one and importance sums to N") {
    CounterRng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(30));
      Eigen::MatrixXd q(n, 2), k(n, 2);
      fill(rng, q, -4, 4);
      fill(rng, k, -4, 4);
      const auto s = attention_scores(q, k);
      for (int i = 0; i < n; ++i) CHECK(std::abs(s.row(i).sum() - 1.0) <= 1e-9);
      CHECK(std::abs(importance(s).sum() - n) <= 1e-9 * n);
    }
  }

  TEST_CASE("top-k selection") {
    Eigen::VectorXd a(3);
    a << 0.2, 0.9, 0.5;
    CHECK(select_top_k(a, 1) == std::vector<int>{1});
    Eigen::VectorXd b(2);
    b << 0.5, 0.5;
    CHECK(select_top_k(b, 1) == std::vector<int>{0});
    Eigen::VectorXd c(4);
    c << 0.1, 0.4, 0.3, 0.2;
    CHECK(select_top_k(c, 10) == std::vector<int>{1, 2, 3, 0});
    CHECK(select_top_k(Eigen::VectorXd(0), 3).empty());
  }

  TEST_CASE("attend edge cases") {
    CounterRng rng(7);
    const auto p = random_params(rng);
    CHECK(attend(random_tokens(rng, 1), p, 1) == std::vector<int>{0});
    CHECK(attend(TokenMatrix(0, kFeatureDim), p, 1).empty());
    TokenMatrix dup(3, kFeatureDim);
    dup.row(0) = random_tokens(rng, 1).row(0);
    dup.row(1) = dup.row(0);
    dup.row(2) = dup.row(0);
    CHECK(attend(dup, p, 2) == std::vector<int>{0, 1});
  }

  TEST_CASE("attend matches the scalar pipeline oracle") {
    CounterRng rng(8);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(20));
      const int k = 1 + static_cast<int>(rng.below(4));
      const auto p = random_params(rng);
      const auto t = random_tokens(rng, n);
      CHECK(attend(t, p, k) == scalar_pipeline(t, p, k).selected);
    }
  }

  TEST_CASE("token matrix rows are feature vectors") {
    std::vector<ProtoObject> objs(2);
    objs[0].features.fill(0.25);
    objs[1].features[kExtent] = -0.5;
    const auto t = token_matrix(objs);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == kFeatureDim);
    CHECK(t(0, 3) == 0.25);
    CHECK(t(1, kExtent) == -0.5);
  }
}
