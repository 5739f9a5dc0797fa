#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oracles.hpp"
#include "protoattn/controller.hpp"

using namespace protoattn;

namespace {

LstmParams random_lstm(CounterRng& rng, int n_in, int n_h, double scale) {
  auto p = LstmParams::zeros(n_in, n_h);
  for (int g = 0; g < 4; ++g) {
    for (Eigen::Index i = 0; i < p.w_input[g].size(); ++i) p.w_input[g].data()[i] = rng.uniform(-scale, scale);
    for (Eigen::Index i = 0; i < p.w_recurrent[g].size(); ++i)
      p.w_recurrent[g].data()[i] = rng.uniform(-scale, scale);
    for (int i = 0; i < n_h; ++i) {
      p.b_input[g][i] = rng.uniform(-scale, scale);
      p.b_recurrent[g][i] = rng.uniform(-scale, scale);
    }
  }
  return p;
}

ProtoObject object_at(double x, double y) {
  ProtoObject o;
  o.features[kComX] = x;
  o.features[kComY] = y;
  return o;
}

}  // namespace

TEST_SUITE("controller") {
  TEST_CASE("parameter count reproduces both table entries") {
    CHECK(LstmParams::param_count(2, 16) == 1280);
    CHECK(LstmParams::param_count(20, 16) == 2432);
    CHECK(LstmParams::param_count(4, 16) == 1408);
    CHECK(HeadParams::param_count(16, 3) == 51);
  }

  TEST_CASE("transfer function returns the centroid features") {
    CHECK(transfer_f(object_at(0.0, 0.0)) == std::array<double, 2>{0.0, 0.0});
    CHECK(transfer_f(object_at(-1.0, -1.0)) == std::array<double, 2>{-1.0, -1.0});
    ProtoObject o;
    for (int i = 0; i < kFeatureDim; ++i) o.features[i] = 0.1 * i - 0.5;
    const auto c = transfer_f(o);
    CHECK(c[0] == o.features[3]);
    CHECK(c[1] == o.features[4]);
  }

  TEST_CASE("assemble input pads with zeros") {
    std::vector<ProtoObject> objs{object_at(0.9, 0.9), object_at(0.5, -0.25)};
    const std::vector<int> one{1};
    const auto a = assemble_input(one, objs, 1);
    CHECK(a.size() == 2);
    CHECK(a[0] == 0.5);
    CHECK(a[1] == -0.25);
    const auto b = assemble_input(one, objs, 2);
    CHECK(b.size() == 4);
    CHECK(b[2] == 0.0);
    CHECK(b[3] == 0.0);
    const auto e = assemble_input({}, {}, 1);
    CHECK(e.isZero(0.0));
    CHECK(e.size() == 2);
  }

  TEST_CASE("zero parameters and zero state stay at zero") {
    const auto p = LstmParams::zeros(2, 16);
    Eigen::VectorXd x(2);
    x << 0.7, -0.3;
    const auto s = lstm_step(LstmState::zeros(16), x, p);
    CHECK(s.hidden.isZero(0.0));
    CHECK(s.cell.isZero(0.0));
  }

  TEST_CASE("gate-by-gate scalar oracle") {
    CounterRng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const int n_in = 2, n_h = 5;
      const auto p = random_lstm(rng, n_in, n_h, 1.0);
      LstmState s{Eigen::VectorXd(n_h), Eigen::VectorXd(n_h)};
      for (int i = 0; i < n_h; ++i) {
        s.hidden[i] = rng.uniform(-0.9, 0.9);
        s.cell[i] = rng.uniform(-2, 2);
      }
      Eigen::VectorXd x(n_in);
      x << rng.uniform(-1, 1), rng.uniform(-1, 1);
      const auto out = lstm_step(s, x, p);
      for (int j = 0; j < n_h; ++j) {
        double pre[4];
        for (int g = 0; g < 4; ++g) {
          pre[g] = p.b_input[g][j] + p.b_recurrent[g][j];
          for (int i = 0; i < n_in; ++i) pre[g] += x[i] * p.w_input[g](i, j);
          for (int i = 0; i < n_h; ++i) pre[g] += s.hidden[i] * p.w_recurrent[g](i, j);
        }
        const double ig = oracle::sigmoid(pre[kInputGate]);
        const double fg = oracle::sigmoid(pre[kForgetGate]);
        const double gg = std::tanh(pre[kCellGate]);
        const double og = oracle::sigmoid(pre[kOutputGate]);
        const double c = fg * s.cell[j] + ig * gg;
        CHECK(out.cell[j] == doctest::Approx(c).epsilon(1e-12));
        CHECK(out.hidden[j] == doctest::Approx(og * std::tanh(c)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("zero input and state: only biases matter") {
    CounterRng rng(13);
    const auto p = random_lstm(rng, 2, 4, 2.0);
    const auto out = lstm_step(LstmState::zeros(4), Eigen::VectorXd::Zero(2), p);
    const int j = 2;
    auto b = [&](int g) { return p.b_input[g][j] + p.b_recurrent[g][j]; };
    const double c = oracle::sigmoid(b(kInputGate)) * std::tanh(b(kCellGate));
    CHECK(out.cell[j] == doctest::Approx(c));
    CHECK(out.hidden[j] == doctest::Approx(oracle::sigmoid(b(kOutputGate)) * std::tanh(c)));
  }

  TEST_CASE("input length mismatch is rejected") {
    const auto p = LstmParams::zeros(2, 16);
    CHECK_THROWS_AS(lstm_step(LstmState::zeros(16), Eigen::VectorXd::Zero(3), p), std::invalid_argument);
  }

  TEST_CASE("property: hidden stays in (-1, 1) over 100000 random steps") {
    CounterRng rng(14);
    auto p = random_lstm(rng, 2, 16, 3.0);
    auto s = LstmState::zeros(16);
    double worst = 0.0;
    for (int step = 0; step < 100000; ++step) {
      if (step % 1000 == 0) p = random_lstm(rng, 2, 16, 3.0);
      Eigen::VectorXd x(2);
      x << rng.uniform(-1, 1), rng.uniform(-1, 1);
      s = lstm_step(s, x, p);
      worst = std::max(worst, s.hidden.cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1.0);
  }

  TEST_CASE("continuous head") {
    auto h = HeadParams::zeros(16, 3);
    const Eigen::VectorXd hidden = Eigen::VectorXd::Constant(16, 0.3);
    const auto a = act_continuous(hidden, h);
    CHECK(a.steer == 0.0);
    CHECK(a.gas == 0.5);
    CHECK(a.brake == 0.5);

    h.biases[0] = 1e6;
    CHECK(act_continuous(hidden, h).steer == 1.0);

    CounterRng rng(15);
    for (Eigen::Index i = 0; i < h.weights.size(); ++i) h.weights.data()[i] = rng.uniform(-1, 1);
    for (int i = 0; i < 3; ++i) h.biases[i] = rng.uniform(-1, 1);
    Eigen::VectorXd x(16);
    for (int i = 0; i < 16; ++i) x[i] = rng.uniform(-1, 1);
    double y[3];
    for (int o = 0; o < 3; ++o) {
      y[o] = h.biases[o];
      for (int i = 0; i < 16; ++i) y[o] += x[i] * h.weights(i, o);
    }
    const auto r = act_continuous(x, h);
    CHECK(r.steer == doctest::Approx(std::tanh(y[0])));
    CHECK(r.gas == doctest::Approx(oracle::sigmoid(y[1])));
    CHECK(r.brake == doctest::Approx(oracle::sigmoid(y[2])));
  }

  TEST_CASE("discrete head picks the argmax, lowest index on ties") {
    auto h = HeadParams::zeros(4, 3);
    const Eigen::VectorXd hidden = Eigen::VectorXd::Zero(4);
    CHECK(act_discrete(hidden, h) == 0);
    h.biases << 0.1, 0.9, 0.3;
    CHECK(act_discrete(hidden, h) == 1);
    h.biases << 0.5, 0.5, 0.1;
    CHECK(act_discrete(hidden, h) == 0);
    h.biases << 0.1, 0.5, 0.5;
    CHECK(act_discrete(hidden, h) == 1);
  }
}
