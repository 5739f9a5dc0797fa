#include "protoattn/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace protoattn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd head_output(const Eigen::VectorXd& hidden, const HeadParams& params) {
  return params.weights.transpose() * hidden + params.biases;
}

}  // namespace

LstmParams LstmParams::zeros(int n_in, int n_h) {
  LstmParams p;
  p.n_in = n_in;
  p.n_h = n_h;
  for (int g = 0; g < 4; ++g) {
    p.w_input[g] = Eigen::MatrixXd::Zero(n_in, n_h);
    p.w_recurrent[g] = Eigen::MatrixXd::Zero(n_h, n_h);
    p.b_input[g] = Eigen::VectorXd::Zero(n_h);
    p.b_recurrent[g] = Eigen::VectorXd::Zero(n_h);
  }
  return p;
}

HeadParams HeadParams::zeros(int n_h, int n_out) {
  return {n_h, n_out, Eigen::MatrixXd::Zero(n_h, n_out), Eigen::VectorXd::Zero(n_out)};
}

std::array<double, 2> transfer_f(const ProtoObject& obj) {
  return {obj.features[kComX], obj.features[kComY]};
}

Eigen::VectorXd assemble_input(std::span<const int> selected, std::span<const ProtoObject> objects, int k) {
  Eigen::VectorXd input = Eigen::VectorXd::Zero(2 * k);
  const int n = std::min<int>(k, static_cast<int>(selected.size()));
  for (int i = 0; i < n; ++i) {
    const auto xy = transfer_f(objects[selected[i]]);
    input[2 * i] = xy[0];
    input[2 * i + 1] = xy[1];
  }
  return input;
}

LstmState lstm_step(const LstmState& state, const Eigen::VectorXd& input, const LstmParams& params) {
  if (input.size() != params.n_in) throw std::invalid_argument("lstm_step: input length does not match n_in");
  if (state.hidden.size() != params.n_h || state.cell.size() != params.n_h)
    throw std::invalid_argument("lstm_step: state size does not match n_h");

  std::array<Eigen::VectorXd, 4> pre;
  for (int g = 0; g < 4; ++g)
    pre[g] = params.w_input[g].transpose() * input + params.b_input[g] +
             params.w_recurrent[g].transpose() * state.hidden + params.b_recurrent[g];

  LstmState next;
  next.cell.resize(params.n_h);
  next.hidden.resize(params.n_h);
  for (int j = 0; j < params.n_h; ++j) {
    const double i = sigmoid(pre[kInputGate][j]);
    const double f = sigmoid(pre[kForgetGate][j]);
    const double g = std::tanh(pre[kCellGate][j]);
    const double o = sigmoid(pre[kOutputGate][j]);
    next.cell[j] = f * state.cell[j] + i * g;
    next.hidden[j] = o * std::tanh(next.cell[j]);
  }
  return next;
}

ContinuousAction act_continuous(const Eigen::VectorXd& hidden, const HeadParams& params) {
  const Eigen::VectorXd y = head_output(hidden, params);
  return {std::tanh(y[0]), sigmoid(y[1]), sigmoid(y[2])};
}

int act_discrete(const Eigen::VectorXd& hidden, const HeadParams& params) {
  const Eigen::VectorXd y = head_output(hidden, params);
  int best = 0;
  for (int i = 1; i < y.size(); ++i)
    if (y[i] > y[best]) best = i;
  return best;
}

}  // namespace protoattn
