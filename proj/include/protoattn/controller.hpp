#pragma once

// LSTM controller fed with the centroids of the attended proto-objects, plus
// the continuous and discrete action heads.

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "protoattn/segmentation.hpp"

namespace protoattn {

/// Gate blocks in genome order.
enum Gate : int { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };

/// LSTM weights with separate input-side and recurrent-side bias vectors,
/// 4 * (n_in*n_h + n_h*n_h + 2*n_h) scalars in total.
struct LstmParams {
  int n_in = 2;
  int n_h = 16;
  std::array<Eigen::MatrixXd, 4> w_input;      // n_in x n_h per gate
  std::array<Eigen::MatrixXd, 4> w_recurrent;  // n_h x n_h per gate
  std::array<Eigen::VectorXd, 4> b_input;      // n_h per gate
  std::array<Eigen::VectorXd, 4> b_recurrent;  // n_h per gate

  static LstmParams zeros(int n_in, int n_h);
  static std::size_t param_count(int n_in, int n_h) {
    return 4 * (static_cast<std::size_t>(n_in) * n_h + static_cast<std::size_t>(n_h) * n_h + 2 * n_h);
  }
  std::size_t param_count() const { return param_count(n_in, n_h); }
};

struct LstmState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;

  static LstmState zeros(int n_h) { return {Eigen::VectorXd::Zero(n_h), Eigen::VectorXd::Zero(n_h)}; }
};

struct HeadParams {
  int n_h = 16;
  int n_out = 3;
  Eigen::MatrixXd weights;  // n_h x n_out
  Eigen::VectorXd biases;   // n_out

  static HeadParams zeros(int n_h, int n_out);
  static std::size_t param_count(int n_h, int n_out) {
    return static_cast<std::size_t>(n_h) * n_out + n_out;
  }
  std::size_t param_count() const { return param_count(n_h, n_out); }
};

struct ContinuousAction {
  double steer = 0.0;  // [-1, 1], -1 full left
  double gas = 0.0;    // [0, 1]
  double brake = 0.0;  // [0, 1]
};

/// Normalized center of mass (com_x, com_y) of a proto-object.
std::array<double, 2> transfer_f(const ProtoObject& obj);

/// Concatenated centroids of the selected objects, zero-padded to 2k.
Eigen::VectorXd assemble_input(std::span<const int> selected, std::span<const ProtoObject> objects, int k);

/// One LSTM cell update. Throws std::invalid_argument if the input length is
/// not n_in.
LstmState lstm_step(const LstmState& state, const Eigen::VectorXd& input, const LstmParams& params);

/// y = h W + b; steer = tanh(y0), gas = sigmoid(y1), brake = sigmoid(y2).
ContinuousAction act_continuous(const Eigen::VectorXd& hidden, const HeadParams& params);

/// argmax of y = h W + b, lowest index on ties.
int act_discrete(const Eigen::VectorXd& hidden, const HeadParams& params);

}  // namespace protoattn
