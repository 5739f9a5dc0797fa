#pragma once

// Flat parameter vector <-> structured model parameters.
//
// Layout (version kLayoutVersion), in order:
//   conv       weights[out][in] (9), biases (3)
//   attention  input_slopes (d_in), wq (d_in x d_q, row-major), bq, q_slopes,
//              wk (row-major), bk, k_slopes
//   lstm       input weights for gates i, f, g, o (n_in x n_h row-major each),
//              recurrent weights i, f, g, o (n_h x n_h), input biases i, f, g, o,
//              recurrent biases i, f, g, o
//   head       weights (n_h x n_out, row-major), biases (n_out)

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "protoattn/attention.hpp"
#include "protoattn/controller.hpp"
#include "protoattn/imgproc.hpp"
#include "protoattn/segmentation.hpp"

namespace protoattn {

inline constexpr std::string_view kLayoutVersion = "protoattn-genome-v1";

enum class ActionMode { Continuous, Discrete };

struct ModelConfig {
  int image_size = 96;
  int bits = 1;
  int d_in = kFeatureDim;
  int d_q = 2;
  int k = 1;
  int n_h = 16;
  int n_out = 3;
  ActionMode action_mode = ActionMode::Continuous;
  int conv_layers = 1;
  int conv_kernel = 1;
  Connectivity connectivity = Connectivity::Four;
  // Counting-only switches for reproducing other architectures' budgets.
  bool use_prelu = true;
  bool use_conv = true;

  /// Rejects configurations the agent cannot run (only checks positivity
  /// when counting_only is set).
  void validate(bool counting_only = false) const;

  int lstm_inputs() const noexcept { return 2 * k; }

  bool operator==(const ModelConfig&) const = default;
};

/// Budget of the patch-based reference architecture (d_in 147, d_q 4,
/// k 10, no PReLU, no convolution).
ModelConfig patch_reference_config();

struct ParamCounts {
  std::size_t conv = 0;
  std::size_t attention = 0;
  std::size_t lstm = 0;
  std::size_t head = 0;
  std::size_t total() const noexcept { return conv + attention + lstm + head; }
};

ParamCounts count_params_by_part(const ModelConfig& config);
std::size_t count_params(const ModelConfig& config);

struct ModelParams {
  ConvParams conv;
  AttentionParams attention;
  LstmParams lstm;
  HeadParams head;

  static ModelParams zeros(const ModelConfig& config);
};

/// Throws ConfigError if the vector length differs from count_params(config).
ModelParams decode(std::span<const double> genome, const ModelConfig& config);
std::vector<double> encode(const ModelParams& params);

}  // namespace protoattn
