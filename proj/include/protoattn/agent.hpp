#pragma once

// The full perception-to-action pipeline for one rollout:
// frame -> conv+residual -> quantize -> segment -> attend -> LSTM -> action.

#include <vector>

#include "protoattn/envs.hpp"
#include "protoattn/genome.hpp"

namespace protoattn {

/// Intermediate products of one perception step, for rendering and tests.
struct PerceptionTrace {
  Image conv;
  QuantizedImage quantized;
  Labeling labeling;
  std::vector<ProtoObject> objects;
  std::vector<int> selected;
};

class Agent {
 public:
  Agent(ModelConfig config, ModelParams params);

  /// Zeroes the recurrent state; call at every episode start.
  void reset();

  /// Consumes one observation and returns the action for the environment.
  /// When trace is non-null it receives the intermediate stages.
  Action act(const Frame& frame, PerceptionTrace* trace = nullptr);

  int last_token_count() const noexcept { return last_tokens_; }
  const LstmState& lstm_state() const noexcept { return state_; }
  const ModelConfig& config() const noexcept { return config_; }
  const ModelParams& params() const noexcept { return params_; }

 private:
  ModelConfig config_;
  ModelParams params_;
  LstmState state_;
  int last_tokens_ = 0;
};

}  // namespace protoattn
