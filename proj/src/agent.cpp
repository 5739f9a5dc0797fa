#include "protoattn/agent.hpp"

namespace protoattn {

Agent::Agent(ModelConfig config, ModelParams params) : config_(config), params_(std::move(params)) {
  config_.validate();
  reset();
}

void Agent::reset() {
  state_ = LstmState::zeros(config_.n_h);
  last_tokens_ = 0;
}

Action Agent::act(const Frame& frame, PerceptionTrace* trace) {
  Image conv = conv1x1_residual(frame, params_.conv);
  QuantizedImage quantized = quantize(conv, config_.bits);
  Labeling labeling = label_components(quantized, config_.connectivity);
  const auto kept = filter_noise(labeling.regions);
  auto objects = extract_features(kept, quantized.width, quantized.height, quantized.bits);
  auto selected = attend(token_matrix(objects), params_.attention, config_.k);

  last_tokens_ = static_cast<int>(objects.size());
  const auto input = assemble_input(selected, objects, config_.k);
  state_ = lstm_step(state_, input, params_.lstm);

  if (trace != nullptr) {
    trace->conv = std::move(conv);
    trace->quantized = std::move(quantized);
    trace->labeling = std::move(labeling);
    trace->objects = std::move(objects);
    trace->selected = std::move(selected);
  }

  if (config_.action_mode == ActionMode::Discrete)
    return static_cast<DodgeAction>(act_discrete(state_.hidden, params_.head));
  return act_continuous(state_.hidden, params_.head);
}

}  // namespace protoattn
