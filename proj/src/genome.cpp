#include "protoattn/genome.hpp"

#include <cmath>
#include <string>

#include "protoattn/errors.hpp"

namespace protoattn {

void ModelConfig::validate(bool counting_only) const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string("model: ") + name + " must be positive, got " + std::to_string(v));
  };
  positive(image_size, "image_size");
  positive(bits, "bits");
  positive(d_in, "d_in");
  positive(d_q, "d_q");
  positive(k, "k");
  positive(n_h, "n_h");
  positive(n_out, "n_out");
  positive(conv_layers, "conv_layers");
  positive(conv_kernel, "conv_kernel");
  if (counting_only) return;

  if (bits > 8) throw ConfigError("model: bits must be at most 8");
  if (d_in != kFeatureDim) throw ConfigError("model: d_in is fixed at 11 (the proto-object feature schema)");
  if (conv_layers != 1) throw ConfigError("model: only a single convolution layer is supported");
  if (conv_kernel != 1) throw ConfigError("model: only 1x1 convolution kernels are supported");
  if (!use_prelu || !use_conv) throw ConfigError("model: use_prelu/use_conv may only be disabled for counting");
  if (n_out != 3) throw ConfigError("model: n_out must be 3");
  if (image_size < 2) throw ConfigError("model: image_size must be at least 2");
}

ModelConfig patch_reference_config() {
  ModelConfig c;
  c.d_in = 147;
  c.d_q = 4;
  c.k = 10;
  c.use_prelu = false;
  c.use_conv = false;
  return c;
}

ParamCounts count_params_by_part(const ModelConfig& c) {
  c.validate(true);
  ParamCounts n;
  if (c.use_conv) n.conv = static_cast<std::size_t>(3 * 3 * c.conv_kernel * c.conv_kernel + 3) * c.conv_layers;
  n.attention = 2 * (static_cast<std::size_t>(c.d_in) * c.d_q + c.d_q);
  if (c.use_prelu) n.attention += AttentionParams::prelu_count(c.d_in, c.d_q);
  n.lstm = LstmParams::param_count(c.lstm_inputs(), c.n_h);
  n.head = HeadParams::param_count(c.n_h, c.n_out);
  return n;
}

std::size_t count_params(const ModelConfig& config) { return count_params_by_part(config).total(); }

ModelParams ModelParams::zeros(const ModelConfig& c) {
  return {ConvParams{}, AttentionParams::zeros(c.d_in, c.d_q), LstmParams::zeros(c.lstm_inputs(), c.n_h),
          HeadParams::zeros(c.n_h, c.n_out)};
}

namespace {

// Visits every scalar of the parameter set in layout order. The same walk
// drives decode and encode so the two cannot drift apart.
template <typename Params, typename Fn>
void walk(Params& p, Fn&& fn) {
  for (auto& row : p.conv.weights)
    for (auto& w : row) fn(w);
  for (auto& b : p.conv.biases) fn(b);

  auto& a = p.attention;
  auto vec = [&](auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) fn(v[i]);
  };
  auto mat = [&](auto& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) fn(m(r, c));
  };
  vec(a.input_slopes);
  mat(a.wq);
  vec(a.bq);
  vec(a.q_slopes);
  mat(a.wk);
  vec(a.bk);
  vec(a.k_slopes);

  auto& l = p.lstm;
  for (auto& m : l.w_input) mat(m);
  for (auto& m : l.w_recurrent) mat(m);
  for (auto& v : l.b_input) vec(v);
  for (auto& v : l.b_recurrent) vec(v);

  mat(p.head.weights);
  vec(p.head.biases);
}

}  // namespace

ModelParams decode(std::span<const double> genome, const ModelConfig& config) {
  const std::size_t expected = count_params(config);
  if (genome.size() != expected)
    throw ConfigError("decode: genome has " + std::to_string(genome.size()) + " values, layout needs " +
                      std::to_string(expected));
  auto params = ModelParams::zeros(config);
  std::size_t i = 0;
  walk(params, [&](double& slot) { slot = genome[i++]; });
  return params;
}

std::vector<double> encode(const ModelParams& params) {
  std::vector<double> out;
  walk(params, [&](const double& v) { out.push_back(v); });
  return out;
}

}  // namespace protoattn
