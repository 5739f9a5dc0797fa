#include "protoattn/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace protoattn {

AttentionParams AttentionParams::zeros(int d_in, int d_q) {
  AttentionParams p;
  p.d_in = d_in;
  p.d_q = d_q;
  p.input_slopes = Eigen::VectorXd::Zero(d_in);
  p.wq = Eigen::MatrixXd::Zero(d_in, d_q);
  p.bq = Eigen::VectorXd::Zero(d_q);
  p.q_slopes = Eigen::VectorXd::Zero(d_q);
  p.wk = Eigen::MatrixXd::Zero(d_in, d_q);
  p.bk = Eigen::VectorXd::Zero(d_q);
  p.k_slopes = Eigen::VectorXd::Zero(d_q);
  return p;
}

Eigen::VectorXd prelu(const Eigen::VectorXd& x, const Eigen::VectorXd& slopes) {
  if (x.size() != slopes.size()) throw std::invalid_argument("prelu: slope count does not match input length");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = std::max(slopes[i] * x[i], x[i]);
  return out;
}

namespace {

// Row-wise PReLU on a matrix, slopes indexed by column.
void prelu_rows(Eigen::MatrixXd& m, const Eigen::VectorXd& slopes) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = std::max(slopes[j] * m(i, j), m(i, j));
}

}  // namespace

Embedding embed(const TokenMatrix& tokens, const AttentionParams& params) {
  if (tokens.cols() != params.d_in) throw std::invalid_argument("embed: token width does not match d_in");
  Eigen::MatrixXd u = tokens;
  prelu_rows(u, params.input_slopes);
  Embedding e;
  e.q = u * params.wq;
  e.q.rowwise() += params.bq.transpose();
  prelu_rows(e.q, params.q_slopes);
  e.k = u * params.wk;
  e.k.rowwise() += params.bk.transpose();
  prelu_rows(e.k, params.k_slopes);
  return e;
}

Eigen::MatrixXd attention_scores(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Eigen::MatrixXd s = (q * k.transpose()) * scale;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double row_max = s.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      s(i, j) = std::exp(s(i, j) - row_max);
      total += s(i, j);
    }
    s.row(i) /= total;
  }
  return s;
}

Eigen::VectorXd importance(const Eigen::MatrixXd& scores) { return scores.colwise().sum().transpose(); }

std::vector<int> select_top_k(const Eigen::VectorXd& importance, int k) {
  const int n = static_cast<int>(importance.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const int take = std::clamp(k, 0, n);
  std::partial_sort(idx.begin(), idx.begin() + take, idx.end(), [&](int a, int b) {
    if (importance[a] != importance[b]) return importance[a] > importance[b];
    return a < b;
  });
  idx.resize(take);
  return idx;
}

std::vector<int> attend(const TokenMatrix& tokens, const AttentionParams& params, int k) {
  if (tokens.rows() == 0) return {};
  const auto e = embed(tokens, params);
  return select_top_k(importance(attention_scores(e.q, e.k)), k);
}

TokenMatrix token_matrix(std::span<const ProtoObject> objects) {
  TokenMatrix t(static_cast<Eigen::Index>(objects.size()), kFeatureDim);
  for (std::size_t i = 0; i < objects.size(); ++i)
    for (int j = 0; j < kFeatureDim; ++j) t(static_cast<Eigen::Index>(i), j) = objects[i].features[j];
  return t;
}

}  // namespace protoattn
