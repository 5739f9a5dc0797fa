#pragma once

// Hard self-attention over proto-object tokens: PReLU-wrapped query/key
// embeddings, row-softmax scores, per-token received attention, top-k.

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "protoattn/segmentation.hpp"

namespace protoattn {

/// Token matrix, one row per proto-object.
using TokenMatrix = Eigen::MatrixXd;

struct AttentionParams {
  int d_in = kFeatureDim;
  int d_q = 2;
  Eigen::VectorXd input_slopes;  // d_in, shared by the query and key paths
  Eigen::MatrixXd wq;            // d_in x d_q
  Eigen::VectorXd bq;            // d_q
  Eigen::VectorXd q_slopes;      // d_q
  Eigen::MatrixXd wk;            // d_in x d_q
  Eigen::VectorXd bk;            // d_q
  Eigen::VectorXd k_slopes;      // d_q

  /// Zero-initialised parameters of the given shape.
  static AttentionParams zeros(int d_in, int d_q);

  static std::size_t param_count(int d_in, int d_q) {
    return static_cast<std::size_t>(d_in) + 2 * (d_in * d_q + d_q) + 2 * d_q;
  }
  static std::size_t prelu_count(int d_in, int d_q) { return static_cast<std::size_t>(d_in) + 2 * d_q; }

  std::size_t param_count() const { return param_count(d_in, d_q); }
  std::size_t prelu_count() const { return prelu_count(d_in, d_q); }
};

struct Embedding {
  Eigen::MatrixXd q;  // N x d_q
  Eigen::MatrixXd k;  // N x d_q
};

/// max(a_i * x_i, x_i) elementwise. Throws std::invalid_argument on a length
/// mismatch.
Eigen::VectorXd prelu(const Eigen::VectorXd& x, const Eigen::VectorXd& slopes);

Embedding embed(const TokenMatrix& tokens, const AttentionParams& params);

/// Row-wise softmax(Q K^T / sqrt(d_q)), computed with per-row max subtraction.
Eigen::MatrixXd attention_scores(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k);

/// Column sums of a row-stochastic score matrix: total attention each token
/// receives. Sums to N.
Eigen::VectorXd importance(const Eigen::MatrixXd& scores);

/// Indices of the k highest scores, by descending score; ties go to the lower
/// index. Returns min(k, N) indices.
std::vector<int> select_top_k(const Eigen::VectorXd& importance, int k);

/// embed -> attention_scores -> importance -> select_top_k. An empty token
/// matrix selects nothing.
std::vector<int> attend(const TokenMatrix& tokens, const AttentionParams& params, int k);

TokenMatrix token_matrix(std::span<const ProtoObject> objects);

}  // namespace protoattn
