#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace hpo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Frozen nonlinear embedding phi(x, y) = scale * tanh(W [x; onehot(y)] + b).
// The hidden layer of a fixed two-layer MLP is the feature output; with
// scale = 1/sqrt(feat_dim) every feature vector has 2-norm at most 1.
struct FeatureMap {
  int context_dim = 0;
  int num_responses = 0;
  int feat_dim = 0;
  MatrixXd weights;  // feat_dim x (context_dim + num_responses)
  VectorXd bias;     // feat_dim
  double scale = 1.0;

  int input_dim() const { return context_dim + num_responses; }

  // Context-dependent pre-activation W_ctx * x + b shared by all responses.
  VectorXd preactivation(const VectorXd& x) const {
    return weights.leftCols(context_dim) * x + bias;
  }
};

// phi(x, y) for a single response.
inline VectorXd phi(const FeatureMap& fmap, const VectorXd& x, int y) {
  if (y < 0 || y >= fmap.num_responses) {
    throw std::out_of_range("phi: response index out of range");
  }
  VectorXd pre = fmap.preactivation(x) + fmap.weights.col(fmap.context_dim + y);
  return fmap.scale * pre.array().tanh().matrix();
}

// Feature matrix for one context, one column per response (feat_dim x |Y|).
inline MatrixXd phi_all(const FeatureMap& fmap, const VectorXd& x) {
  MatrixXd m = fmap.weights.rightCols(fmap.num_responses);
  m.colwise() += fmap.preactivation(x);
  return fmap.scale * m.array().tanh().matrix();
}

}  // namespace hpo
