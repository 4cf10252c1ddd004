#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hpo {

using Eigen::VectorXd;

// Adaptive moment estimation with decoupled weight decay. The decay path
// never touches the moment estimates.
struct AdamW {
  double lr = 0.01;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  VectorXd m;
  VectorXd v;
  long step_count = 0;

  void reset(int dim) {
    m = VectorXd::Zero(dim);
    v = VectorXd::Zero(dim);
    step_count = 0;
  }
};

// One update in place: moments with bias correction, then
// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * theta.
// Throws on non-finite gradients.
void adamw_step(AdamW& state, VectorXd& theta, const VectorXd& grad);

struct LossAndGrad {
  double loss = 0.0;
  VectorXd grad;
};

using LossGradFn = std::function<LossAndGrad(const VectorXd&)>;

struct RunKResult {
  VectorXd theta;
  double final_loss = 0.0;
};

// k sequential steps from theta0; returns the final iterate and loss.
RunKResult run_k_steps(const VectorXd& theta0, const LossGradFn& loss_and_grad,
                       int k, AdamW& state);

}  // namespace hpo
