#include "hpo/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hpo {

void adamw_step(AdamW& state, VectorXd& theta, const VectorXd& grad) {
  if (!grad.allFinite()) {
    throw std::runtime_error(
        "adamw_step: non-finite gradient at step " +
        std::to_string(state.step_count + 1));
  }
  if (state.m.size() != theta.size()) state.reset(static_cast<int>(theta.size()));

  state.step_count += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v +
            (1.0 - state.beta2) * grad.array().square().matrix();

  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  const VectorXd m_hat = state.m / bc1;
  const VectorXd v_hat = state.v / bc2;

  // Both terms are taken at the incoming iterate.
  const VectorXd decay = state.lr * state.weight_decay * theta;
  theta.array() -= state.lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
  theta -= decay;
}

RunKResult run_k_steps(const VectorXd& theta0, const LossGradFn& loss_and_grad,
                       int k, AdamW& state) {
  if (k < 1) throw std::invalid_argument("run_k_steps: k must be >= 1");
  VectorXd theta = theta0;
  double loss = 0.0;
  for (int i = 0; i < k; ++i) {
    LossAndGrad lg = loss_and_grad(theta);
    loss = lg.loss;
    adamw_step(state, theta, lg.grad);
  }
  return {std::move(theta), loss};
}

}  // namespace hpo
