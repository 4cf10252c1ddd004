#include "hpo/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace hpo {

namespace {

VectorXd pair_dphi(const BanditInstance& inst, const PreferenceRecord& rec) {
  const MatrixXd features = phi_all(inst.fmap, rec.x);
  return features.col(rec.y_plus) - features.col(rec.y_minus);
}

}  // namespace

double dpo_margin(const VectorXd& theta, const VectorXd& theta_ref,
                  const BanditInstance& inst, const PreferenceRecord& rec,
                  double beta) {
  return margin_from_dphi(theta, theta_ref, pair_dphi(inst, rec), beta);
}

double dpo_margin_softmax(const VectorXd& theta, const VectorXd& theta_ref,
                          const BanditInstance& inst,
                          const PreferenceRecord& rec, double beta) {
  const LogLinearPolicy pi{theta};
  const LogLinearPolicy ref{theta_ref};
  return beta * (log_ratio(pi, ref, inst, rec.x, rec.y_plus) -
                 log_ratio(pi, ref, inst, rec.x, rec.y_minus));
}

LossValue dpo_loss(const VectorXd& theta, const VectorXd& theta_ref,
                   const BanditInstance& inst, const OfflineDataset& dataset,
                   double beta) {
  LossValue lv;
  lv.n_pref_pairs = static_cast<int>(dataset.size());
  for (const PreferenceRecord& rec : dataset) {
    lv.dpo_part += neg_log_sigmoid(dpo_margin(theta, theta_ref, inst, rec, beta));
  }
  lv.total = lv.dpo_part;
  return lv;
}

VectorXd dpo_grad(const VectorXd& theta, const VectorXd& theta_ref,
                  const BanditInstance& inst, const OfflineDataset& dataset,
                  double beta) {
  VectorXd grad = VectorXd::Zero(theta.size());
  for (const PreferenceRecord& rec : dataset) {
    const VectorXd dphi = pair_dphi(inst, rec);
    const double m = margin_from_dphi(theta, theta_ref, dphi, beta);
    grad += (sigmoid(m) - 1.0) * beta * dphi;
  }
  return grad;
}

double dpo_loss_from_dphi(const VectorXd& theta, const VectorXd& theta_ref,
                          const MatrixXd& dphi, double beta) {
  const VectorXd margins = beta * (dphi.transpose() * (theta - theta_ref));
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    loss += neg_log_sigmoid(margins(i));
  }
  return loss;
}

void dpo_grad_from_dphi(const VectorXd& theta, const VectorXd& theta_ref,
                        const MatrixXd& dphi, double beta, VectorXd& grad_out) {
  const VectorXd margins = beta * (dphi.transpose() * (theta - theta_ref));
  VectorXd coef(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    coef(i) = (sigmoid(margins(i)) - 1.0) * beta;
  }
  grad_out.noalias() += dphi * coef;
}

void optimism_accumulate(const VectorXd& theta, const MatrixXd& features,
                         int y, double signed_alpha, double& value_out,
                         VectorXd& grad_out) {
  const VectorXd logits = features.transpose() * theta;
  const double lse = log_sum_exp(logits);
  value_out += signed_alpha * (logits(y) - lse);
  const VectorXd p = (logits.array() - lse).exp();
  grad_out.noalias() += signed_alpha * (features.col(y) - features * p);
}

ValueGrad optimism_term(const VectorXd& theta, const BanditInstance& inst,
                        const std::vector<OptSample>& opt_samples, double alpha,
                        int sign) {
  ValueGrad vg;
  vg.grad = VectorXd::Zero(theta.size());
  if (alpha == 0.0) return vg;
  const double signed_alpha = sign >= 0 ? alpha : -alpha;
  for (const OptSample& s : opt_samples) {
    optimism_accumulate(theta, phi_all(inst.fmap, s.x), s.y, signed_alpha,
                        vg.value, vg.grad);
  }
  return vg;
}

LossValue hpo_objective(const VectorXd& theta, const VectorXd& theta_ref,
                        const BanditInstance& inst,
                        const OfflineDataset& d_hyb_set,
                        const std::vector<OptSample>& d_opt_set, double alpha,
                        double beta) {
  LossValue lv = dpo_loss(theta, theta_ref, inst, d_hyb_set, beta);
  const ValueGrad opt = optimism_term(theta, inst, d_opt_set, alpha, +1);
  lv.optimism_part = opt.value;
  lv.n_opt_samples = static_cast<int>(d_opt_set.size());
  lv.total = lv.optimism_part + lv.dpo_part;
  return lv;
}

VectorXd hpo_grad(const VectorXd& theta, const VectorXd& theta_ref,
                  const BanditInstance& inst, const OfflineDataset& d_hyb_set,
                  const std::vector<OptSample>& d_opt_set, double alpha,
                  double beta) {
  VectorXd grad = dpo_grad(theta, theta_ref, inst, d_hyb_set, beta);
  grad += optimism_term(theta, inst, d_opt_set, alpha, +1).grad;
  return grad;
}

double g_value(const LogLinearPolicy& policy, const LogLinearPolicy& ref,
               const BanditInstance& inst, double beta,
               const std::pair<VectorXd, int>& a,
               const std::pair<VectorXd, int>& b) {
  if (a.first.size() != b.first.size() ||
      (a.first.array() != b.first.array()).any()) {
    throw std::invalid_argument("g_value: trajectories must share the context");
  }
  const MatrixXd features = phi_all(inst.fmap, a.first);
  const VectorXd lp = log_softmax(features.transpose() * policy.theta);
  const VectorXd lp_ref = log_softmax(features.transpose() * ref.theta);
  const VectorXd r = features.transpose() * inst.theta_star;
  const auto h = [&](int y) { return beta * (lp(y) - lp_ref(y)) - r(y); };
  return h(a.second) - h(b.second);
}

double c_off(const LogLinearPolicy& policy, const LogLinearPolicy& ref,
             const BanditInstance& inst, double beta,
             const OfflineDataset& dataset) {
  if (dataset.empty()) throw std::invalid_argument("c_off: empty dataset");
  double acc = 0.0;
  for (const PreferenceRecord& rec : dataset) {
    const double g = g_value(policy, ref, inst, beta, {rec.x, rec.y_plus},
                             {rec.x, rec.y_minus});
    acc += g * g;
  }
  return acc / static_cast<double>(dataset.size());
}

double token_dpo_margin(const TokenMDPInstance& mdp, const VectorXd& theta,
                        const VectorXd& theta_ref, int s1,
                        const std::vector<int>& tokens_plus,
                        const std::vector<int>& tokens_minus, double beta) {
  const double lr_plus = token_traj_log_prob(mdp, theta, s1, tokens_plus) -
                         token_traj_log_prob(mdp, theta_ref, s1, tokens_plus);
  const double lr_minus = token_traj_log_prob(mdp, theta, s1, tokens_minus) -
                          token_traj_log_prob(mdp, theta_ref, s1, tokens_minus);
  return beta * (lr_plus - lr_minus);
}

}  // namespace hpo
