#pragma once

#include <utility>
#include <vector>

#include "hpo/policy.hpp"

namespace hpo {

struct LossValue {
  double total = 0.0;
  double dpo_part = 0.0;
  double optimism_part = 0.0;
  int n_pref_pairs = 0;
  int n_opt_samples = 0;
};

struct OptSample {
  VectorXd x;
  int y = 0;
};

struct ValueGrad {
  double value = 0.0;
  VectorXd grad;
};

// DPO margin, linear form: beta * <theta - theta_ref, phi(x,y+) - phi(x,y-)>.
// Equals the direct softmax form because log partitions cancel for a shared
// context; the direct form is kept as a second route for verification and for
// the token-level case where the cancellation does not hold.
double dpo_margin(const VectorXd& theta, const VectorXd& theta_ref,
                  const BanditInstance& inst, const PreferenceRecord& rec,
                  double beta);

double dpo_margin_softmax(const VectorXd& theta, const VectorXd& theta_ref,
                          const BanditInstance& inst,
                          const PreferenceRecord& rec, double beta);

inline double margin_from_dphi(const VectorXd& theta, const VectorXd& theta_ref,
                               const VectorXd& dphi, double beta) {
  return beta * (theta - theta_ref).dot(dphi);
}

LossValue dpo_loss(const VectorXd& theta, const VectorXd& theta_ref,
                   const BanditInstance& inst, const OfflineDataset& dataset,
                   double beta);

VectorXd dpo_grad(const VectorXd& theta, const VectorXd& theta_ref,
                  const BanditInstance& inst, const OfflineDataset& dataset,
                  double beta);

// Minibatch building blocks on precomputed feature differences (columns of
// dphi). Loss is summed, not averaged, matching the set sums in the objectives.
double dpo_loss_from_dphi(const VectorXd& theta, const VectorXd& theta_ref,
                          const MatrixXd& dphi, double beta);
void dpo_grad_from_dphi(const VectorXd& theta, const VectorXd& theta_ref,
                        const MatrixXd& dphi, double beta, VectorXd& grad_out);

// sign = +1: the optimism regularizer as added to the minimized objective
// (pushes mass away from sampler trajectories); sign = -1: pessimism variant
// for offline baselines.
ValueGrad optimism_term(const VectorXd& theta, const BanditInstance& inst,
                        const std::vector<OptSample>& opt_samples, double alpha,
                        int sign);

// Same term for one sample with its feature matrix already materialized.
void optimism_accumulate(const VectorXd& theta, const MatrixXd& features,
                         int y, double signed_alpha, double& value_out,
                         VectorXd& grad_out);

LossValue hpo_objective(const VectorXd& theta, const VectorXd& theta_ref,
                        const BanditInstance& inst,
                        const OfflineDataset& d_hyb_set,
                        const std::vector<OptSample>& d_opt_set, double alpha,
                        double beta);

VectorXd hpo_grad(const VectorXd& theta, const VectorXd& theta_ref,
                  const BanditInstance& inst, const OfflineDataset& d_hyb_set,
                  const std::vector<OptSample>& d_opt_set, double alpha,
                  double beta);

// Objective discrepancy g^pi for two responses sharing the same context:
// beta log(pi/pi_ref)(y|x) - r(x,y) - beta log(pi/pi_ref)(y~|x) + r(x,y~).
double g_value(const LogLinearPolicy& policy, const LogLinearPolicy& ref,
               const BanditInstance& inst, double beta,
               const std::pair<VectorXd, int>& a,
               const std::pair<VectorXd, int>& b);

// Offline coverage functional: mean squared g over the dataset.
double c_off(const LogLinearPolicy& policy, const LogLinearPolicy& ref,
             const BanditInstance& inst, double beta,
             const OfflineDataset& dataset);

// Token-level margin; only the direct trajectory-log-prob route is valid here.
double token_dpo_margin(const TokenMDPInstance& mdp, const VectorXd& theta,
                        const VectorXd& theta_ref, int s1,
                        const std::vector<int>& tokens_plus,
                        const std::vector<int>& tokens_minus, double beta);

}  // namespace hpo
