#pragma once

#include <vector>

#include "hpo/env.hpp"
#include "hpo/numeric.hpp"

namespace hpo {

// Softmax policy over the finite response set: pi(y|x) = softmax_y <theta, phi(x,y)>.
struct LogLinearPolicy {
  VectorXd theta;
};

// Distinguished reference policy, theta_ref ~ U([0,1])^d derived from the
// instance seed so that a serialized instance pins its reference policy.
LogLinearPolicy reference_policy_for(const BanditInstance& inst);

VectorXd action_probs(const LogLinearPolicy& policy, const BanditInstance& inst,
                      const VectorXd& x);
VectorXd action_log_probs(const LogLinearPolicy& policy,
                          const BanditInstance& inst, const VectorXd& x);

// log pi(y|x) - log pi_ref(y|x), via logit difference minus log-partition difference.
double log_ratio(const LogLinearPolicy& policy, const LogLinearPolicy& ref,
                 const BanditInstance& inst, const VectorXd& x, int y);

struct ObjectiveReport {
  double expected_reward = 0.0;
  double kl_to_ref = 0.0;
  double j_beta = 0.0;  // expected_reward - beta * kl_to_ref
  double beta = 0.0;
  int n_eval_contexts = 0;
};

// Monte Carlo over contexts with exact inner sums over the response set.
ObjectiveReport j_beta(const LogLinearPolicy& policy, const BanditInstance& inst,
                       const LogLinearPolicy& ref, double beta, int n_contexts,
                       Rng& rng);

// Frozen evaluation context set with cached features so that repeated
// objective evaluations reduce to one matrix-vector product per policy.
// Shared read-only by every algorithm and seed arm of an experiment.
struct EvalSet {
  MatrixXd features;  // feat_dim x (n_contexts * |Y|), context-major blocks
  MatrixXd rewards;   // |Y| x n_contexts
  MatrixXd ref_logp;  // |Y| x n_contexts
  std::vector<VectorXd> contexts;
  int num_responses = 0;

  int n_contexts() const { return static_cast<int>(contexts.size()); }
};

EvalSet make_eval_set(const BanditInstance& inst, const LogLinearPolicy& ref,
                      int n_contexts, std::uint64_t eval_seed);

ObjectiveReport eval_j_beta(const EvalSet& eval, const LogLinearPolicy& policy,
                            double beta);

// V_max = beta * max over policies, probe contexts and responses of |log pi/pi_ref|.
double measure_vmax(const std::vector<LogLinearPolicy>& policies,
                    const BanditInstance& inst, const LogLinearPolicy& ref,
                    double beta, const std::vector<VectorXd>& probe_contexts);

// Closed-form optimum of the KL-regularized objective for the shared-feature
// log-linear class: theta_ref + theta_star / beta.
LogLinearPolicy optimal_policy(const BanditInstance& inst,
                               const LogLinearPolicy& ref, double beta);

// --- token-level MDP policies -------------------------------------------------

LogLinearPolicy token_reference_policy_for(const TokenMDPInstance& mdp);

VectorXd token_action_log_probs(const TokenMDPInstance& mdp,
                                const VectorXd& theta, int s1,
                                const std::vector<int>& prefix);

double token_traj_log_prob(const TokenMDPInstance& mdp, const VectorXd& theta,
                           int s1, const std::vector<int>& tokens);

// Tabular soft-optimal policy from backward induction:
//   V_h(s) = beta log sum_a pi_ref(a|s) exp((r(s,a) + V_{h+1}(s.a)) / beta).
struct SoftTokenPolicy {
  // probs[h][prefix_index] is the action distribution at depth h (0-based),
  // prefix_index encoding the h tokens so far in base |A|.
  std::vector<std::vector<VectorXd>> probs;
  double v1 = 0.0;
  int s1 = 0;
};

SoftTokenPolicy soft_optimal_token_policy(const TokenMDPInstance& mdp,
                                          const VectorXd& theta_ref,
                                          double beta, int s1);

double soft_token_traj_log_prob(const SoftTokenPolicy& policy, int vocab_size,
                                const std::vector<int>& tokens);

}  // namespace hpo
