#include "hpo/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace hpo {

LogLinearPolicy reference_policy_for(const BanditInstance& inst) {
  Rng rng = Rng(inst.seed).substream(3);
  VectorXd theta(inst.feat_dim());
  for (int i = 0; i < theta.size(); ++i) theta(i) = rng.uniform01();
  return LogLinearPolicy{theta};
}

VectorXd action_probs(const LogLinearPolicy& policy, const BanditInstance& inst,
                      const VectorXd& x) {
  return softmax(phi_all(inst.fmap, x).transpose() * policy.theta);
}

VectorXd action_log_probs(const LogLinearPolicy& policy,
                          const BanditInstance& inst, const VectorXd& x) {
  return log_softmax(phi_all(inst.fmap, x).transpose() * policy.theta);
}

double log_ratio(const LogLinearPolicy& policy, const LogLinearPolicy& ref,
                 const BanditInstance& inst, const VectorXd& x, int y) {
  const MatrixXd features = phi_all(inst.fmap, x);
  const VectorXd logits = features.transpose() * policy.theta;
  const VectorXd logits_ref = features.transpose() * ref.theta;
  return (logits(y) - log_sum_exp(logits)) -
         (logits_ref(y) - log_sum_exp(logits_ref));
}

namespace {

// Exact inner sums for one context; accumulates E[r] and KL(pi || pi_ref).
void accumulate_context(const MatrixXd& features, const VectorXd& theta,
                        const VectorXd& theta_ref, const VectorXd& rewards,
                        double& expected_reward, double& kl) {
  const VectorXd lp = log_softmax(features.transpose() * theta);
  const VectorXd lp_ref = log_softmax(features.transpose() * theta_ref);
  const VectorXd p = lp.array().exp();
  expected_reward += p.dot(rewards);
  kl += p.dot((lp - lp_ref));
}

}  // namespace

ObjectiveReport j_beta(const LogLinearPolicy& policy, const BanditInstance& inst,
                       const LogLinearPolicy& ref, double beta, int n_contexts,
                       Rng& rng) {
  if (beta <= 0.0) throw std::invalid_argument("j_beta: beta must be positive");
  if (n_contexts < 1) throw std::invalid_argument("j_beta: n_contexts >= 1");
  double er = 0.0;
  double kl = 0.0;
  for (int i = 0; i < n_contexts; ++i) {
    const VectorXd x = sample_context(inst.context_dim, rng);
    const MatrixXd features = phi_all(inst.fmap, x);
    const VectorXd r = features.transpose() * inst.theta_star;
    accumulate_context(features, policy.theta, ref.theta, r, er, kl);
  }
  ObjectiveReport rep;
  rep.n_eval_contexts = n_contexts;
  rep.beta = beta;
  rep.expected_reward = er / n_contexts;
  rep.kl_to_ref = std::max(0.0, kl / n_contexts);
  rep.j_beta = rep.expected_reward - beta * rep.kl_to_ref;
  return rep;
}

EvalSet make_eval_set(const BanditInstance& inst, const LogLinearPolicy& ref,
                      int n_contexts, std::uint64_t eval_seed) {
  EvalSet ev;
  ev.num_responses = inst.num_responses;
  ev.contexts.reserve(n_contexts);
  const int d = inst.feat_dim();
  const int ny = inst.num_responses;
  ev.features.resize(d, static_cast<Eigen::Index>(n_contexts) * ny);
  ev.rewards.resize(ny, n_contexts);
  ev.ref_logp.resize(ny, n_contexts);
  Rng rng(eval_seed);
  for (int i = 0; i < n_contexts; ++i) {
    VectorXd x = sample_context(inst.context_dim, rng);
    MatrixXd features = phi_all(inst.fmap, x);
    ev.features.middleCols(static_cast<Eigen::Index>(i) * ny, ny) = features;
    ev.rewards.col(i) = features.transpose() * inst.theta_star;
    ev.ref_logp.col(i) = log_softmax(features.transpose() * ref.theta);
    ev.contexts.push_back(std::move(x));
  }
  return ev;
}

ObjectiveReport eval_j_beta(const EvalSet& ev, const LogLinearPolicy& policy,
                            double beta) {
  const int n = ev.n_contexts();
  const int ny = ev.num_responses;
  const VectorXd all_logits = ev.features.transpose() * policy.theta;
  double er = 0.0;
  double kl = 0.0;
  for (int i = 0; i < n; ++i) {
    const VectorXd lp =
        log_softmax(all_logits.segment(static_cast<Eigen::Index>(i) * ny, ny));
    const VectorXd p = lp.array().exp();
    er += p.dot(ev.rewards.col(i));
    kl += p.dot(lp - ev.ref_logp.col(i));
  }
  ObjectiveReport rep;
  rep.n_eval_contexts = n;
  rep.beta = beta;
  rep.expected_reward = er / n;
  rep.kl_to_ref = std::max(0.0, kl / n);
  rep.j_beta = rep.expected_reward - beta * rep.kl_to_ref;
  return rep;
}

double measure_vmax(const std::vector<LogLinearPolicy>& policies,
                    const BanditInstance& inst, const LogLinearPolicy& ref,
                    double beta, const std::vector<VectorXd>& probe_contexts) {
  if (probe_contexts.empty()) {
    throw std::invalid_argument("measure_vmax: empty probe set");
  }
  double worst = 0.0;
  for (const VectorXd& x : probe_contexts) {
    const MatrixXd features = phi_all(inst.fmap, x);
    const VectorXd lp_ref = log_softmax(features.transpose() * ref.theta);
    for (const LogLinearPolicy& pi : policies) {
      const VectorXd lp = log_softmax(features.transpose() * pi.theta);
      worst = std::max(worst, (lp - lp_ref).cwiseAbs().maxCoeff());
    }
  }
  return beta * worst;
}

LogLinearPolicy optimal_policy(const BanditInstance& inst,
                               const LogLinearPolicy& ref, double beta) {
  if (beta <= 0.0) {
    throw std::invalid_argument("optimal_policy: beta must be positive");
  }
  return LogLinearPolicy{ref.theta + inst.theta_star / beta};
}

// --- token-level MDP policies -------------------------------------------------

LogLinearPolicy token_reference_policy_for(const TokenMDPInstance& mdp) {
  Rng rng = Rng(mdp.seed).substream(3);
  VectorXd theta(mdp.step_map.feat_dim);
  for (int i = 0; i < theta.size(); ++i) theta(i) = rng.uniform01();
  return LogLinearPolicy{theta};
}

VectorXd token_action_log_probs(const TokenMDPInstance& mdp,
                                const VectorXd& theta, int s1,
                                const std::vector<int>& prefix) {
  const MatrixXd step = phi_all(mdp.step_map, encode_state(mdp, s1, prefix));
  return log_softmax(step.transpose() * theta);
}

double token_traj_log_prob(const TokenMDPInstance& mdp, const VectorXd& theta,
                           int s1, const std::vector<int>& tokens) {
  double lp = 0.0;
  std::vector<int> prefix;
  prefix.reserve(tokens.size());
  for (int a : tokens) {
    lp += token_action_log_probs(mdp, theta, s1, prefix)(a);
    prefix.push_back(a);
  }
  return lp;
}

SoftTokenPolicy soft_optimal_token_policy(const TokenMDPInstance& mdp,
                                          const VectorXd& theta_ref,
                                          double beta, int s1) {
  if (beta <= 0.0) {
    throw std::invalid_argument("soft_optimal_token_policy: beta must be positive");
  }
  if (mdp.num_trajectories() > 100000) {
    throw std::invalid_argument("soft_optimal_token_policy: A^H budget exceeded");
  }
  SoftTokenPolicy out;
  out.s1 = s1;
  out.probs.resize(mdp.horizon);
  const int A = mdp.vocab_size;
  std::size_t level_size = 1;
  for (int h = 0; h < mdp.horizon; ++h) {
    out.probs[h].resize(level_size);
    level_size *= static_cast<std::size_t>(A);
  }

  std::vector<int> prefix;
  // Returns V_h(s) for the state identified by (depth, prefix).
  auto backward = [&](auto&& self, int depth, std::size_t index) -> double {
    if (depth == mdp.horizon) return 0.0;
    const MatrixXd step = phi_all(mdp.step_map, encode_state(mdp, s1, prefix));
    const VectorXd lp_ref = log_softmax(step.transpose() * theta_ref);
    VectorXd tilted(A);
    for (int a = 0; a < A; ++a) {
      const double r_sa = mdp.nu.dot(step.col(a));
      prefix.push_back(a);
      const double v_next = self(self, depth + 1, index * A + a);
      prefix.pop_back();
      tilted(a) = lp_ref(a) + (r_sa + v_next) / beta;
    }
    const double lse = log_sum_exp(tilted);
    out.probs[depth][index] = (tilted.array() - lse).exp();
    return beta * lse;
  };
  out.v1 = backward(backward, 0, 0);
  return out;
}

double soft_token_traj_log_prob(const SoftTokenPolicy& policy, int vocab_size,
                                const std::vector<int>& tokens) {
  double lp = 0.0;
  std::size_t index = 0;
  for (std::size_t h = 0; h < tokens.size(); ++h) {
    lp += std::log(policy.probs[h][index](tokens[h]));
    index = index * static_cast<std::size_t>(vocab_size) +
            static_cast<std::size_t>(tokens[h]);
  }
  return lp;
}

}  // namespace hpo
