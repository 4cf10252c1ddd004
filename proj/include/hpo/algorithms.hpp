#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hpo/objective.hpp"
#include "hpo/optimizer.hpp"
#include "hpo/policy.hpp"

namespace hpo {

enum class SamplerStrategy { fixed_ref, uniform_past };

// Weighting of the optimism regularizer in the inner minimization.
// `mean` treats alpha as the coefficient of the average log-likelihood over
// the optimism set (the convention the experimental alpha grid of {1, 10}
// is calibrated to; equivalent to the sum form with alpha/(t+gamma), the
// scale the theoretical schedule prescribes). `sum` weights the raw sum.
enum class OptimismNorm { mean, sum };

struct HPOConfig {
  double alpha = 1.0;
  double beta = 0.1;
  int gamma = 0;        // offline pairs resampled per iteration
  int t_rounds = 100;   // online exploration budget T
  SamplerStrategy sampler = SamplerStrategy::fixed_ref;
  int inner_steps = 20;
  int eval_contexts = 512;
  std::uint64_t seed = 1;
  int minibatch = 5;
  double lr = 0.01;
  double weight_decay = 0.01;
  // Resolved choices, exposed as flags:
  OptimismNorm opt_norm = OptimismNorm::mean;
  bool warm_start = true;       // inner init from previous iterate vs theta_ref
  bool carry_moments = false;   // keep optimizer moments across iterations
  bool cumulative_opt = false;  // XPO-style running optimism set instead of
                                // fresh t+gamma samples per iteration

  void validate() const;
  std::uint64_t hash() const;
};

struct IterStat {
  int t = 0;
  double j_beta = 0.0;
  double suboptimality = 0.0;
  double cum_regret = 0.0;
  double loss = 0.0;
};

struct RunResult {
  std::vector<IterStat> per_iter;
  LogLinearPolicy returned_policy;  // argmax_t J_beta(pi^(t))
  int argmax_t = 0;
  std::int64_t wall_ms = 0;
  std::uint64_t config_hash = 0;
};

// Thrown when an inner minimization diverges (non-finite loss or iterate).
struct RunError : std::runtime_error {
  int t;
  RunError(const std::string& what, int t_) : std::runtime_error(what), t(t_) {}
};

// Frozen evaluation bundle shared by every algorithm and seed arm of an
// experiment so that J_beta comparisons are paired.
struct Evaluator {
  EvalSet eval;
  double beta = 0.0;
  double optimal_j = 0.0;  // J_beta(pi*_beta) on the frozen context set
};

Evaluator make_evaluator(const BanditInstance& inst, const LogLinearPolicy& ref,
                         double beta, int n_contexts, std::uint64_t eval_seed);

// Algorithm: hybrid preference optimization. Per round: sample a context,
// draw one response from the current policy and one from the sampler policy,
// label via the BTL oracle, extend the online buffer, resample gamma offline
// pairs with replacement, build the optimism set of t+gamma sampler draws,
// and run inner_steps minibatch optimizer steps on the regularized DPO
// objective. Returns the J_beta-argmax policy over pi^(1..T).
RunResult run_hpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                  const OfflineDataset& offline, const HPOConfig& cfg,
                  const Evaluator& ev, Rng& rng);

// Pure-online special case: identical code path with gamma forced to 0.
RunResult run_xpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                  const HPOConfig& cfg, const Evaluator& ev, Rng& rng);

// Online DPO: gamma = 0 and no optimism regularization.
RunResult run_online_dpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                         const HPOConfig& cfg, const Evaluator& ev, Rng& rng);

struct OfflineDPOConfig {
  int steps = 1000;
  double beta = 0.1;
  int minibatch = 5;  // 0 = full batch
  double pessimism_alpha = 0.0;
  double lr = 0.01;
  double weight_decay = 0.01;
  int eval_every = 50;
  std::uint64_t seed = 1;
};

RunResult run_offline_dpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                          const OfflineDataset& offline,
                          const OfflineDPOConfig& cfg, const Evaluator& ev,
                          Rng& rng);

const LogLinearPolicy& select_sampler(SamplerStrategy strategy,
                                      const LogLinearPolicy& ref,
                                      const std::vector<LogLinearPolicy>& past,
                                      Rng& rng);

// Theoretical schedule with absolute constant c = 1:
// alpha = beta / ((V_max + R_max) e^{2 R_max})
//         * sqrt((log_pi_proxy + log(T/delta)) * log(T) / ((T + gamma) * SEC)).
double alpha_schedule(double beta, double v_max, double r_max, int t_rounds,
                      int gamma, double sec_estimate, double log_pi_proxy,
                      double delta);

}  // namespace hpo
