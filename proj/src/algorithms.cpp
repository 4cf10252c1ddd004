#include "hpo/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <unordered_map>

namespace hpo {

namespace {

std::uint64_t hash_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return hash_combine(h, bits);
}

// One lazily materialized optimism-set entry: context features and the
// response drawn from the sampler policy.
struct OptEntry {
  MatrixXd features;
  int y = 0;
};

void fill_regret(std::vector<IterStat>& per_iter, double optimal_j) {
  double cum = 0.0;
  for (IterStat& s : per_iter) {
    s.suboptimality = optimal_j - s.j_beta;
    cum += std::max(0.0, s.suboptimality);
    s.cum_regret = cum;
  }
}

}  // namespace

void HPOConfig::validate() const {
  if (alpha < 0.0) throw std::invalid_argument("config: alpha must be >= 0");
  if (beta <= 0.0) throw std::invalid_argument("config: beta must be > 0");
  if (gamma < 0) throw std::invalid_argument("config: gamma must be >= 0");
  if (t_rounds < 1) throw std::invalid_argument("config: t_rounds must be >= 1");
  if (inner_steps < 1) throw std::invalid_argument("config: inner_steps must be >= 1");
  if (eval_contexts < 1) throw std::invalid_argument("config: eval_contexts must be >= 1");
  if (minibatch < 1) throw std::invalid_argument("config: minibatch must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("config: lr must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("config: weight_decay must be >= 0");
}

std::uint64_t HPOConfig::hash() const {
  std::uint64_t h = 0x48504f636667ULL;
  h = hash_double(h, alpha);
  h = hash_double(h, beta);
  h = hash_combine(h, static_cast<std::uint64_t>(gamma));
  h = hash_combine(h, static_cast<std::uint64_t>(t_rounds));
  h = hash_combine(h, static_cast<std::uint64_t>(sampler));
  h = hash_combine(h, static_cast<std::uint64_t>(inner_steps));
  h = hash_combine(h, static_cast<std::uint64_t>(eval_contexts));
  h = hash_combine(h, seed);
  h = hash_combine(h, static_cast<std::uint64_t>(minibatch));
  h = hash_double(h, lr);
  h = hash_double(h, weight_decay);
  h = hash_combine(h, (warm_start ? 1u : 0u) | (carry_moments ? 2u : 0u) |
                          (cumulative_opt ? 4u : 0u) |
                          (opt_norm == OptimismNorm::sum ? 8u : 0u));
  return h;
}

Evaluator make_evaluator(const BanditInstance& inst, const LogLinearPolicy& ref,
                         double beta, int n_contexts, std::uint64_t eval_seed) {
  Evaluator ev;
  ev.eval = make_eval_set(inst, ref, n_contexts, eval_seed);
  ev.beta = beta;
  ev.optimal_j = eval_j_beta(ev.eval, optimal_policy(inst, ref, beta), beta).j_beta;
  return ev;
}

RunResult run_hpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                  const OfflineDataset& offline, const HPOConfig& cfg,
                  const Evaluator& ev, Rng& rng) {
  cfg.validate();
  if (cfg.gamma > 0 && offline.empty()) {
    throw std::invalid_argument("run_hpo: gamma > 0 requires a nonempty offline dataset");
  }
  const auto t_start = std::chrono::steady_clock::now();
  const int d = inst.feat_dim();
  const int gamma = cfg.gamma;
  const std::size_t n_off = offline.size();

  // Feature differences of offline records, one column per record.
  MatrixXd dphi_off(d, static_cast<Eigen::Index>(n_off));
  for (std::size_t i = 0; i < n_off; ++i) {
    const MatrixXd features = phi_all(inst.fmap, offline[i].x);
    dphi_off.col(i) = features.col(offline[i].y_plus) - features.col(offline[i].y_minus);
  }

  RunResult res;
  res.config_hash = cfg.hash();
  res.per_iter.reserve(cfg.t_rounds);

  std::vector<LogLinearPolicy> past;  // pi^(1), pi^(2), ...
  past.reserve(cfg.t_rounds + 1);
  past.push_back(ref);

  VectorXd theta = ref.theta;              // pi^(t)
  VectorXd sampler_theta = ref.theta;      // pi~^(t)
  MatrixXd dphi_on(d, cfg.t_rounds);       // online buffer feature differences
  std::vector<int> off_pick(std::max(gamma, 1));

  AdamW opt;
  opt.lr = cfg.lr;
  opt.weight_decay = cfg.weight_decay;
  opt.reset(d);

  // Lazily materialized optimism entries. In the literal mode the optimism
  // set is fresh per iteration; in cumulative mode it persists and grows.
  std::unordered_map<std::uint64_t, OptEntry> opt_cache;
  std::vector<OptEntry> opt_cumulative;

  for (int t = 1; t <= cfg.t_rounds; ++t) {
    // J_beta of the policy in force this round, on the frozen context set.
    IterStat stat;
    stat.t = t;
    stat.j_beta = eval_j_beta(ev.eval, LogLinearPolicy{theta}, cfg.beta).j_beta;

    // Generate response pair and label it (Algorithm lines 4-6).
    const VectorXd x = sample_context(inst.context_dim, rng);
    const MatrixXd features = phi_all(inst.fmap, x);
    const VectorXd rewards = features.transpose() * inst.theta_star;
    const int y = sample_categorical(softmax(features.transpose() * theta), rng);
    const int y_tilde =
        sample_categorical(softmax(features.transpose() * sampler_theta), rng);
    const bool first_wins = rng.bernoulli(btl_prob(rewards(y), rewards(y_tilde)));
    const int y_plus = first_wins ? y : y_tilde;
    const int y_minus = first_wins ? y_tilde : y;
    dphi_on.col(t - 1) = features.col(y_plus) - features.col(y_minus);

    // Offline minibatch: gamma picks uniformly with replacement (line 7).
    for (int j = 0; j < gamma; ++j) {
      off_pick[j] = static_cast<int>(rng.uniform_int(n_off));
    }

    const int n_hyb = t + gamma;
    const int n_opt = t + gamma;
    if (!cfg.cumulative_opt) opt_cache.clear();
    if (cfg.cumulative_opt) {
      // XPO-style running set: one fresh draw from the current sampler.
      const VectorXd xo = sample_context(inst.context_dim, rng);
      MatrixXd fo = phi_all(inst.fmap, xo);
      const int yo =
          sample_categorical(softmax(fo.transpose() * sampler_theta), rng);
      opt_cumulative.push_back(OptEntry{std::move(fo), yo});
    }

    auto opt_entry = [&](std::uint64_t idx) -> const OptEntry& {
      auto it = opt_cache.find(idx);
      if (it == opt_cache.end()) {
        const VectorXd xo = sample_context(inst.context_dim, rng);
        MatrixXd fo = phi_all(inst.fmap, xo);
        const int yo =
            sample_categorical(softmax(fo.transpose() * sampler_theta), rng);
        it = opt_cache.emplace(idx, OptEntry{std::move(fo), yo}).first;
      }
      return it->second;
    };

    // Inner minimization of the regularized objective (line 10).
    VectorXd theta_inner = cfg.warm_start ? theta : ref.theta;
    if (!cfg.carry_moments) opt.reset(d);
    double last_loss = 0.0;
    MatrixXd batch_dphi(d, cfg.minibatch);
    try {
      for (int k = 0; k < cfg.inner_steps; ++k) {
        VectorXd grad = VectorXd::Zero(d);
        for (int j = 0; j < cfg.minibatch; ++j) {
          const std::uint64_t idx = rng.uniform_int(n_hyb);
          batch_dphi.col(j) = idx < static_cast<std::uint64_t>(t)
                                  ? dphi_on.col(idx)
                                  : dphi_off.col(off_pick[idx - t]);
        }
        double loss =
            dpo_loss_from_dphi(theta_inner, ref.theta, batch_dphi, cfg.beta);
        dpo_grad_from_dphi(theta_inner, ref.theta, batch_dphi, cfg.beta, grad);
        if (cfg.alpha > 0.0) {
          const std::size_t pool =
              cfg.cumulative_opt ? opt_cumulative.size()
                                 : static_cast<std::size_t>(n_opt);
          const double weight = cfg.opt_norm == OptimismNorm::mean
                                    ? cfg.alpha / static_cast<double>(pool)
                                    : cfg.alpha;
          for (int j = 0; j < cfg.minibatch; ++j) {
            const OptEntry& e =
                cfg.cumulative_opt
                    ? opt_cumulative[rng.uniform_int(opt_cumulative.size())]
                    : opt_entry(rng.uniform_int(n_opt));
            optimism_accumulate(theta_inner, e.features, e.y, weight, loss, grad);
          }
        }
        adamw_step(opt, theta_inner, grad);
        last_loss = loss;
      }
    } catch (const std::runtime_error& e) {
      throw RunError(std::string("run_hpo: inner minimization diverged: ") + e.what(), t);
    }
    if (!std::isfinite(last_loss) || !theta_inner.allFinite()) {
      throw RunError("run_hpo: inner minimization diverged (non-finite loss)", t);
    }
    stat.loss = last_loss;
    res.per_iter.push_back(stat);

    theta = theta_inner;  // pi^(t+1)
    past.push_back(LogLinearPolicy{theta});

    // Sampler update (line 11).
    sampler_theta = select_sampler(cfg.sampler, ref, past, rng).theta;
  }

  fill_regret(res.per_iter, ev.optimal_j);

  // Return argmax_t J_beta(pi^(t)) over t = 1..T (line 13).
  int best = 0;
  for (int i = 1; i < static_cast<int>(res.per_iter.size()); ++i) {
    if (res.per_iter[i].j_beta > res.per_iter[best].j_beta) best = i;
  }
  res.argmax_t = best + 1;
  res.returned_policy = past[best];
  res.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  return res;
}

RunResult run_xpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                  const HPOConfig& cfg, const Evaluator& ev, Rng& rng) {
  HPOConfig c = cfg;
  c.gamma = 0;
  return run_hpo(inst, ref, OfflineDataset{}, c, ev, rng);
}

RunResult run_online_dpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                         const HPOConfig& cfg, const Evaluator& ev, Rng& rng) {
  HPOConfig c = cfg;
  c.gamma = 0;
  c.alpha = 0.0;
  return run_hpo(inst, ref, OfflineDataset{}, c, ev, rng);
}

RunResult run_offline_dpo(const BanditInstance& inst, const LogLinearPolicy& ref,
                          const OfflineDataset& offline,
                          const OfflineDPOConfig& cfg, const Evaluator& ev,
                          Rng& rng) {
  if (offline.empty()) {
    throw std::invalid_argument("run_offline_dpo: empty dataset");
  }
  if (cfg.steps < 0) throw std::invalid_argument("run_offline_dpo: steps >= 0");
  const auto t_start = std::chrono::steady_clock::now();
  const int d = inst.feat_dim();
  const std::size_t n = offline.size();

  MatrixXd dphi(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const MatrixXd features = phi_all(inst.fmap, offline[i].x);
    dphi.col(i) = features.col(offline[i].y_plus) - features.col(offline[i].y_minus);
  }

  RunResult res;
  std::vector<LogLinearPolicy> checkpoints;
  VectorXd theta = ref.theta;

  auto checkpoint = [&](int step, double loss) {
    IterStat s;
    s.t = step;
    s.j_beta = eval_j_beta(ev.eval, LogLinearPolicy{theta}, cfg.beta).j_beta;
    s.loss = loss;
    res.per_iter.push_back(s);
    checkpoints.push_back(LogLinearPolicy{theta});
  };

  if (cfg.steps == 0) {
    checkpoint(0, 0.0);
  } else {
    AdamW opt;
    opt.lr = cfg.lr;
    opt.weight_decay = cfg.weight_decay;
    opt.reset(d);
    const int mb = cfg.minibatch > 0 ? cfg.minibatch : static_cast<int>(n);
    MatrixXd batch(d, mb);
    for (int step = 1; step <= cfg.steps; ++step) {
      if (cfg.minibatch > 0) {
        for (int j = 0; j < mb; ++j) {
          batch.col(j) = dphi.col(rng.uniform_int(n));
        }
      } else {
        batch = dphi;
      }
      VectorXd grad = VectorXd::Zero(d);
      double loss = dpo_loss_from_dphi(theta, ref.theta, batch, cfg.beta);
      dpo_grad_from_dphi(theta, ref.theta, batch, cfg.beta, grad);
      if (cfg.pessimism_alpha > 0.0) {
        // Pessimism variant (sign -1): anchor mass on reference draws.
        for (int j = 0; j < mb; ++j) {
          const VectorXd xo = sample_context(inst.context_dim, rng);
          const MatrixXd fo = phi_all(inst.fmap, xo);
          const int yo = sample_categorical(softmax(fo.transpose() * ref.theta), rng);
          optimism_accumulate(theta, fo, yo, -cfg.pessimism_alpha, loss, grad);
        }
      }
      try {
        adamw_step(opt, theta, grad);
      } catch (const std::runtime_error& e) {
        throw RunError(std::string("run_offline_dpo: diverged: ") + e.what(), step);
      }
      if (!std::isfinite(loss) || !theta.allFinite()) {
        throw RunError("run_offline_dpo: minimization diverged", step);
      }
      if (step % cfg.eval_every == 0 || step == cfg.steps) checkpoint(step, loss);
    }
  }

  fill_regret(res.per_iter, ev.optimal_j);
  for (IterStat& s : res.per_iter) s.cum_regret = 0.0;  // no online interaction

  int best = 0;
  for (int i = 1; i < static_cast<int>(res.per_iter.size()); ++i) {
    if (res.per_iter[i].j_beta > res.per_iter[best].j_beta) best = i;
  }
  res.argmax_t = res.per_iter[best].t;
  res.returned_policy = checkpoints[best];
  res.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  return res;
}

const LogLinearPolicy& select_sampler(SamplerStrategy strategy,
                                      const LogLinearPolicy& ref,
                                      const std::vector<LogLinearPolicy>& past,
                                      Rng& rng) {
  if (strategy == SamplerStrategy::fixed_ref) return ref;
  if (past.empty()) {
    throw std::invalid_argument("select_sampler: uniform_past needs history");
  }
  return past[rng.uniform_int(past.size())];
}

double alpha_schedule(double beta, double v_max, double r_max, int t_rounds,
                      int gamma, double sec_estimate, double log_pi_proxy,
                      double delta) {
  if (beta <= 0.0 || v_max <= 0.0 || r_max <= 0.0 || t_rounds < 1 ||
      gamma < 0 || sec_estimate <= 0.0 || log_pi_proxy <= 0.0 || delta <= 0.0) {
    throw std::invalid_argument("alpha_schedule: arguments must be positive");
  }
  const double t = static_cast<double>(t_rounds);
  const double front = beta / ((v_max + r_max) * std::exp(2.0 * r_max));
  const double num = (log_pi_proxy + std::log(t / delta)) * std::log(t);
  const double den = (t + static_cast<double>(gamma)) * sec_estimate;
  return front * std::sqrt(num / den);
}

}  // namespace hpo
