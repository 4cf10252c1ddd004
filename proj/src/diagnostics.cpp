#include "hpo/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpo {

MatrixXd lambda_off_from_dphi(const MatrixXd& dphi) {
  if (dphi.cols() == 0) {
    throw std::invalid_argument("lambda_off: empty dataset");
  }
  MatrixXd m = MatrixXd::Zero(dphi.rows(), dphi.rows());
  m.selfadjointView<Eigen::Lower>().rankUpdate(dphi, 1.0 / dphi.cols());
  return m.selfadjointView<Eigen::Lower>();
}

MatrixXd lambda_off(const OfflineDataset& dataset, const BanditInstance& inst) {
  if (dataset.empty()) throw std::invalid_argument("lambda_off: empty dataset");
  MatrixXd dphi(inst.feat_dim(), static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const MatrixXd features = phi_all(inst.fmap, dataset[i].x);
    dphi.col(i) =
        features.col(dataset[i].y_plus) - features.col(dataset[i].y_minus);
  }
  return lambda_off_from_dphi(dphi);
}

EigSym eig_sym(const MatrixXd& m) {
  if (m.rows() != m.cols() ||
      (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("eig_sym: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_sym: eigendecomposition failed");
  }
  return EigSym{solver.eigenvalues(), solver.eigenvectors()};
}

int d_hyb_count(const VectorXd& lambda_tilde_eigenvalues, int t_rounds,
                double threshold_c) {
  const double cut = threshold_c / static_cast<double>(t_rounds);
  int count = 0;
  for (Eigen::Index i = 0; i < lambda_tilde_eigenvalues.size(); ++i) {
    if (lambda_tilde_eigenvalues(i) <= cut) ++count;
  }
  return count;
}

double concentrability(const MatrixXd& lambda, const VectorXd& nu,
                       double rank_tol) {
  if (std::abs(nu.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("concentrability: nu_star must be a unit vector");
  }
  const EigSym es = eig_sym(lambda);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double comp = es.vectors.col(i).dot(nu);
    if (es.values(i) < rank_tol) {
      // Mass outside the range of Lambda_off: coverage is unbounded.
      if (std::abs(comp) > 1e-8) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    acc += comp * comp / es.values(i);
  }
  return std::sqrt(acc);
}

VectorXd nu_star(const BanditInstance& inst, const LogLinearPolicy& policy,
                 const std::vector<VectorXd>& eval_contexts) {
  if (eval_contexts.empty()) {
    throw std::invalid_argument("nu_star: empty context set");
  }
  VectorXd mean = VectorXd::Zero(inst.feat_dim());
  for (const VectorXd& x : eval_contexts) {
    const MatrixXd features = phi_all(inst.fmap, x);
    mean += features * softmax(features.transpose() * policy.theta);
  }
  mean /= static_cast<double>(eval_contexts.size());
  const double norm = mean.norm();
  if (norm < 1e-12) {
    throw std::runtime_error("nu_star: feature expectation vanishes");
  }
  return mean / norm;
}

double sec_bound_linear(const VectorXd& lambda_tilde_eigenvalues, int t_rounds,
                        int gamma) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lambda_tilde_eigenvalues.size(); ++i) {
    const double lam = lambda_tilde_eigenvalues(i);
    if (lam <= 0.0) {
      throw std::invalid_argument("sec_bound_linear: eigenvalues must be positive");
    }
    acc += std::log(1.0 + 4.0 * static_cast<double>(t_rounds) /
                              (static_cast<double>(gamma) * lam));
  }
  return 2.0 * acc;
}

SecEstimate sec_empirical(const std::vector<LogLinearPolicy>& policies,
                          const std::vector<LogLinearPolicy>& samplers,
                          const BanditInstance& inst, const LogLinearPolicy& ref,
                          double beta, int gamma, const OfflineDataset& dataset,
                          int mc_samples, Rng& rng) {
  const int T = static_cast<int>(policies.size());
  if (T < 2) throw std::invalid_argument("sec_empirical: need at least 2 policies");
  if (static_cast<int>(samplers.size()) < T - 1) {
    throw std::invalid_argument("sec_empirical: sampler sequence too short");
  }
  if (mc_samples < 100) {
    throw std::invalid_argument("sec_empirical: mc_samples < 100 (variance guard)");
  }

  const int ny = inst.num_responses;
  std::vector<VectorXd> contexts;
  contexts.reserve(mc_samples);
  for (int j = 0; j < mc_samples; ++j) {
    contexts.push_back(sample_context(inst.context_dim, rng));
  }

  // Cache per-context response log-probs for every policy in the sequence,
  // the reference and the rewards.
  std::vector<MatrixXd> lp_pi(T), p_pi(T), p_samp(T);
  MatrixXd lp_ref_all(ny, mc_samples), rewards_all(ny, mc_samples);
  std::vector<MatrixXd> features_all(mc_samples);
  for (int j = 0; j < mc_samples; ++j) {
    features_all[j] = phi_all(inst.fmap, contexts[j]);
    lp_ref_all.col(j) = log_softmax(features_all[j].transpose() * ref.theta);
    rewards_all.col(j) = features_all[j].transpose() * inst.theta_star;
  }
  for (int i = 0; i < T; ++i) {
    lp_pi[i].resize(ny, mc_samples);
    p_pi[i].resize(ny, mc_samples);
    p_samp[i].resize(ny, mc_samples);
    for (int j = 0; j < mc_samples; ++j) {
      lp_pi[i].col(j) =
          log_softmax(features_all[j].transpose() * policies[i].theta);
      p_pi[i].col(j) = lp_pi[i].col(j).array().exp();
      p_samp[i].col(j) =
          softmax(features_all[j].transpose() * samplers[i].theta);
    }
  }

  std::vector<LogLinearPolicy> all_policies = policies;
  all_policies.insert(all_policies.end(), samplers.begin(), samplers.end());
  const double v_max =
      measure_vmax(all_policies, inst, ref, beta, contexts);
  const double v_sq = v_max * v_max;

  double total = 0.0;
  double var_total = 0.0;
  for (int t = 2; t <= T; ++t) {
    const int ti = t - 1;  // 0-based index of pi^(t)
    // Per-context first moment of g under pi^(t) x pi~^(t-1) and mixture
    // second moment under mu^(t).
    double num_sum = 0.0, num_sq_sum = 0.0;
    double den_sum = 0.0, den_sq_sum = 0.0;
    for (int j = 0; j < mc_samples; ++j) {
      const VectorXd h = beta * (lp_pi[ti].col(j) - lp_ref_all.col(j)) -
                         rewards_all.col(j);
      const double x_j =
          p_pi[ti].col(j).dot(h) - p_samp[ti - 1].col(j).dot(h);
      num_sum += x_j;
      num_sq_sum += x_j * x_j;

      const VectorXd h2 = h.array().square();
      double mix = 0.0;
      for (int i = 0; i < t - 1; ++i) {
        const double e1 = p_pi[i].col(j).dot(h);
        const double e1s = p_samp[i].col(j).dot(h);
        mix += p_pi[i].col(j).dot(h2) + p_samp[i].col(j).dot(h2) -
               2.0 * e1 * e1s;
      }
      mix /= static_cast<double>(t - 1);
      den_sum += mix;
      den_sq_sum += mix * mix;
    }
    const double n = static_cast<double>(mc_samples);
    const double num_mean = num_sum / n;
    const double den_mean = den_sum / n;
    const double coff = c_off(policies[ti], ref, inst, beta, dataset);
    const double den_full =
        static_cast<double>(t - 1) * (den_mean + static_cast<double>(gamma) * coff);
    const double den = std::max(v_sq, den_full);
    const double term = num_mean * num_mean / den;
    total += term;

    // Delta-method error propagation through (mean^2)/den.
    const double var_num_mean = (num_sq_sum / n - num_mean * num_mean) / n;
    const double var_den_mean = (den_sq_sum / n - den_mean * den_mean) / n;
    double var_term = 4.0 * num_mean * num_mean * var_num_mean / (den * den);
    if (den_full > v_sq) {
      const double dden = static_cast<double>(t - 1);
      var_term += term * term * (dden * dden * var_den_mean) / (den * den);
    }
    var_total += var_term;
  }

  SecEstimate out;
  out.value = total;
  out.std_error = std::sqrt(var_total);
  out.v_max = v_max;
  return out;
}

double theorem1_rhs(double sec_value, double v_max, double r_max, int gamma,
                    int t_rounds, double log_pi_proxy, double delta) {
  if (sec_value <= 0.0 || v_max <= 0.0 || r_max <= 0.0 || t_rounds < 1 ||
      gamma < 0 || log_pi_proxy <= 0.0 || delta <= 0.0) {
    throw std::invalid_argument("theorem1_rhs: arguments must be positive");
  }
  const double t = static_cast<double>(t_rounds);
  const double front = (v_max + r_max) * std::exp(2.0 * r_max);
  const double inner = (1.0 + static_cast<double>(gamma) / t) * sec_value *
                       (log_pi_proxy + std::log(t / delta)) * std::log(t) / t;
  return front * std::sqrt(inner);
}

RegretCurves regret_accounting(const RunResult& run, double optimal_j_beta,
                               int n_off_offset) {
  RegretCurves curves;
  curves.suboptimality.reserve(run.per_iter.size());
  curves.cum_regret.reserve(run.per_iter.size());
  curves.total_samples.reserve(run.per_iter.size());
  double cum = 0.0;
  for (const IterStat& s : run.per_iter) {
    const double sub = optimal_j_beta - s.j_beta;
    curves.suboptimality.push_back(sub);
    cum += std::max(0.0, sub);
    curves.cum_regret.push_back(cum);
    curves.total_samples.push_back(static_cast<long>(s.t) + n_off_offset);
  }
  return curves;
}

CoverageReport make_coverage_report(const BanditInstance& inst,
                                    const LogLinearPolicy& ref,
                                    const OfflineDataset& dataset, int t_rounds,
                                    int gamma, double v_max, double beta,
                                    double threshold_c, int n_probe_contexts,
                                    std::uint64_t probe_seed) {
  if (gamma <= 0) {
    throw std::invalid_argument(
        "coverage report: lambda_tilde = lambda_off + (v_max^2/gamma) I is "
        "undefined at gamma = 0");
  }
  CoverageReport rep;
  rep.gamma = gamma;
  rep.t_rounds = t_rounds;
  rep.v_max = v_max;
  rep.threshold_c = threshold_c > 0.0 ? threshold_c : 4.0 * v_max * v_max;

  rep.lambda_off = lambda_off(dataset, inst);
  rep.lambda_tilde =
      rep.lambda_off +
      (v_max * v_max / static_cast<double>(gamma)) *
          MatrixXd::Identity(inst.feat_dim(), inst.feat_dim());
  rep.eigenvalues = eig_sym(rep.lambda_tilde).values;
  rep.d_hyb = d_hyb_count(rep.eigenvalues, t_rounds, rep.threshold_c);

  Rng probe_rng(probe_seed);
  std::vector<VectorXd> probe;
  probe.reserve(n_probe_contexts);
  for (int i = 0; i < n_probe_contexts; ++i) {
    probe.push_back(sample_context(inst.context_dim, probe_rng));
  }
  const LogLinearPolicy opt = optimal_policy(inst, ref, beta);
  const VectorXd nu = nu_star(inst, opt, probe);
  const double lam_max = eig_sym(rep.lambda_off).values.maxCoeff();
  rep.c_star = concentrability(rep.lambda_off, nu, 1e-10 * std::max(lam_max, 1e-300));
  rep.c_star_infinite = std::isinf(rep.c_star);

  rep.sec_bound = sec_bound_linear(rep.eigenvalues, t_rounds, gamma);
  rep.theorem1_bound = theorem1_rhs(rep.sec_bound, v_max, inst.r_max, gamma,
                                    t_rounds, inst.feat_dim(), 0.1);
  return rep;
}

}  // namespace hpo
