#pragma once

#include <vector>

#include "hpo/algorithms.hpp"
#include "hpo/objective.hpp"

namespace hpo {

struct CoverageReport {
  MatrixXd lambda_off;
  MatrixXd lambda_tilde;   // lambda_off + (v_max^2 / gamma) I
  VectorXd eigenvalues;    // of lambda_tilde, ascending
  int d_hyb = 0;
  double c_star = 0.0;
  bool c_star_infinite = false;
  double threshold_c = 0.0;
  double v_max = 0.0;
  int gamma = 0;
  int t_rounds = 0;
  double sec_bound = 0.0;
  double theorem1_bound = 0.0;
};

// Empirical covariance of offline feature differences:
// (1/N) sum (phi(y+) - phi(y-))(phi(y+) - phi(y-))^T.
MatrixXd lambda_off(const OfflineDataset& dataset, const BanditInstance& inst);
MatrixXd lambda_off_from_dphi(const MatrixXd& dphi);

struct EigSym {
  VectorXd values;   // ascending
  MatrixXd vectors;  // orthonormal columns
};

// Symmetric eigendecomposition; rejects asymmetric input (tolerance 1e-10).
EigSym eig_sym(const MatrixXd& m);

// Number of lambda_tilde eigenvalues <= threshold_c / T: the directions the
// offline dataset leaves under-covered at horizon T.
int d_hyb_count(const VectorXd& lambda_tilde_eigenvalues, int t_rounds,
                double threshold_c);

// ||Lambda_off^{-1/2} nu*||_2 via spectral pseudo-inversion; returns +inf when
// nu* has mass on eigenvalues below rank_tol.
double concentrability(const MatrixXd& lambda_off, const VectorXd& nu_star,
                       double rank_tol);

// Unit vector along E_{x, y~pi}[phi(x,y)], exact inner sums over responses.
VectorXd nu_star(const BanditInstance& inst, const LogLinearPolicy& policy,
                 const std::vector<VectorXd>& eval_contexts);

// Elliptical-potential bound on the hybrid SEC: 2 sum_i log(1 + 4T/(gamma lambda_i)).
double sec_bound_linear(const VectorXd& lambda_tilde_eigenvalues, int t_rounds,
                        int gamma);

struct SecEstimate {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo standard error of value
  double v_max = 0.0;      // measured over the policy sequence
};

// Per-sequence empirical SEC (the definitional sup over sequences is not
// taken): Monte Carlo over contexts with exact inner sums over responses.
// The t = 1 term is skipped (mu^(1) arbitrary).
SecEstimate sec_empirical(const std::vector<LogLinearPolicy>& policies,
                          const std::vector<LogLinearPolicy>& samplers,
                          const BanditInstance& inst, const LogLinearPolicy& ref,
                          double beta, int gamma, const OfflineDataset& dataset,
                          int mc_samples, Rng& rng);

// Theorem-style suboptimality bound with absolute constant 1:
// (V+R) e^{2R} sqrt((1 + gamma/T) SEC (log_pi_proxy + log(T/delta)) log(T) / T).
double theorem1_rhs(double sec_value, double v_max, double r_max, int gamma,
                    int t_rounds, double log_pi_proxy, double delta);

struct RegretCurves {
  std::vector<double> suboptimality;  // raw, unclipped
  std::vector<double> cum_regret;     // negatives clipped to 0 before summing
  std::vector<long> total_samples;    // run round + n_off_offset
};

RegretCurves regret_accounting(const RunResult& run, double optimal_j_beta,
                               int n_off_offset);

// Assembled report as emitted by the diagnose command.
CoverageReport make_coverage_report(const BanditInstance& inst,
                                    const LogLinearPolicy& ref,
                                    const OfflineDataset& dataset, int t_rounds,
                                    int gamma, double v_max, double beta,
                                    double threshold_c, int n_probe_contexts,
                                    std::uint64_t probe_seed);

}  // namespace hpo
