#pragma once

#include <cmath>
#include <functional>

#include "hpo/env.hpp"
#include "hpo/policy.hpp"

namespace hpo::test {

// Central finite differences, the independent oracle for every analytic
// gradient in the library.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                            const VectorXd& theta, double h = 1e-5) {
  VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    VectorXd up = theta, dn = theta;
    up(i) += h;
    dn(i) -= h;
    g(i) = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const VectorXd& a, const VectorXd& b) {
  const double denom = std::max(1e-12, std::max(a.norm(), b.norm()));
  return (a - b).norm() / denom;
}

// Golden-section minimizer over [lo, hi], the 1-D line-search oracle.
inline double golden_section_min(const std::function<double(double)>& f,
                                 double lo, double hi, int iters = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

// Tiny hand-built instance with d = 1 whose two responses have a reward gap
// of exactly `gap` at context x = 0 (zero bias, zero context weight).
inline BanditInstance gap_instance(double gap) {
  BanditInstance inst;
  inst.context_dim = 1;
  inst.num_responses = 2;
  inst.seed = 0;
  inst.fmap.context_dim = 1;
  inst.fmap.num_responses = 2;
  inst.fmap.feat_dim = 1;
  inst.fmap.scale = 1.0;
  inst.fmap.weights.resize(1, 3);
  inst.fmap.weights << 0.0, std::atanh(0.5), std::atanh(-0.5);
  inst.fmap.bias = VectorXd::Zero(1);
  inst.theta_star = VectorXd::Constant(1, gap);
  inst.r_max = std::abs(gap) / 2.0;
  inst.r_max_analytic = std::abs(gap);
  return inst;
}

inline LogLinearPolicy random_policy(int d, Rng& rng, double span = 1.0) {
  VectorXd theta(d);
  for (int i = 0; i < d; ++i) theta(i) = span * (2.0 * rng.uniform01() - 1.0);
  return LogLinearPolicy{theta};
}

}  // namespace hpo::test
