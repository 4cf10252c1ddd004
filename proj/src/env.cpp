#include "hpo/env.hpp"

#include <cmath>
#include <stdexcept>

#include "hpo/numeric.hpp"

namespace hpo {

namespace {

constexpr long long kMaxTrajectories = 100000;

MatrixXd gaussian_matrix(int rows, int cols, double stddev, Rng& rng) {
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = stddev * rng.normal();
    }
  }
  return m;
}

}  // namespace

BanditInstance build_instance(std::uint64_t seed, int context_dim,
                              int num_responses, int feat_dim,
                              double scale_override) {
  if (context_dim < 1 || num_responses < 1 || feat_dim < 1) {
    throw std::invalid_argument("build_instance: dims must be >= 1");
  }
  BanditInstance inst;
  inst.seed = seed;
  inst.context_dim = context_dim;
  inst.num_responses = num_responses;

  const int input_dim = context_dim + num_responses;
  // Fan-in scaling keeps pre-activations O(1) so tanh stays unsaturated.
  // The response block is one-hot, so only context_dim + 1 inputs are ever
  // active at once; that effective fan-in sets the variance.
  const double stddev = 1.0 / std::sqrt(static_cast<double>(context_dim + 1));

  Rng root(seed);
  Rng map_rng = root.substream(0);
  inst.fmap.context_dim = context_dim;
  inst.fmap.num_responses = num_responses;
  inst.fmap.feat_dim = feat_dim;
  inst.fmap.weights = gaussian_matrix(feat_dim, input_dim, stddev, map_rng);
  inst.fmap.bias = gaussian_matrix(feat_dim, 1, stddev, map_rng).col(0);
  inst.fmap.scale = scale_override > 0.0
                        ? scale_override
                        : 1.0 / std::sqrt(static_cast<double>(feat_dim));

  Rng theta_rng = root.substream(1);
  inst.theta_star = VectorXd(feat_dim);
  for (int i = 0; i < feat_dim; ++i) inst.theta_star(i) = theta_rng.uniform01();

  inst.r_max_analytic = inst.theta_star.norm() * inst.fmap.scale *
                        std::sqrt(static_cast<double>(feat_dim));

  // Measured range: exhaustive max over a seeded 1000-context probe set.
  Rng probe_rng = root.substream(2);
  double rmax = 0.0;
  for (int k = 0; k < 1000; ++k) {
    VectorXd x = sample_context(context_dim, probe_rng);
    VectorXd r = phi_all(inst.fmap, x).transpose() * inst.theta_star;
    rmax = std::max(rmax, r.cwiseAbs().maxCoeff());
  }
  inst.r_max = rmax;
  return inst;
}

VectorXd sample_context(int context_dim, Rng& rng) {
  VectorXd x(context_dim);
  for (int i = 0; i < context_dim; ++i) x(i) = rng.normal();
  return x;
}

double btl_prob(double r_a, double r_b) {
  if (std::isnan(r_a) || std::isnan(r_b)) {
    throw std::invalid_argument("btl_prob: NaN input");
  }
  return sigmoid(r_a - r_b);
}

double reward(const BanditInstance& inst, const VectorXd& x, int y) {
  return phi(inst.fmap, x, y).dot(inst.theta_star);
}

PreferenceRecord label_pair(const BanditInstance& inst, const VectorXd& x,
                            int y_a, int y_b, Rng& rng, Source source) {
  const double p = btl_prob(reward(inst, x, y_a), reward(inst, x, y_b));
  const bool a_wins = rng.bernoulli(p);
  PreferenceRecord rec;
  rec.x = x;
  rec.y_plus = a_wins ? y_a : y_b;
  rec.y_minus = a_wins ? y_b : y_a;
  rec.source = source;
  return rec;
}

OfflineDataset gen_offline_dataset(const BanditInstance& inst,
                                   const VectorXd& theta_ref, int n_off,
                                   Rng& rng) {
  if (n_off < 1) throw std::invalid_argument("gen_offline_dataset: n_off >= 1");
  OfflineDataset data;
  data.reserve(n_off);
  for (int i = 0; i < n_off; ++i) {
    VectorXd x = sample_context(inst.context_dim, rng);
    VectorXd p = softmax(phi_all(inst.fmap, x).transpose() * theta_ref);
    int y_a = sample_categorical(p, rng);
    int y_b = sample_categorical(p, rng);
    data.push_back(label_pair(inst, x, y_a, y_b, rng, Source::offline));
  }
  return data;
}

long long TokenMDPInstance::num_trajectories() const {
  long long n = 1;
  for (int h = 0; h < horizon; ++h) {
    n *= vocab_size;
    if (n > kMaxTrajectories) return n;
  }
  return n;
}

TokenMDPInstance build_token_mdp(std::uint64_t seed, int vocab_size,
                                 int horizon, int enc_dim, int feat_dim,
                                 int num_initial_states) {
  if (vocab_size < 1 || horizon < 1 || enc_dim < 1 || feat_dim < 1 ||
      num_initial_states < 1) {
    throw std::invalid_argument("build_token_mdp: dims must be >= 1");
  }
  TokenMDPInstance mdp;
  mdp.seed = seed;
  mdp.vocab_size = vocab_size;
  mdp.horizon = horizon;
  mdp.enc_dim = enc_dim;

  const int input_dim = enc_dim + vocab_size;
  // One-hot token block: effective fan-in is enc_dim + 1.
  const double stddev = 1.0 / std::sqrt(static_cast<double>(enc_dim + 1));
  Rng root(seed);
  Rng map_rng = root.substream(0);
  mdp.step_map.context_dim = enc_dim;
  mdp.step_map.num_responses = vocab_size;
  mdp.step_map.feat_dim = feat_dim;
  mdp.step_map.weights = gaussian_matrix(feat_dim, input_dim, stddev, map_rng);
  mdp.step_map.bias = gaussian_matrix(feat_dim, 1, stddev, map_rng).col(0);
  mdp.step_map.scale = 1.0 / std::sqrt(static_cast<double>(feat_dim));

  Rng nu_rng = root.substream(1);
  mdp.nu = VectorXd(feat_dim);
  for (int i = 0; i < feat_dim; ++i) mdp.nu(i) = nu_rng.uniform01();
  mdp.nu /= mdp.nu.norm();  // linear-MDP convention ||nu|| <= 1

  mdp.rho = VectorXd::Constant(num_initial_states,
                               1.0 / static_cast<double>(num_initial_states));
  return mdp;
}

VectorXd encode_state(const TokenMDPInstance& mdp, int s1,
                      const std::vector<int>& prefix) {
  std::uint64_t h = hash_combine(mdp.seed, 0x746f6b656eULL);
  h = hash_combine(h, static_cast<std::uint64_t>(s1));
  for (int t : prefix) h = hash_combine(h, static_cast<std::uint64_t>(t) + 1);
  VectorXd enc(mdp.enc_dim);
  for (int j = 0; j < mdp.enc_dim; ++j) {
    std::uint64_t hj = hash_combine(h, static_cast<std::uint64_t>(j));
    enc(j) = 2.0 * (static_cast<double>(hj >> 11) * 0x1.0p-53) - 1.0;
  }
  return enc;
}

VectorXd token_step_phi(const TokenMDPInstance& mdp, int s1,
                        const std::vector<int>& prefix, int action) {
  return phi(mdp.step_map, encode_state(mdp, s1, prefix), action);
}

std::vector<Trajectory> enumerate_trajectories(const TokenMDPInstance& mdp,
                                               int s1) {
  if (mdp.num_trajectories() > kMaxTrajectories) {
    throw std::invalid_argument("enumerate_trajectories: A^H budget exceeded");
  }
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(mdp.num_trajectories()));

  std::vector<int> prefix;

  // Depth-first in token order; transitions are deterministic concatenation.
  // Each leaf's feature sum is built left-to-right so it matches an
  // independent per-trajectory resummation exactly.
  auto dfs = [&](auto&& self, int depth, const VectorXd& feat_sum) -> void {
    if (depth == mdp.horizon) {
      Trajectory tr;
      tr.tokens = prefix;
      tr.features = feat_sum;
      tr.reward = mdp.nu.dot(feat_sum);
      out.push_back(std::move(tr));
      return;
    }
    MatrixXd step = phi_all(mdp.step_map, encode_state(mdp, s1, prefix));
    for (int a = 0; a < mdp.vocab_size; ++a) {
      prefix.push_back(a);
      self(self, depth + 1, VectorXd(feat_sum + step.col(a)));
      prefix.pop_back();
    }
  };
  dfs(dfs, 0, VectorXd::Zero(mdp.step_map.feat_dim));
  return out;
}

}  // namespace hpo
