#pragma once

#include <cstdint>
#include <vector>

#include "hpo/feature_map.hpp"
#include "hpo/rng.hpp"

namespace hpo {

enum class Source { offline, online };

// One labelled preference pair. y_plus == y_minus is allowed: such pairs
// are labelled uniformly and carry zero margin.
struct PreferenceRecord {
  VectorXd x;
  int y_plus = 0;
  int y_minus = 0;
  Source source = Source::offline;
};

using OfflineDataset = std::vector<PreferenceRecord>;

// Synthetic contextual bandit with ground-truth reward r(x,y) = <phi(x,y), theta_star>.
struct BanditInstance {
  FeatureMap fmap;
  VectorXd theta_star;
  int context_dim = 0;
  int num_responses = 0;
  double r_max = 0.0;           // max |r| over the seeded probe set
  double r_max_analytic = 0.0;  // Cauchy-Schwarz ceiling ||theta*|| * scale * sqrt(d)
  std::uint64_t seed = 0;

  int feat_dim() const { return fmap.feat_dim; }
};

// Token-level deterministic contextual MDP: states are prompt-token
// concatenations, per-step features come from a frozen map over
// (state encoding, token), and r(tau) = <nu, sum_h phi(s_h, a_h)>.
struct TokenMDPInstance {
  int vocab_size = 0;
  int horizon = 0;
  int enc_dim = 0;
  FeatureMap step_map;  // context_dim = enc_dim, num_responses = vocab_size
  VectorXd nu;
  VectorXd rho;  // distribution over initial states
  std::uint64_t seed = 0;

  int num_initial_states() const { return static_cast<int>(rho.size()); }
  long long num_trajectories() const;
};

struct Trajectory {
  std::vector<int> tokens;
  double reward = 0.0;
  VectorXd features;
};

BanditInstance build_instance(std::uint64_t seed, int context_dim,
                              int num_responses, int feat_dim,
                              double scale_override = -1.0);

VectorXd sample_context(int context_dim, Rng& rng);

// P(a preferred over b) under the Bradley-Terry model, sigma(r_a - r_b).
double btl_prob(double r_a, double r_b);

double reward(const BanditInstance& inst, const VectorXd& x, int y);

PreferenceRecord label_pair(const BanditInstance& inst, const VectorXd& x,
                            int y_a, int y_b, Rng& rng,
                            Source source = Source::offline);

// Draws n_off pairs with both responses sampled independently from the
// log-linear policy with parameter theta_ref, labelled via the BTL oracle.
OfflineDataset gen_offline_dataset(const BanditInstance& inst,
                                   const VectorXd& theta_ref, int n_off,
                                   Rng& rng);

TokenMDPInstance build_token_mdp(std::uint64_t seed, int vocab_size,
                                 int horizon, int enc_dim, int feat_dim,
                                 int num_initial_states);

// Frozen hash embedding of (initial state, token prefix) into the context slot.
VectorXd encode_state(const TokenMDPInstance& mdp, int s1,
                      const std::vector<int>& prefix);

VectorXd token_step_phi(const TokenMDPInstance& mdp, int s1,
                        const std::vector<int>& prefix, int action);

// All A^H trajectories from s1 in lexicographic token order.
std::vector<Trajectory> enumerate_trajectories(const TokenMDPInstance& mdp, int s1);

}  // namespace hpo
