#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hpo/env.hpp"
#include "hpo/numeric.hpp"
#include "hpo/policy.hpp"
#include "test_support.hpp"

using namespace hpo;

TEST_CASE("build_instance draws theta_star in [0,1] and is deterministic") {
  BanditInstance a = build_instance(7, 2, 500, 100);
  CHECK(a.num_responses == 500);
  CHECK(a.feat_dim() == 100);
  CHECK(a.theta_star.minCoeff() >= 0.0);
  CHECK(a.theta_star.maxCoeff() <= 1.0);

  BanditInstance b = build_instance(7, 2, 500, 100);
  CHECK(a.theta_star == b.theta_star);
  CHECK(a.fmap.weights == b.fmap.weights);
  CHECK(a.fmap.bias == b.fmap.bias);
  CHECK(a.r_max == b.r_max);
}

TEST_CASE("r_max respects the Cauchy-Schwarz ceiling") {
  BanditInstance inst = build_instance(1, 2, 2, 3);
  CHECK(inst.r_max <= inst.r_max_analytic);
  // scale = 1/sqrt(d) makes the analytic ceiling ||theta*||.
  CHECK(inst.r_max_analytic == doctest::Approx(inst.theta_star.norm()).epsilon(1e-12));
  CHECK(inst.r_max <= inst.theta_star.norm());
}

TEST_CASE("phi stays inside the unit ball and is frozen") {
  BanditInstance inst = build_instance(3, 2, 20, 16);
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    VectorXd x = sample_context(2, rng);
    int y = static_cast<int>(rng.uniform_int(20));
    VectorXd f = phi(inst.fmap, x, y);
    CHECK(f.norm() <= 1.0 + 1e-12);
    CHECK(phi(inst.fmap, x, y) == f);  // repeated call, identical vector
  }
  CHECK_THROWS_AS(phi(inst.fmap, VectorXd::Zero(2), 20), std::out_of_range);

  FeatureMap zero = inst.fmap;
  zero.weights.setZero();
  zero.bias.setZero();
  CHECK(phi(zero, VectorXd::Ones(2), 3).norm() == 0.0);
}

TEST_CASE("phi_all columns agree with per-response phi") {
  BanditInstance inst = build_instance(11, 2, 7, 5);
  Rng rng(3);
  VectorXd x = sample_context(2, rng);
  MatrixXd all = phi_all(inst.fmap, x);
  for (int y = 0; y < 7; ++y) {
    CHECK((all.col(y) - phi(inst.fmap, x, y)).norm() == 0.0);
  }
}

TEST_CASE("sample_context matches standard normal moments") {
  const int n = 100000;
  Rng rng(42);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    VectorXd x = sample_context(2, rng);
    for (int j = 0; j < 2; ++j) {
      sum += x(j);
      sum_sq += x(j) * x(j);
    }
  }
  const double mean = sum / (2.0 * n);
  const double var = sum_sq / (2.0 * n) - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);

  Rng r1(9), r2(9);
  for (int i = 0; i < 10; ++i) {
    CHECK(sample_context(4, r1) == sample_context(4, r2));
  }
}

TEST_CASE("btl_prob values and properties") {
  CHECK(btl_prob(0.0, 0.0) == 0.5);
  CHECK(btl_prob(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(btl_prob(2.0, 1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK_THROWS_AS(btl_prob(std::nan(""), 0.0), std::invalid_argument);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double a = 10.0 * (rng.uniform01() - 0.5);
    const double b = 10.0 * (rng.uniform01() - 0.5);
    const double c = 10.0 * (rng.uniform01() - 0.5);
    CHECK(btl_prob(a, b) + btl_prob(b, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(btl_prob(a + c, b + c) == doctest::Approx(btl_prob(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("label_pair frequencies match the BTL oracle") {
  // Crafted instance: reward gap between the two responses is exactly ln 3.
  BanditInstance inst = test::gap_instance(std::log(3.0));
  const VectorXd x = VectorXd::Zero(1);
  CHECK(reward(inst, x, 0) - reward(inst, x, 1) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));

  Rng rng(17);
  const int n = 100000;
  int wins = 0;
  for (int i = 0; i < n; ++i) {
    PreferenceRecord rec = label_pair(inst, x, 0, 1, rng);
    if (rec.y_plus == 0) ++wins;
  }
  CHECK(std::abs(static_cast<double>(wins) / n - 0.75) < 0.005);

  // Equal rewards: zero-reward instance, any pair is a fair coin.
  BanditInstance flat = test::gap_instance(0.0);
  wins = 0;
  for (int i = 0; i < n; ++i) {
    PreferenceRecord rec = label_pair(flat, x, 0, 1, rng);
    if (rec.y_plus == 0) ++wins;
  }
  CHECK(std::abs(static_cast<double>(wins) / n - 0.5) < 0.005);

  // Degenerate pair: labelled uniformly, zero-margin record.
  PreferenceRecord rec = label_pair(inst, x, 1, 1, rng);
  CHECK(rec.y_plus == 1);
  CHECK(rec.y_minus == 1);
}

TEST_CASE("gen_offline_dataset sizes, reproducibility and win-rate consistency") {
  BanditInstance inst = build_instance(3, 2, 30, 12);
  LogLinearPolicy ref = reference_policy_for(inst);

  Rng rng(1);
  OfflineDataset one = gen_offline_dataset(inst, ref.theta, 1, rng);
  CHECK(one.size() == 1);
  CHECK(one[0].source == Source::offline);

  Rng ra(2), rb(2);
  OfflineDataset da = gen_offline_dataset(inst, ref.theta, 500, ra);
  OfflineDataset db = gen_offline_dataset(inst, ref.theta, 500, rb);
  CHECK(da.size() == 500);
  REQUIRE(da.size() == db.size());
  for (std::size_t i = 0; i < da.size(); ++i) {
    CHECK(da[i].x == db[i].x);
    CHECK(da[i].y_plus == db[i].y_plus);
    CHECK(da[i].y_minus == db[i].y_minus);
  }

  // The stored winner should carry the higher reward with the frequency the
  // BTL model predicts, within a 3-sigma binomial band.
  Rng rc(7);
  OfflineDataset big = gen_offline_dataset(inst, ref.theta, 5000, rc);
  double expected = 0.0, variance = 0.0;
  int hits = 0;
  for (const PreferenceRecord& rec : big) {
    if (rec.y_plus == rec.y_minus) continue;
    const double r_plus = reward(inst, rec.x, rec.y_plus);
    const double r_minus = reward(inst, rec.x, rec.y_minus);
    const double p_high = btl_prob(std::max(r_plus, r_minus), std::min(r_plus, r_minus));
    expected += p_high;
    variance += p_high * (1.0 - p_high);
    if (r_plus >= r_minus) ++hits;
  }
  const double se = std::sqrt(variance);
  CHECK(std::abs(hits - expected) <= 3.0 * se + 1.0);
}

TEST_CASE("token MDP enumeration counts, order and independent reward oracle") {
  TokenMDPInstance mdp = build_token_mdp(5, 2, 3, 4, 6, 2);
  auto trajs = enumerate_trajectories(mdp, 0);
  REQUIRE(trajs.size() == 8);

  // Lexicographic order in token ids.
  CHECK(trajs[0].tokens == std::vector<int>{0, 0, 0});
  CHECK(trajs[1].tokens == std::vector<int>{0, 0, 1});
  CHECK(trajs[7].tokens == std::vector<int>{1, 1, 1});

  // Independent per-step resummation.
  for (const Trajectory& tr : trajs) {
    VectorXd feats = VectorXd::Zero(6);
    std::vector<int> prefix;
    for (int a : tr.tokens) {
      feats += token_step_phi(mdp, 0, prefix, a);
      prefix.push_back(a);
    }
    CHECK(std::abs(tr.reward - mdp.nu.dot(feats)) <= 1e-12);
    CHECK((tr.features - feats).norm() <= 1e-12);
  }

  TokenMDPInstance flat = mdp;
  flat.nu.setZero();
  for (const Trajectory& tr : enumerate_trajectories(flat, 1)) {
    CHECK(tr.reward == 0.0);
  }

  TokenMDPInstance big = build_token_mdp(5, 10, 6, 4, 6, 1);
  CHECK_THROWS_AS(enumerate_trajectories(big, 0), std::invalid_argument);
}

TEST_CASE("token trajectory probability: product equals exp of log sum") {
  TokenMDPInstance mdp = build_token_mdp(12, 3, 3, 4, 8, 2);
  LogLinearPolicy ref = token_reference_policy_for(mdp);
  auto trajs = enumerate_trajectories(mdp, 1);
  double total = 0.0;
  for (const Trajectory& tr : trajs) {
    double prod = 1.0;
    std::vector<int> prefix;
    for (int a : tr.tokens) {
      prod *= std::exp(token_action_log_probs(mdp, ref.theta, 1, prefix)(a));
      prefix.push_back(a);
    }
    const double via_log = std::exp(token_traj_log_prob(mdp, ref.theta, 1, tr.tokens));
    CHECK(std::abs(prod - via_log) <= 1e-12);
    total += via_log;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}
