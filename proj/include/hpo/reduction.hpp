#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "hpo/rng.hpp"

namespace hpo {

struct DuelOutcome {
  bool winner_is_first = false;
  std::pair<double, double> realized_scores;  // score + Gumbel noise, logged
};

inline double gumbel_sample(Rng& rng) { return rng.gumbel(); }

// One BTL preference bit from two reward pulls corrupted by i.i.d.
// Gumbel(0,1) noise: P(first wins) = sigmoid(score_a - score_b).
// Exact ties after noise go to the second action.
DuelOutcome simulate_duel(double score_a, double score_b, Rng& rng);

// Dueling-feedback learner: proposes an action pair, observes one bit.
struct DuelLearner {
  virtual std::pair<int, int> propose() = 0;
  virtual void observe(bool first_won) = 0;
  virtual ~DuelLearner() = default;
};

// Reward-feedback environment: one noisy reward per pull.
struct RewardEnv {
  virtual double pull(int action) = 0;
  virtual int num_actions() const = 0;
  virtual ~RewardEnv() = default;
};

// Reward environment with Gumbel(0,1) pull noise over fixed true scores;
// the pair (env, adapter) reproduces BTL dueling feedback exactly.
class GumbelRewardEnv : public RewardEnv {
 public:
  GumbelRewardEnv(Eigen::VectorXd scores, Rng& rng)
      : scores_(std::move(scores)), rng_(&rng) {}
  double pull(int action) override { return scores_(action) + rng_->gumbel(); }
  int num_actions() const override { return static_cast<int>(scores_.size()); }

 private:
  Eigen::VectorXd scores_;
  Rng* rng_;
};

struct DuelRound {
  int t = 0;
  int a = 0;
  int b = 0;
  bool first_won = false;
};

struct DuelTranscript {
  std::vector<DuelRound> rounds;
  long pulls = 0;
  bool odd_budget = false;  // ceil(T/2) duels exceed an odd budget by one pull
};

// Runs ceil(t_budget/2) duels, each consuming exactly two reward pulls, and
// feeds the comparison bit back to the dueling learner.
DuelTranscript adapt_duel_learner(DuelLearner& learner, RewardEnv& env,
                                  int t_budget);

}  // namespace hpo
