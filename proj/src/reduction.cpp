#include "hpo/reduction.hpp"

#include <cmath>
#include <stdexcept>

namespace hpo {

DuelOutcome simulate_duel(double score_a, double score_b, Rng& rng) {
  if (!std::isfinite(score_a) || !std::isfinite(score_b)) {
    throw std::invalid_argument("simulate_duel: scores must be finite");
  }
  const double ra = score_a + rng.gumbel();
  const double rb = score_b + rng.gumbel();
  return DuelOutcome{ra > rb, {ra, rb}};
}

DuelTranscript adapt_duel_learner(DuelLearner& learner, RewardEnv& env,
                                  int t_budget) {
  if (t_budget < 2) {
    throw std::invalid_argument("adapt_duel_learner: t_budget must be >= 2");
  }
  DuelTranscript transcript;
  const int duels = (t_budget + 1) / 2;
  transcript.odd_budget = (t_budget % 2) != 0;
  transcript.rounds.reserve(duels);
  for (int t = 1; t <= duels; ++t) {
    const auto [a, b] = learner.propose();
    if (a < 0 || a >= env.num_actions() || b < 0 || b >= env.num_actions()) {
      throw std::out_of_range("adapt_duel_learner: learner proposed an out-of-domain action");
    }
    const double ra = env.pull(a);
    const double rb = env.pull(b);
    transcript.pulls += 2;
    const bool o = ra > rb;
    learner.observe(o);
    transcript.rounds.push_back(DuelRound{t, a, b, o});
  }
  return transcript;
}

}  // namespace hpo
