#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hpo/algorithms.hpp"

namespace hpo {

enum class Algo { hpo, xpo, online_dpo, offline_dpo };

std::string algo_name(Algo a);
std::optional<Algo> algo_from_name(const std::string& s);

// One experiment arm: an algorithm plus its hyperparameters. The arm label
// becomes the algo column of the result rows.
struct ArmSpec {
  std::string name;
  Algo algo = Algo::hpo;
  HPOConfig cfg;
  OfflineDPOConfig off;
};

struct ExperimentSpec {
  std::vector<ArmSpec> arms;
  std::vector<std::uint64_t> seeds;
  double beta = 0.1;
  int eval_contexts = 512;
  std::uint64_t eval_seed = 9001;
};

// One results.csv row. total_samples counts offline + online samples seen,
// so hybrid and offline rows are offset by the offline dataset size.
struct ResultRow {
  std::string algo;
  std::uint64_t seed = 0;
  int t = 0;
  long total_samples = 0;
  double j_beta = 0.0;
  double suboptimality = 0.0;
  double cum_regret = 0.0;
  long wall_ms = 0;
};

struct ArmSeedOutcome {
  std::string arm;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  int error_t = 0;
  RunResult run;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sorted by (algo, seed, t)
  std::vector<ArmSeedOutcome> outcomes;
  double optimal_j = 0.0;
  bool any_failed = false;
};

// Fans (arm, seed) tasks out to a worker pool (capped by HPO_LAB_THREADS) and
// serializes rows in deterministic order regardless of completion order.
// Each run's RNG depends only on its seed, so arms are paired across seeds.
ExperimentResult run_experiment(const BanditInstance& inst,
                                const LogLinearPolicy& ref,
                                const OfflineDataset& offline,
                                const ExperimentSpec& spec,
                                int threads = 0);

// CSV schema: algo,seed,t,total_samples,j_beta,suboptimality,cum_regret,wall_ms.
// Floats are emitted with 17 significant digits for lossless round-trips;
// wall_ms is 0 unless timing was explicitly requested (keeps outputs
// byte-reproducible under fixed seeds).
std::string results_csv_header();
std::string format_result_row(const ResultRow& row);
void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path);
std::vector<ResultRow> parse_results_csv(const std::string& path);

}  // namespace hpo
