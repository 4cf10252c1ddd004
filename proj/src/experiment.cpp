#include "hpo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hpo {

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::hpo: return "hpo";
    case Algo::xpo: return "xpo";
    case Algo::online_dpo: return "online-dpo";
    case Algo::offline_dpo: return "offline-dpo";
  }
  return "?";
}

std::optional<Algo> algo_from_name(const std::string& s) {
  if (s == "hpo") return Algo::hpo;
  if (s == "xpo") return Algo::xpo;
  if (s == "online-dpo") return Algo::online_dpo;
  if (s == "offline-dpo") return Algo::offline_dpo;
  return std::nullopt;
}

namespace {

int pool_size(int requested, std::size_t tasks) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("HPO_LAB_THREADS")) {
      n = std::atoi(env);
    }
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return std::min<int>(n, static_cast<int>(tasks));
}

ArmSeedOutcome run_task(const BanditInstance& inst, const LogLinearPolicy& ref,
                        const OfflineDataset& offline, const ArmSpec& arm,
                        std::uint64_t seed, const Evaluator& ev) {
  ArmSeedOutcome out;
  out.arm = arm.name;
  out.seed = seed;
  Rng rng(seed);
  try {
    switch (arm.algo) {
      case Algo::hpo: {
        HPOConfig cfg = arm.cfg;
        cfg.seed = seed;
        out.run = run_hpo(inst, ref, offline, cfg, ev, rng);
        break;
      }
      case Algo::xpo: {
        HPOConfig cfg = arm.cfg;
        cfg.seed = seed;
        out.run = run_xpo(inst, ref, cfg, ev, rng);
        break;
      }
      case Algo::online_dpo: {
        HPOConfig cfg = arm.cfg;
        cfg.seed = seed;
        out.run = run_online_dpo(inst, ref, cfg, ev, rng);
        break;
      }
      case Algo::offline_dpo: {
        OfflineDPOConfig cfg = arm.off;
        cfg.seed = seed;
        out.run = run_offline_dpo(inst, ref, offline, cfg, ev, rng);
        break;
      }
    }
  } catch (const RunError& e) {
    out.failed = true;
    out.error = e.what();
    out.error_t = e.t;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const BanditInstance& inst,
                                const LogLinearPolicy& ref,
                                const OfflineDataset& offline,
                                const ExperimentSpec& spec, int threads) {
  if (spec.arms.empty()) throw std::invalid_argument("experiment: no arms");
  if (spec.seeds.empty()) throw std::invalid_argument("experiment: no seeds");
  for (const ArmSpec& arm : spec.arms) {
    const double beta = arm.algo == Algo::offline_dpo ? arm.off.beta : arm.cfg.beta;
    if (beta != spec.beta) {
      throw std::invalid_argument(
          "experiment: all arms must share the experiment beta (paired J_beta)");
    }
  }

  const Evaluator ev =
      make_evaluator(inst, ref, spec.beta, spec.eval_contexts, spec.eval_seed);

  struct Task {
    const ArmSpec* arm;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const ArmSpec& arm : spec.arms) {
    for (std::uint64_t seed : spec.seeds) tasks.push_back({&arm, seed});
  }

  std::vector<ArmSeedOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  const int n_workers = pool_size(threads, tasks.size());
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      outcomes[i] =
          run_task(inst, ref, offline, *tasks[i].arm, tasks[i].seed, ev);
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  ExperimentResult result;
  result.optimal_j = ev.optimal_j;

  const long n_off = static_cast<long>(offline.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const ArmSpec& arm = *tasks[i].arm;
    const ArmSeedOutcome& oc = outcomes[i];
    const bool counts_offline =
        arm.algo == Algo::hpo || arm.algo == Algo::offline_dpo;
    const long offset = counts_offline ? n_off : 0;
    if (oc.failed) {
      result.any_failed = true;
      const double nan = std::nan("");
      result.rows.push_back(ResultRow{arm.name, oc.seed, oc.error_t,
                                      offset + oc.error_t, nan, nan, nan, 0});
      continue;
    }
    for (const IterStat& s : oc.run.per_iter) {
      ResultRow row;
      row.algo = arm.name;
      row.seed = oc.seed;
      row.t = s.t;
      row.total_samples =
          arm.algo == Algo::offline_dpo ? n_off : offset + s.t;
      row.j_beta = s.j_beta;
      row.suboptimality = s.suboptimality;
      row.cum_regret = s.cum_regret;
      row.wall_ms = 0;
      result.rows.push_back(row);
    }
  }
  result.outcomes = std::move(outcomes);

  std::sort(result.rows.begin(), result.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              if (a.algo != b.algo) return a.algo < b.algo;
              if (a.seed != b.seed) return a.seed < b.seed;
              return a.t < b.t;
            });
  return result;
}

std::string results_csv_header() {
  return "algo,seed,t,total_samples,j_beta,suboptimality,cum_regret,wall_ms";
}

std::string format_result_row(const ResultRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%llu,%d,%ld,%.17g,%.17g,%.17g,%ld",
                row.algo.c_str(), static_cast<unsigned long long>(row.seed),
                row.t, row.total_samples, row.j_beta, row.suboptimality,
                row.cum_regret, row.wall_ms);
  return buf;
}

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << results_csv_header() << '\n';
  for (const ResultRow& row : rows) out << format_result_row(row) << '\n';
}

std::vector<ResultRow> parse_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != results_csv_header()) {
    throw std::runtime_error("results csv: bad header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ResultRow row;
    std::getline(ss, row.algo, ',');
    std::getline(ss, field, ',');
    row.seed = std::strtoull(field.c_str(), nullptr, 10);
    std::getline(ss, field, ',');
    row.t = std::atoi(field.c_str());
    std::getline(ss, field, ',');
    row.total_samples = std::atol(field.c_str());
    std::getline(ss, field, ',');
    row.j_beta = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    row.suboptimality = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    row.cum_regret = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    row.wall_ms = std::atol(field.c_str());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hpo
