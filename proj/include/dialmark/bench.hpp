#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dialmark/dialog.hpp"

namespace dialmark {

struct CellSpec {
  int env_id = 1;
  std::string domain;
  std::string algo;  // rq | emdb | emdm | hdc | dqn | gp
  std::string mode;  // learners: v | s | bs; baselines: "-"
  int seed = 0;
};

// Policy label as used in reports: algo for baselines, algo_mode for learners.
std::string cell_label(const CellSpec& spec);
// Stable ordering/grouping key: env, domain, label, seed.
std::string cell_key(const CellSpec& spec);

struct CellResult {
  CellSpec spec;
  int train_episodes = 0;
  int test_episodes = 0;
  double test_reward_mean = 0.0;
  double test_success_rate = 0.0;
  double wall_clock_s = 0.0;
  std::vector<double> train_rewards;  // transient; not persisted to CSV
  std::string error;                  // non-empty = cell failed, metrics invalid
};

struct BenchOptions {
  int n_train = 4000;
  int n_test = 500;
  std::uint64_t seed_offset = 0;  // from DIALMARK_SEED_OFFSET
  bool keep_train_rewards = false;
};

// A policy plus its training lifecycle: trainable policies run the training
// phase and are frozen (exploration off, memory fixed) before testing.
struct PolicyHandle {
  std::unique_ptr<Policy> policy;
  bool trainable = false;
  std::function<void()> freeze;
};

// Throws std::invalid_argument on unknown algo or an algo/mode mismatch.
// n_train drives exploration annealing horizons for the learners; init_rng
// seeds their parameters (derive it from the cell's root stream).
PolicyHandle make_policy(const ItemSet& domain, const std::string& algo, const std::string& mode,
                         int n_train, RandomStream init_rng);

// The four shipped domains by name; reads DIALMARK_DATA_DIR/<name>.json when
// present, otherwise regenerates (bit-identical by construction).
ItemSet benchmark_domain(const std::string& name);
std::vector<std::string> benchmark_domain_names();

CellResult run_cell(const ItemSet& domain, const CellSpec& spec, const BenchOptions& options);

// Runs cells on `jobs` threads; results come back sorted by cell_key. When
// partial_csv_path is non-empty, finished rows are appended there as they
// complete (unsorted, for monitoring). Failed cells keep their error message
// and are excluded from CSV serialization.
std::vector<CellResult> run_grid(const std::map<std::string, ItemSet>& domains,
                                 const std::vector<CellSpec>& specs, const BenchOptions& options,
                                 int jobs, const std::string& partial_csv_path = "");

std::string results_to_csv(const std::vector<CellResult>& results);
std::vector<CellResult> results_from_csv(const std::string& text);

struct GroupStat {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

// Mean/sd of test_reward_mean over seeds, keyed by "env|domain|label".
std::map<std::string, GroupStat> aggregate_cells(const std::vector<CellResult>& results);
// Per-label grand mean over every cell (the cross-env/domain summary row).
std::map<std::string, GroupStat> aggregate_grand(const std::vector<CellResult>& results);
std::string aggregate_to_csv(const std::vector<CellResult>& results);

// One grouped bar chart per environment (domains × policy labels) plus one
// all-environment average panel; deterministic SVG, returns file names.
std::vector<std::string> emit_plots(const std::vector<CellResult>& results,
                                    const std::string& out_dir);

}  // namespace dialmark
