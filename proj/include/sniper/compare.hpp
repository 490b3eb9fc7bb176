#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sniper/config.hpp"
#include "sniper/dataset.hpp"
#include "sniper/experiment.hpp"
#include "sniper/schedule.hpp"
#include "sniper/trainer.hpp"

namespace sniper {

// Three-way experiment design: one dense baseline plus, per sparsity level,
// a constant-sparsity run and a decaying-schedule run, all seeds starting
// from bitwise-identical initial weights.
struct ComparisonSpec {
  size_t d_in = 16;
  size_t teacher_hidden = 8;
  size_t student_hidden = 64;
  size_t n_samples = 1000;
  double noise_std = 0.05;
  size_t batch_size = 32;
  double val_fraction = 0.2;
  Activation activation = Activation::kTanh;
  int epochs = 60;
  std::vector<uint64_t> seeds;
  std::vector<double> levels;
  std::map<double, SparsitySchedule> schedules;  // keyed by initial sparsity
  OptKind optimizer = OptKind::kAdam;
  double base_lr = 1e-3;
  SniperConfig sniper;

  void validate() const;
  static ComparisonSpec from_kv(const KvFile& kv);
  static ComparisonSpec from_file(const std::string& path);
};

struct RunRecord {
  std::string variant;  // baseline | constant | sniper
  double level = 0.0;   // 0 for baseline
  uint64_t seed = 0;
  ExperimentResult result;
  std::string csv_path;
  std::string status;  // "ok" or the failure message
};

struct ComparisonOutput {
  std::vector<RunRecord> records;
  std::string summary_path;
  std::vector<std::string> chart_paths;
};

// Runs every cell, writes per-run CSVs, loss charts and a summary table
// under out_dir. Failed cells are recorded and marked in the summary
// instead of aborting the rest. `jobs` > 1 runs cells in parallel threads;
// each cell owns all of its state.
ComparisonOutput run_comparison(const ComparisonSpec& spec, const std::string& out_dir,
                                int jobs = 1);

// Writes the wide summary table (one row per variant x level; per-seed and
// mean columns for final/best validation loss).
void write_summary_csv(const ComparisonSpec& spec, const std::vector<RunRecord>& records,
                       const std::string& path);

struct HalvingPolicy {
  bool use_validation_loss = false;  // crossing tested on training loss by default
  double min_sparsity = 0.1;         // halving stops below this and jumps to 0
  bool double_phase_length = true;   // each reduction phase doubles the previous
};

struct SuggestOutcome {
  std::optional<SparsitySchedule> schedule;
  int crossing_epoch = 0;  // 0 when no crossing
  std::string message;
};

// Builds a decaying schedule from the first epoch where the constant run's
// loss exceeds the baseline's at the same epoch. No crossing within the
// horizon is reported, not an error.
SuggestOutcome suggest_schedule(const ExperimentResult& constant_run,
                                const ExperimentResult& baseline_run, const HalvingPolicy& policy);

}  // namespace sniper
