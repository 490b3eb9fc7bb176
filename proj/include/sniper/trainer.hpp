#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sniper/config.hpp"
#include "sniper/dataset.hpp"
#include "sniper/experiment.hpp"
#include "sniper/mask.hpp"
#include "sniper/model.hpp"
#include "sniper/schedule.hpp"

namespace sniper {

enum class OptKind : uint8_t { kSgd, kAdam };

OptKind opt_kind_from_string(const std::string& s);
const char* opt_kind_name(OptKind k);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Masked entries are frozen: no moment decay, no weight update, so a
// reactivated weight resumes from the moments it had when it was pruned
// (or from zero moments when reset-on-activate is set).
struct Optimizer {
  OptKind kind = OptKind::kAdam;
  double base_lr = 1e-3;
  AdamParams adam;
  uint64_t t = 0;                // adam bias-correction step count
  std::vector<Tensor> m, v;      // per param, adam only

  void init(const Model& model);
  void step(Model& model, const std::vector<double>& lr_per_param, const Mask* mask);
};

struct TrainOptions {
  int epochs = 1;
  OptKind optimizer = OptKind::kAdam;
  double base_lr = 1e-3;
  AdamParams adam;
  std::optional<int> checkpoint_at;  // save after finishing this epoch
  std::string checkpoint_path;
};

// Deterministic masked training loop: forward with m (*) w, backward, zero
// masked gradients, optimizer step, re-zero masked weights; mask swaps at
// the epoch boundaries named by the schedule.
class Trainer {
 public:
  Trainer(Model model, Dataset dataset, SparsitySchedule schedule, std::vector<Mask> masks,
          SniperConfig config, TrainOptions options);

  // Runs from the last finished epoch to options.epochs, appending one row
  // per epoch; returns the accumulated result (all epochs, including any
  // before a resume).
  ExperimentResult run();

  void save_checkpoint(const std::string& path) const;

  // Restores a checkpoint saved by an identically configured trainer;
  // a config fingerprint mismatch or missing file is an error.
  static Trainer resume(const std::string& path, Model model, Dataset dataset,
                        SparsitySchedule schedule, std::vector<Mask> masks, SniperConfig config,
                        TrainOptions options);

  const Model& model() const { return model_; }
  const std::vector<Tensor>& initial_snapshot() const { return initial_snapshot_; }
  uint64_t config_fingerprint() const;
  int epochs_done() const { return epochs_done_; }

 private:
  void enter_epoch(int epoch);
  void refresh_lr();
  double run_epoch(int epoch);
  double validation_loss();
  const Mask& mask_for(double sparsity) const;
  Mask all_ones_mask() const;

  Model model_;
  Dataset dataset_;
  SparsitySchedule schedule_;
  std::vector<Mask> masks_;
  SniperConfig config_;
  TrainOptions options_;

  Optimizer opt_;
  Rng rng_;
  std::vector<Tensor> initial_snapshot_;
  std::optional<Mask> current_mask_;  // nullopt while dense
  std::vector<double> lr_per_param_;
  size_t schedule_idx_ = 0;
  int epochs_done_ = 0;
  uint64_t global_step_ = 0;
  ExperimentResult result_;
};

}  // namespace sniper
