#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sniper/mask.hpp"
#include "sniper/model.hpp"

namespace sniper {

struct ScheduleStep {
  int start_epoch = 1;
  double sparsity = 0.0;
};

// Epoch-indexed decaying sparsity. Start epochs strictly increase from 1,
// sparsities strictly decrease, and a multi-step schedule must end at 0.
struct SparsitySchedule {
  std::vector<ScheduleStep> steps;

  double sparsity_at(int epoch) const;
  size_t step_index_at(int epoch) const;
  std::set<double> nonzero_sparsities() const;
  std::string to_text() const;  // canonical "1:0.4, 6:0.2, ..., 21:0.0"
  void validate() const;
};

// Comma-separated start-epoch:sparsity pairs; whitespace ignored, #
// comments run to end of line.
SparsitySchedule parse_schedule(const std::string& text);
SparsitySchedule load_schedule(const std::string& path);

enum class LrScaleMode : uint8_t { kNone, kGlobal, kPerParam };
enum class RestoreMode : uint8_t { kZeros, kInitial };

LrScaleMode lr_scale_mode_from_string(const std::string& s);
const char* lr_scale_mode_name(LrScaleMode m);
RestoreMode restore_mode_from_string(const std::string& s);
const char* restore_mode_name(RestoreMode m);

// none: base-lr; global: base/(1 - overall); per-param: base/(1 - param
// sparsity); the result is clamped to max_lr when present.
double lr_scale(double param_sparsity, double overall_sparsity, LrScaleMode mode, double base_lr,
                std::optional<double> max_lr);

// Applies a sparsity reduction: entries masked under `old_mask` but active
// under `new_mask` are restored to zero or to the initial snapshot value;
// everything else is left bit-identical. Masks must be nested.
void swap_mask(Model& model, const Mask& old_mask, const Mask& new_mask, RestoreMode restore,
               const std::vector<Tensor>& initial_snapshot);

// Zeroes masked weights in place (mask application at training start).
void apply_mask(Model& model, const Mask& mask);

}  // namespace sniper
