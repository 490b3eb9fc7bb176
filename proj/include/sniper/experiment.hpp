#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sniper {

struct EpochRow {
  int epoch = 0;
  double sparsity = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_seconds = 0.0;
};

// Per-epoch loss log of one training run. The CSV layout is
// epoch,sparsity,train_loss,val_loss,wall_seconds; bitwise comparisons of
// loss content use include_wall=false since wall time is not reproducible.
struct ExperimentResult {
  std::vector<EpochRow> rows;

  void write_csv(std::ostream& os, bool include_wall = true) const;
  void save_csv(const std::string& path, bool include_wall = true) const;
  std::string to_csv(bool include_wall = true) const;

  double final_train_loss() const;
  double final_val_loss() const;
  double best_val_loss() const;
  int best_val_epoch() const;
};

// Parses a result CSV; wall_seconds column optional. Errors carry
// path:row.
ExperimentResult load_result_csv(const std::string& path);

}  // namespace sniper
