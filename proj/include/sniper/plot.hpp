#pragma once

#include <string>
#include <vector>

#include "sniper/experiment.hpp"

namespace sniper {

struct LabeledResult {
  std::string label;
  ExperimentResult result;
};

// Self-contained SVG with two panels (training loss left, validation loss
// right), one polyline per run, log y-axis when every loss is positive.
void write_loss_chart(const std::vector<LabeledResult>& runs, const std::string& out_path);

}  // namespace sniper
