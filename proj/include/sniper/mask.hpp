#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sniper/tensor.hpp"

namespace sniper {

// Per-parameter binary tensors (entries 0 or 1, stored as doubles so they
// drop straight into m (*) w graph nodes). Parameters absent from the list
// are unmasked.
struct Mask {
  std::vector<std::pair<std::string, Tensor>> masks;  // model declaration order
  double target_sparsity = 0.0;
  double achieved_overall_sparsity = 0.0;
  double cap = 1.0;

  const Tensor* find(const std::string& name) const;
  size_t zero_count() const;
  size_t zero_count(const std::string& name) const;
  size_t entry_count() const;

  // Fraction of this parameter's entries that are masked; 0 for params not
  // covered by the mask.
  double param_sparsity(const std::string& name) const;
};

// True when every zero of `lower` is also a zero of `higher` (nested masks).
bool masks_nested(const Mask& lower, const Mask& higher);

uint64_t mask_fingerprint(const Mask& m);

}  // namespace sniper
