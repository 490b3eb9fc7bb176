#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sniper/model.hpp"
#include "sniper/rng.hpp"
#include "sniper/tensor.hpp"

namespace sniper {

// Immutable after construction. The first train_count rows are the training
// split; the rest are held out for validation. Training batches partition
// the training split, last batch possibly short; their order is a
// permutation drawn from the caller's Rng so identical seeds give identical
// epochs.
struct Dataset {
  Tensor inputs;   // [N x d_in]
  Tensor targets;  // [N x d_out]
  size_t batch_size = 32;
  uint64_t seed = 0;
  size_t train_count = 0;

  size_t size() const { return inputs.rows(); }
  size_t d_in() const { return inputs.cols(); }
  size_t d_out() const { return targets.cols(); }
  size_t val_count() const { return size() - train_count; }
  size_t batch_count() const { return (train_count + batch_size - 1) / batch_size; }

  std::vector<std::vector<size_t>> epoch_batches(Rng& rng) const;
  Tensor gather_inputs(const std::vector<size_t>& rows) const;
  Tensor gather_targets(const std::vector<size_t>& rows) const;
  Tensor val_inputs() const;
  Tensor val_targets() const;

  uint64_t fingerprint() const;

  // Header x0..x{d-1},y0..y{k-1}; one sample per line; %.17g round-trips
  // every double exactly.
  void save_csv(const std::string& path) const;
  static Dataset load_csv(const std::string& path, size_t batch_size, uint64_t seed,
                          double val_fraction);
};

struct TeacherStudent {
  Dataset dataset;
  Model student;
  Model teacher;
};

// Synthetic regression task: a frozen random teacher MLP labels random
// normal inputs, plus optional Gaussian noise; the wider student has to fit
// them. Over-parameterization is required (hidden_student > hidden_teacher).
TeacherStudent make_teacher_student(size_t d_in, size_t hidden_teacher, size_t hidden_student,
                                    size_t n, double noise_std, uint64_t seed,
                                    size_t batch_size = 32, double val_fraction = 0.2,
                                    Activation activation = Activation::kTanh);

}  // namespace sniper
