#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sniper/dataset.hpp"
#include "sniper/mask.hpp"
#include "sniper/model.hpp"

namespace sniper {

// How per-batch mask gradients combine across the dataset: signed sums with
// the absolute value taken at ranking time, or per-batch absolute values
// summed directly.
enum class SaliencyAccum : uint8_t { kSignedSum, kAbsSum };

SaliencyAccum saliency_accum_from_string(const std::string& s);
const char* saliency_accum_name(SaliencyAccum a);

struct SaliencyMeta {
  uint64_t dataset_fingerprint = 0;
  double subset_fraction = 1.0;
  uint64_t seed = 0;
  SaliencyAccum accum = SaliencyAccum::kSignedSum;
  uint64_t total_model_entries = 0;  // full trainable census of the source model
  uint64_t batches_used = 0;
  std::string warning;  // set when the model was not at its initial weights
};

// Per-parameter nonnegative importance scores, accumulated over (a subset
// of) the dataset. Covers exactly the maskable params, in declaration order.
struct SaliencyMap {
  std::vector<std::pair<std::string, Tensor>> scores;
  SaliencyMeta meta;

  const Tensor* find(const std::string& name) const;
  size_t entry_count() const;
};

// Accumulates dLoss/dMask at mask = 1 over ceil(subset_fraction *
// batch_count) batches drawn in the seed's order. Model weights are left
// untouched. When `initial_snapshot` is given and differs from the current
// weights, a warning is recorded in the metadata instead of failing.
SaliencyMap compute_saliency(const Model& model, const Dataset& dataset, double subset_fraction,
                             uint64_t seed, SaliencyAccum accum = SaliencyAccum::kSignedSum,
                             const std::vector<Tensor>* initial_snapshot = nullptr);

// Zeroes exactly round(target * maskable_count) entries in ascending
// saliency order, skipping params that reached floor(cap * size) zeros;
// ties break by (name, flat index). Excluded params get all-ones masks and
// do not count toward the maskable total.
Mask generate_mask(const SaliencyMap& saliency, double target_sparsity, double cap,
                   const std::vector<std::string>& exclude_patterns = {});

// Zero entries across the mask divided by every trainable entry of the
// model, excluded and non-maskable params included in the denominator.
double overall_sparsity(const Mask& mask, const Model& model);

void save_saliency(const SaliencyMap& s, const std::string& path);
SaliencyMap load_saliency(const std::string& path);
void save_mask(const Mask& m, const std::string& path);
Mask load_mask(const std::string& path);

// Shape/name validation of a loaded artifact against a model; lists every
// offending param in the error.
void validate_saliency(const SaliencyMap& s, const Model& model);
void validate_mask(const Mask& m, const Model& model);

// Glob match with * and ? (used for exclude patterns).
bool glob_match(const std::string& pattern, const std::string& name);

}  // namespace sniper
