#include "sniper/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sniper/io.hpp"

namespace sniper {

// ---------------------------------------------------------------------------
// Mask type

const Tensor* Mask::find(const std::string& name) const {
  for (const auto& [n, t] : masks)
    if (n == name) return &t;
  return nullptr;
}

size_t Mask::zero_count() const {
  size_t z = 0;
  for (const auto& [n, t] : masks)
    for (size_t i = 0; i < t.numel(); ++i)
      if (t[i] == 0.0) ++z;
  return z;
}

size_t Mask::zero_count(const std::string& name) const {
  const Tensor* t = find(name);
  if (t == nullptr) return 0;
  size_t z = 0;
  for (size_t i = 0; i < t->numel(); ++i)
    if ((*t)[i] == 0.0) ++z;
  return z;
}

size_t Mask::entry_count() const {
  size_t n = 0;
  for (const auto& [name, t] : masks) n += t.numel();
  return n;
}

double Mask::param_sparsity(const std::string& name) const {
  const Tensor* t = find(name);
  if (t == nullptr || t->numel() == 0) return 0.0;
  return static_cast<double>(zero_count(name)) / static_cast<double>(t->numel());
}

bool masks_nested(const Mask& lower, const Mask& higher) {
  for (const auto& [name, lo] : lower.masks) {
    const Tensor* hi = higher.find(name);
    if (hi == nullptr || !hi->same_shape(lo)) return false;
    for (size_t i = 0; i < lo.numel(); ++i) {
      if (lo[i] == 0.0 && (*hi)[i] != 0.0) return false;
    }
  }
  return true;
}

uint64_t mask_fingerprint(const Mask& m) {
  uint64_t h = io::fnv1a_f64(&m.target_sparsity, 1);
  for (const auto& [name, t] : m.masks) {
    h = io::fnv1a_str(name, h);
    h = io::fnv1a_f64(t.data(), t.numel(), h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Saliency

SaliencyAccum saliency_accum_from_string(const std::string& s) {
  if (s == "signed") return SaliencyAccum::kSignedSum;
  if (s == "abs") return SaliencyAccum::kAbsSum;
  throw std::invalid_argument("unknown saliency accumulation '" + s + "' (expected signed or abs)");
}

const char* saliency_accum_name(SaliencyAccum a) {
  return a == SaliencyAccum::kSignedSum ? "signed" : "abs";
}

const Tensor* SaliencyMap::find(const std::string& name) const {
  for (const auto& [n, t] : scores)
    if (n == name) return &t;
  return nullptr;
}

size_t SaliencyMap::entry_count() const {
  size_t n = 0;
  for (const auto& [name, t] : scores) n += t.numel();
  return n;
}

SaliencyMap compute_saliency(const Model& model, const Dataset& dataset, double subset_fraction,
                             uint64_t seed, SaliencyAccum accum,
                             const std::vector<Tensor>* initial_snapshot) {
  if (dataset.size() == 0 || dataset.train_count == 0) {
    throw std::invalid_argument("compute_saliency: empty dataset");
  }
  if (!(subset_fraction > 0.0) || subset_fraction > 1.0) {
    throw std::invalid_argument("compute_saliency: subset fraction must be in (0, 1]");
  }

  SaliencyMap out;
  out.meta.dataset_fingerprint = dataset.fingerprint();
  out.meta.subset_fraction = subset_fraction;
  out.meta.seed = seed;
  out.meta.accum = accum;
  out.meta.total_model_entries = model.total_entries();

  if (initial_snapshot != nullptr) {
    const auto snap = model.snapshot();
    bool same = snap.size() == initial_snapshot->size();
    for (size_t i = 0; same && i < snap.size(); ++i) {
      same = snap[i].bitwise_equal((*initial_snapshot)[i]);
    }
    if (!same) out.meta.warning = "model weights differ from the provided initial snapshot";
  }

  // All-ones mask so every maskable param carries a mask node.
  Mask ones;
  ones.target_sparsity = 0.0;
  ones.cap = 1.0;
  for (const Param& p : model.params()) {
    if (p.maskable) ones.masks.emplace_back(p.name, Tensor::full(p.value.shape(), 1.0));
  }

  std::vector<Tensor> acc;
  for (const Param& p : model.params()) {
    if (p.maskable) acc.push_back(Tensor::zeros(p.value.shape()));
  }

  Rng rng(derive_seed(seed, 404));
  auto batches = dataset.epoch_batches(rng);
  size_t use = static_cast<size_t>(
      std::ceil(subset_fraction * static_cast<double>(batches.size())));
  use = std::min(use, batches.size());
  out.meta.batches_used = use;

  for (size_t bi = 0; bi < use; ++bi) {
    Tensor bx = dataset.gather_inputs(batches[bi]);
    Tensor by = dataset.gather_targets(batches[bi]);
    LossGraph lg = batch_loss(model, bx, by, &ones);
    lg.graph.evaluate(lg.loss);
    lg.graph.backward(lg.loss);
    size_t ai = 0;
    for (size_t pi = 0; pi < model.params().size(); ++pi) {
      if (!model.params()[pi].maskable) continue;
      const Tensor& g = lg.graph.grad(lg.mask_nodes[pi]);
      Tensor& a = acc[ai++];
      if (accum == SaliencyAccum::kSignedSum) {
        for (size_t i = 0; i < g.numel(); ++i) a[i] += g[i];
      } else {
        for (size_t i = 0; i < g.numel(); ++i) a[i] += std::fabs(g[i]);
      }
    }
  }

  size_t ai = 0;
  for (const Param& p : model.params()) {
    if (!p.maskable) continue;
    Tensor& a = acc[ai++];
    for (size_t i = 0; i < a.numel(); ++i) a[i] = std::fabs(a[i]);
    out.scores.emplace_back(p.name, std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mask generation

bool glob_match(const std::string& pattern, const std::string& name) {
  size_t p = 0, n = 0;
  size_t star = std::string::npos, star_n = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      star_n = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++star_n;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

namespace {
bool excluded(const std::string& name, const std::vector<std::string>& patterns) {
  for (const auto& pat : patterns)
    if (glob_match(pat, name)) return true;
  return false;
}

struct EntryRef {
  double score;
  size_t param;  // index into saliency.scores
  size_t index;  // flat index within the param
};
}  // namespace

Mask generate_mask(const SaliencyMap& saliency, double target_sparsity, double cap,
                   const std::vector<std::string>& exclude_patterns) {
  if (saliency.scores.empty()) throw std::invalid_argument("generate_mask: empty saliency map");
  if (target_sparsity < 0.0 || target_sparsity >= 1.0) {
    throw std::invalid_argument("generate_mask: target sparsity must be in [0, 1)");
  }
  if (!(cap > 0.0) || cap > 1.0) {
    throw std::invalid_argument("generate_mask: cap must be in (0, 1]");
  }

  Mask mask;
  mask.target_sparsity = target_sparsity;
  mask.cap = cap;

  std::vector<size_t> included;  // indices into saliency.scores
  size_t maskable = 0;
  for (size_t i = 0; i < saliency.scores.size(); ++i) {
    const auto& [name, scores] = saliency.scores[i];
    mask.masks.emplace_back(name, Tensor::full(scores.shape(), 1.0));
    if (!excluded(name, exclude_patterns)) {
      included.push_back(i);
      maskable += scores.numel();
    }
  }
  if (maskable == 0) throw std::invalid_argument("generate_mask: every param is excluded");

  size_t want = static_cast<size_t>(
      std::llround(target_sparsity * static_cast<double>(maskable)));

  // Per-param zero budget under the cap.
  std::vector<size_t> budget(saliency.scores.size(), 0);
  size_t max_zeros = 0;
  for (size_t i : included) {
    budget[i] = static_cast<size_t>(
        std::floor(cap * static_cast<double>(saliency.scores[i].second.numel())));
    max_zeros += budget[i];
  }
  if (want > max_zeros) {
    double achievable = static_cast<double>(max_zeros) / static_cast<double>(maskable);
    throw std::runtime_error(
        "generate_mask: target sparsity " + std::to_string(target_sparsity) +
        " infeasible under cap; max achievable sparsity is " + std::to_string(achievable));
  }

  // Ascending by (saliency, param name, flat index). Params are already in
  // declaration order, so comparing names keeps the tie-break stable.
  std::vector<EntryRef> entries;
  entries.reserve(maskable);
  for (size_t i : included) {
    const Tensor& s = saliency.scores[i].second;
    for (size_t j = 0; j < s.numel(); ++j) entries.push_back({s[j], i, j});
  }
  std::sort(entries.begin(), entries.end(), [&](const EntryRef& a, const EntryRef& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.param != b.param)
      return saliency.scores[a.param].first < saliency.scores[b.param].first;
    return a.index < b.index;
  });

  std::vector<size_t> zeroed(saliency.scores.size(), 0);
  size_t placed = 0;
  for (const EntryRef& e : entries) {
    if (placed == want) break;
    if (zeroed[e.param] >= budget[e.param]) continue;  // capped; redirect to next lowest
    mask.masks[e.param].second[e.index] = 0.0;
    ++zeroed[e.param];
    ++placed;
  }

  if (saliency.meta.total_model_entries > 0) {
    mask.achieved_overall_sparsity =
        static_cast<double>(placed) / static_cast<double>(saliency.meta.total_model_entries);
  }
  return mask;
}

double overall_sparsity(const Mask& mask, const Model& model) {
  for (const auto& [name, t] : mask.masks) {
    if (model.find(name) == nullptr) {
      throw std::invalid_argument("overall_sparsity: mask names unknown param " + name);
    }
  }
  return static_cast<double>(mask.zero_count()) / static_cast<double>(model.total_entries());
}

// ---------------------------------------------------------------------------
// File formats

namespace {
constexpr char kSaliencyMagic[9] = "SNIPSAL\x01";
constexpr char kMaskMagic[9] = "SNIPMSK\x01";
constexpr uint32_t kFormatVersion = 1;
}  // namespace

void save_saliency(const SaliencyMap& s, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_saliency: cannot write " + path);
  io::write_magic(os, kSaliencyMagic);
  io::write_u32(os, kFormatVersion);
  io::write_u64(os, s.meta.dataset_fingerprint);
  io::write_f64(os, s.meta.subset_fraction);
  io::write_u64(os, s.meta.seed);
  io::write_u8(os, static_cast<uint8_t>(s.meta.accum));
  io::write_u64(os, s.meta.total_model_entries);
  io::write_u64(os, s.meta.batches_used);
  io::write_string(os, s.meta.warning);
  io::write_u32(os, static_cast<uint32_t>(s.scores.size()));
  for (const auto& [name, t] : s.scores) {
    io::write_string(os, name);
    io::write_tensor(os, t);
  }
  if (!os) throw std::runtime_error("save_saliency: write failed for " + path);
}

SaliencyMap load_saliency(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_saliency: cannot open " + path);
  io::expect_magic(is, kSaliencyMagic, "saliency");
  uint32_t version = io::read_u32(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("load_saliency: unsupported version " + std::to_string(version));
  }
  SaliencyMap s;
  s.meta.dataset_fingerprint = io::read_u64(is);
  s.meta.subset_fraction = io::read_f64(is);
  s.meta.seed = io::read_u64(is);
  s.meta.accum = static_cast<SaliencyAccum>(io::read_u8(is));
  s.meta.total_model_entries = io::read_u64(is);
  s.meta.batches_used = io::read_u64(is);
  s.meta.warning = io::read_string(is);
  uint32_t count = io::read_u32(is);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_string(is);
    Tensor t = io::read_tensor(is);
    s.scores.emplace_back(std::move(name), std::move(t));
  }
  return s;
}

void save_mask(const Mask& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_mask: cannot write " + path);
  io::write_magic(os, kMaskMagic);
  io::write_u32(os, kFormatVersion);
  io::write_f64(os, m.target_sparsity);
  io::write_f64(os, m.achieved_overall_sparsity);
  io::write_f64(os, m.cap);
  io::write_u32(os, static_cast<uint32_t>(m.masks.size()));
  for (const auto& [name, t] : m.masks) {
    io::write_string(os, name);
    io::write_u32(os, static_cast<uint32_t>(t.ndim()));
    for (size_t d : t.shape()) io::write_u64(os, d);
    for (size_t i = 0; i < t.numel(); ++i) io::write_u8(os, t[i] != 0.0 ? 1 : 0);
  }
  if (!os) throw std::runtime_error("save_mask: write failed for " + path);
}

Mask load_mask(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_mask: cannot open " + path);
  io::expect_magic(is, kMaskMagic, "mask");
  uint32_t version = io::read_u32(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("load_mask: unsupported version " + std::to_string(version));
  }
  Mask m;
  m.target_sparsity = io::read_f64(is);
  m.achieved_overall_sparsity = io::read_f64(is);
  m.cap = io::read_f64(is);
  uint32_t count = io::read_u32(is);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_string(is);
    uint32_t nd = io::read_u32(is);
    if (nd == 0 || nd > 8) throw std::runtime_error("load_mask: bad tensor rank");
    std::vector<size_t> shape(nd);
    for (auto& d : shape) d = io::read_u64(is);
    Tensor t(shape);
    for (size_t j = 0; j < t.numel(); ++j) t[j] = io::read_u8(is) != 0 ? 1.0 : 0.0;
    m.masks.emplace_back(std::move(name), std::move(t));
  }
  return m;
}

namespace {
void validate_named_tensors(const std::vector<std::pair<std::string, Tensor>>& items,
                            const Model& model, const char* what) {
  std::string unknown, mismatched;
  for (const auto& [name, t] : items) {
    const Param* p = model.find(name);
    if (p == nullptr) {
      unknown += unknown.empty() ? name : ", " + name;
    } else if (!p->value.same_shape(t)) {
      mismatched += (mismatched.empty() ? "" : ", ") + name + " (" + t.shape_str() + " vs " +
                    p->value.shape_str() + ")";
    }
  }
  if (!unknown.empty()) {
    throw std::runtime_error(std::string(what) + ": unknown params: " + unknown);
  }
  if (!mismatched.empty()) {
    throw std::runtime_error(std::string(what) + ": shape mismatch: " + mismatched);
  }
}
}  // namespace

void validate_saliency(const SaliencyMap& s, const Model& model) {
  validate_named_tensors(s.scores, model, "saliency");
}

void validate_mask(const Mask& m, const Model& model) {
  validate_named_tensors(m.masks, model, "mask");
}

}  // namespace sniper
