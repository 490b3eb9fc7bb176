#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace sniper {

// Deterministic RNG. std::mt19937_64 output is fixed by the standard; the
// mappings to doubles below avoid std distributions, whose streams are
// implementation-defined and would break bit-exact reproducibility.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller with a cached spare.
  double normal();

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return engine_() % n; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable mixing for deriving per-purpose seeds from one experiment seed.
uint64_t derive_seed(uint64_t seed, uint64_t salt);

}  // namespace sniper
