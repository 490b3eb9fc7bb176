#include "sniper/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sniper/io.hpp"

namespace sniper {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void Rng::save(std::ostream& os) const {
  // mt19937_64 text serialization is exact (integer state words).
  std::ostringstream state;
  state << engine_;
  io::write_string(os, state.str());
  io::write_u8(os, has_spare_ ? 1 : 0);
  io::write_f64(os, spare_);
}

void Rng::load(std::istream& is) {
  std::istringstream state(io::read_string(is));
  state >> engine_;
  if (!state) throw std::runtime_error("rng: corrupt engine state");
  has_spare_ = io::read_u8(is) != 0;
  spare_ = io::read_f64(is);
}

uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  // splitmix64 finalizer over the combined value
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace sniper
