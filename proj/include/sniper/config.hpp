#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sniper/pruning.hpp"
#include "sniper/schedule.hpp"

namespace sniper {

// Flat key=value text; blank lines and # comments skipped. Errors carry
// origin:line.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key) const;  // throws when missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int_or(const std::string& key, int64_t fallback) const;
  uint64_t get_u64_or(const std::string& key, uint64_t fallback) const;
  std::vector<std::string> keys() const;

  const std::string& origin() const { return origin_; }

 private:
  int line_of(const std::string& key) const;
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

std::vector<std::string> split_list(const std::string& s);  // comma-separated
std::vector<double> split_doubles(const std::string& s);
std::vector<uint64_t> split_u64s(const std::string& s);

// Run options for SNIPER training beyond the schedule itself.
struct SniperConfig {
  LrScaleMode lr_scale_mode = LrScaleMode::kPerParam;
  std::optional<double> max_lr;
  double max_param_sparsity = 0.75;
  std::vector<std::string> exclude_patterns;
  RestoreMode restore_mode = RestoreMode::kZeros;
  double saliency_subset_fraction = 1.0;
  SaliencyAccum accum = SaliencyAccum::kSignedSum;
  uint64_t seed = 0;
  bool reset_moments_on_activate = false;

  void validate() const;
  std::string canonical_text() const;

  static SniperConfig from_kv(const KvFile& kv);
  static SniperConfig from_file(const std::string& path);
};

}  // namespace sniper
