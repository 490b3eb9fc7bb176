#include "sniper/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sniper {

namespace {
std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str(), path);
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
  KvFile kv;
  kv.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": expected key=value, got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (kv.values_.count(key)) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                               "' (first set on line " + std::to_string(kv.lines_.at(key)) + ")");
    }
    kv.values_[key] = value;
    kv.lines_[key] = lineno;
  }
  return kv;
}

int KvFile::line_of(const std::string& key) const {
  auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

std::string KvFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::runtime_error(origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvFile::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ":" + std::to_string(line_of(key)) + ": key '" + key +
                             "' is not a number: '" + v + "'");
  }
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int64_t KvFile::get_int(const std::string& key) const {
  const std::string v = get(key);
  try {
    size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ":" + std::to_string(line_of(key)) + ": key '" + key +
                             "' is not an integer: '" + v + "'");
  }
}

int64_t KvFile::get_int_or(const std::string& key, int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

uint64_t KvFile::get_u64_or(const std::string& key, uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  try {
    size_t pos = 0;
    unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ":" + std::to_string(line_of(key)) + ": key '" + key +
                             "' is not an unsigned integer: '" + v + "'");
  }
}

std::vector<std::string> KvFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) {
    size_t pos = 0;
    double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::runtime_error("bad number in list: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<uint64_t> split_u64s(const std::string& s) {
  std::vector<uint64_t> out;
  for (const std::string& item : split_list(s)) {
    size_t pos = 0;
    unsigned long long v = std::stoull(item, &pos);
    if (pos != item.size()) throw std::runtime_error("bad integer in list: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void SniperConfig::validate() const {
  if (max_lr.has_value() && !(*max_lr > 0.0)) {
    throw std::invalid_argument("sniper config: max-lr must be > 0");
  }
  if (!(max_param_sparsity > 0.0) || max_param_sparsity > 1.0) {
    throw std::invalid_argument("sniper config: max-param-sparsity must be in (0, 1]");
  }
  if (!(saliency_subset_fraction > 0.0) || saliency_subset_fraction > 1.0) {
    throw std::invalid_argument("sniper config: saliency-subset-fraction must be in (0, 1]");
  }
}

std::string SniperConfig::canonical_text() const {
  std::ostringstream os;
  os << "lr_scale_mode=" << lr_scale_mode_name(lr_scale_mode) << "\n";
  os << "max_lr=";
  if (max_lr.has_value()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", *max_lr);
    os << buf;
  } else {
    os << "none";
  }
  os << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", max_param_sparsity);
  os << "max_param_sparsity=" << buf << "\n";
  os << "exclude=";
  for (size_t i = 0; i < exclude_patterns.size(); ++i) {
    if (i) os << ",";
    os << exclude_patterns[i];
  }
  os << "\n";
  os << "restore_mode=" << restore_mode_name(restore_mode) << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", saliency_subset_fraction);
  os << "saliency_subset_fraction=" << buf << "\n";
  os << "accum=" << saliency_accum_name(accum) << "\n";
  os << "seed=" << seed << "\n";
  os << "reset_moments_on_activate=" << (reset_moments_on_activate ? 1 : 0) << "\n";
  return os.str();
}

SniperConfig SniperConfig::from_kv(const KvFile& kv) {
  SniperConfig c;
  c.lr_scale_mode = lr_scale_mode_from_string(kv.get_or("lr_scale_mode", "per-param"));
  if (kv.has("max_lr") && kv.get("max_lr") != "none") c.max_lr = kv.get_double("max_lr");
  c.max_param_sparsity = kv.get_double_or("max_param_sparsity", 0.75);
  c.exclude_patterns = split_list(kv.get_or("exclude", ""));
  c.restore_mode = restore_mode_from_string(kv.get_or("restore_mode", "zeros"));
  c.saliency_subset_fraction = kv.get_double_or("saliency_subset_fraction", 1.0);
  c.accum = saliency_accum_from_string(kv.get_or("accum", "signed"));
  c.seed = kv.get_u64_or("seed", 0);
  c.reset_moments_on_activate = kv.get_int_or("reset_moments_on_activate", 0) != 0;
  c.validate();
  return c;
}

SniperConfig SniperConfig::from_file(const std::string& path) {
  return from_kv(KvFile::parse_file(path));
}

}  // namespace sniper
