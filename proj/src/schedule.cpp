#include "sniper/schedule.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sniper {

double SparsitySchedule::sparsity_at(int epoch) const {
  return steps[step_index_at(epoch)].sparsity;
}

size_t SparsitySchedule::step_index_at(int epoch) const {
  if (epoch < 1) throw std::invalid_argument("sparsity_at: epoch must be >= 1");
  if (steps.empty()) throw std::logic_error("sparsity_at: empty schedule");
  size_t idx = 0;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].start_epoch <= epoch) idx = i;
  }
  return idx;
}

std::set<double> SparsitySchedule::nonzero_sparsities() const {
  std::set<double> out;
  for (const auto& s : steps)
    if (s.sparsity > 0.0) out.insert(s.sparsity);
  return out;
}

std::string SparsitySchedule::to_text() const {
  std::ostringstream os;
  char buf[32];
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i) os << ", ";
    if (steps[i].sparsity == 0.0) {
      std::snprintf(buf, sizeof(buf), "0.0");
    } else {
      std::snprintf(buf, sizeof(buf), "%g", steps[i].sparsity);
    }
    os << steps[i].start_epoch << ":" << buf;
  }
  return os.str();
}

void SparsitySchedule::validate() const {
  if (steps.empty()) throw std::invalid_argument("schedule: no steps");
  if (steps.front().start_epoch != 1) {
    throw std::invalid_argument("schedule: first step must start at epoch 1");
  }
  for (size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].sparsity < 0.0 || steps[i].sparsity >= 1.0) {
      throw std::invalid_argument("schedule: sparsity must be in [0, 1)");
    }
    if (i > 0) {
      if (steps[i].start_epoch <= steps[i - 1].start_epoch) {
        throw std::invalid_argument("schedule: start epochs must be strictly increasing");
      }
      if (steps[i].sparsity >= steps[i - 1].sparsity) {
        throw std::invalid_argument("schedule: sparsities must be strictly decreasing");
      }
    }
  }
  if (steps.size() > 1 && steps.back().sparsity != 0.0) {
    throw std::invalid_argument("schedule: a multi-step schedule must end at sparsity 0");
  }
}

namespace {
std::string strip_comments_and_space(const std::string& text) {
  std::string out;
  bool comment = false;
  for (char c : text) {
    if (c == '#') comment = true;
    if (c == '\n') comment = false;
    if (comment) continue;
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(c);
  }
  return out;
}
}  // namespace

SparsitySchedule parse_schedule(const std::string& text) {
  std::string body = strip_comments_and_space(text);
  if (body.empty()) throw std::invalid_argument("schedule: empty text");

  SparsitySchedule sched;
  std::stringstream ss(body);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    if (pair.empty()) continue;
    size_t colon = pair.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("schedule: expected start-epoch:sparsity, got '" + pair + "'");
    }
    ScheduleStep step;
    try {
      size_t pos = 0;
      step.start_epoch = std::stoi(pair.substr(0, colon), &pos);
      if (pos != colon) throw std::invalid_argument("");
      std::string sp = pair.substr(colon + 1);
      step.sparsity = std::stod(sp, &pos);
      if (pos != sp.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("schedule: bad step '" + pair + "'");
    }
    if (step.start_epoch < 1) throw std::invalid_argument("schedule: epochs must be >= 1");
    sched.steps.push_back(step);
  }
  sched.validate();
  return sched;
}

SparsitySchedule load_schedule(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("schedule: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_schedule(buf.str());
}

LrScaleMode lr_scale_mode_from_string(const std::string& s) {
  if (s == "none") return LrScaleMode::kNone;
  if (s == "global") return LrScaleMode::kGlobal;
  if (s == "per-param" || s == "per_param") return LrScaleMode::kPerParam;
  throw std::invalid_argument("unknown lr scale mode '" + s + "' (expected none, global or per-param)");
}

const char* lr_scale_mode_name(LrScaleMode m) {
  switch (m) {
    case LrScaleMode::kNone: return "none";
    case LrScaleMode::kGlobal: return "global";
    case LrScaleMode::kPerParam: return "per-param";
  }
  return "?";
}

RestoreMode restore_mode_from_string(const std::string& s) {
  if (s == "zeros") return RestoreMode::kZeros;
  if (s == "initial") return RestoreMode::kInitial;
  throw std::invalid_argument("unknown restore mode '" + s + "' (expected zeros or initial)");
}

const char* restore_mode_name(RestoreMode m) {
  return m == RestoreMode::kZeros ? "zeros" : "initial";
}

double lr_scale(double param_sparsity, double overall_sparsity, LrScaleMode mode, double base_lr,
                std::optional<double> max_lr) {
  if (param_sparsity < 0.0 || param_sparsity >= 1.0 || overall_sparsity < 0.0 ||
      overall_sparsity >= 1.0) {
    throw std::invalid_argument("lr_scale: sparsities must be in [0, 1)");
  }
  double lr = base_lr;
  switch (mode) {
    case LrScaleMode::kNone: break;
    case LrScaleMode::kGlobal: lr = base_lr / (1.0 - overall_sparsity); break;
    case LrScaleMode::kPerParam: lr = base_lr / (1.0 - param_sparsity); break;
  }
  if (max_lr.has_value() && lr > *max_lr) lr = *max_lr;
  return lr;
}

void swap_mask(Model& model, const Mask& old_mask, const Mask& new_mask, RestoreMode restore,
               const std::vector<Tensor>& initial_snapshot) {
  if (initial_snapshot.size() != model.params().size()) {
    throw std::invalid_argument("swap_mask: snapshot size mismatch");
  }
  // Validate every param before touching any, so a bad pair never
  // half-applies.
  for (const Param& p : model.params()) {
    const Tensor* nm = new_mask.find(p.name);
    const Tensor* om = old_mask.find(p.name);
    if (nm == nullptr && om == nullptr) continue;
    if (nm == nullptr || om == nullptr || !nm->same_shape(*om) || !nm->same_shape(p.value)) {
      throw std::invalid_argument("swap_mask: masks do not cover param " + p.name + " consistently");
    }
    for (size_t i = 0; i < nm->numel(); ++i) {
      if ((*nm)[i] == 0.0 && (*om)[i] != 0.0) {
        throw std::invalid_argument("swap_mask: masks not nested at param " + p.name);
      }
    }
  }
  for (size_t pi = 0; pi < model.params().size(); ++pi) {
    Param& p = model.params()[pi];
    const Tensor* nm = new_mask.find(p.name);
    const Tensor* om = old_mask.find(p.name);
    if (nm == nullptr || om == nullptr) continue;
    for (size_t i = 0; i < nm->numel(); ++i) {
      if ((*om)[i] == 0.0 && (*nm)[i] != 0.0) {
        p.value[i] = restore == RestoreMode::kZeros ? 0.0 : initial_snapshot[pi][i];
      }
      // active in both: untouched; masked in both: stays 0
    }
  }
}

void apply_mask(Model& model, const Mask& mask) {
  for (Param& p : model.params()) {
    const Tensor* m = mask.find(p.name);
    if (m == nullptr) continue;
    if (!m->same_shape(p.value)) {
      throw std::invalid_argument("apply_mask: mask shape mismatch for " + p.name);
    }
    for (size_t i = 0; i < m->numel(); ++i) {
      if ((*m)[i] == 0.0) p.value[i] = 0.0;
    }
  }
}

}  // namespace sniper
