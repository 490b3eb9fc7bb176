#include "sniper/trainer.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sniper/io.hpp"

namespace sniper {

OptKind opt_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptKind::kSgd;
  if (s == "adam") return OptKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd or adam)");
}

const char* opt_kind_name(OptKind k) { return k == OptKind::kSgd ? "sgd" : "adam"; }

void Optimizer::init(const Model& model) {
  m.clear();
  v.clear();
  t = 0;
  if (kind == OptKind::kAdam) {
    for (const Param& p : model.params()) {
      m.push_back(Tensor::zeros(p.value.shape()));
      v.push_back(Tensor::zeros(p.value.shape()));
    }
  }
}

void Optimizer::step(Model& model, const std::vector<double>& lr_per_param, const Mask* mask) {
  if (lr_per_param.size() != model.params().size()) {
    throw std::invalid_argument("optimizer: lr table size mismatch");
  }
  if (kind == OptKind::kAdam) ++t;
  for (size_t pi = 0; pi < model.params().size(); ++pi) {
    Param& p = model.params()[pi];
    const Tensor* pm = mask != nullptr ? mask->find(p.name) : nullptr;
    double lr = lr_per_param[pi];
    for (size_t i = 0; i < p.value.numel(); ++i) {
      if (pm != nullptr && (*pm)[i] == 0.0) continue;  // frozen while masked
      double g = p.grad[i];
      if (kind == OptKind::kSgd) {
        p.value[i] -= lr * g;
      } else {
        m[pi][i] = adam.beta1 * m[pi][i] + (1.0 - adam.beta1) * g;
        v[pi][i] = adam.beta2 * v[pi][i] + (1.0 - adam.beta2) * g * g;
        double mhat = m[pi][i] / (1.0 - std::pow(adam.beta1, static_cast<double>(t)));
        double vhat = v[pi][i] / (1.0 - std::pow(adam.beta2, static_cast<double>(t)));
        p.value[i] -= lr * mhat / (std::sqrt(vhat) + adam.eps);
      }
    }
  }
}

Trainer::Trainer(Model model, Dataset dataset, SparsitySchedule schedule, std::vector<Mask> masks,
                 SniperConfig config, TrainOptions options)
    : model_(std::move(model)),
      dataset_(std::move(dataset)),
      schedule_(std::move(schedule)),
      masks_(std::move(masks)),
      config_(std::move(config)),
      options_(std::move(options)),
      rng_(derive_seed(dataset_.seed, 505)) {
  schedule_.validate();
  config_.validate();
  if (options_.epochs < 1) throw std::invalid_argument("trainer: epochs must be >= 1");
  if (dataset_.train_count == 0) throw std::invalid_argument("trainer: empty training split");
  if (dataset_.val_count() == 0) {
    throw std::invalid_argument("trainer: dataset has no validation split");
  }

  // Every scheduled sparsity needs its mask before training starts.
  for (double s : schedule_.nonzero_sparsities()) {
    bool found = false;
    for (const Mask& m : masks_) found = found || m.target_sparsity == s;
    if (!found) {
      throw std::invalid_argument("trainer: missing mask for scheduled sparsity " +
                                  std::to_string(s));
    }
  }
  // Consecutive schedule steps must use nested masks so "newly activated"
  // is well-defined at every swap.
  for (size_t i = 0; i + 1 < schedule_.steps.size(); ++i) {
    const Mask& hi = mask_for(schedule_.steps[i].sparsity);
    double lo_s = schedule_.steps[i + 1].sparsity;
    const Mask& lo = lo_s > 0.0 ? mask_for(lo_s) : all_ones_mask();
    if (!masks_nested(lo, hi)) {
      throw std::invalid_argument("trainer: schedule masks not nested between sparsities " +
                                  std::to_string(schedule_.steps[i].sparsity) + " and " +
                                  std::to_string(lo_s));
    }
  }
  for (const Mask& m : masks_) validate_mask(m, model_);

  initial_snapshot_ = model_.snapshot();
  opt_.kind = options_.optimizer;
  opt_.base_lr = options_.base_lr;
  opt_.adam = options_.adam;
  opt_.init(model_);
  lr_per_param_.assign(model_.params().size(), opt_.base_lr);
}

const Mask& Trainer::mask_for(double sparsity) const {
  for (const Mask& m : masks_)
    if (m.target_sparsity == sparsity) return m;
  throw std::logic_error("trainer: no mask for sparsity " + std::to_string(sparsity));
}

Mask Trainer::all_ones_mask() const {
  Mask ones;
  ones.target_sparsity = 0.0;
  ones.cap = 1.0;
  for (const Param& p : model_.params()) {
    if (p.maskable) ones.masks.emplace_back(p.name, Tensor::full(p.value.shape(), 1.0));
  }
  return ones;
}

void Trainer::refresh_lr() {
  double overall = 0.0;
  if (current_mask_.has_value()) {
    overall = static_cast<double>(current_mask_->zero_count()) /
              static_cast<double>(model_.total_entries());
  }
  for (size_t pi = 0; pi < model_.params().size(); ++pi) {
    double ps = current_mask_.has_value() ? current_mask_->param_sparsity(model_.params()[pi].name)
                                          : 0.0;
    lr_per_param_[pi] =
        lr_scale(ps, overall, config_.lr_scale_mode, opt_.base_lr, config_.max_lr);
  }
}

void Trainer::enter_epoch(int epoch) {
  size_t step = schedule_.step_index_at(epoch);
  if (epoch == 1) {
    schedule_idx_ = step;  // always 0: schedules start at epoch 1
    double s = schedule_.steps[step].sparsity;
    if (s > 0.0) {
      current_mask_ = mask_for(s);
      apply_mask(model_, *current_mask_);
    } else {
      current_mask_.reset();
    }
    refresh_lr();
    return;
  }
  if (step == schedule_idx_) return;

  // Sparsity reduction boundary: restore newly activated weights before the
  // first batch of the epoch.
  double s = schedule_.steps[step].sparsity;
  Mask next = s > 0.0 ? mask_for(s) : all_ones_mask();
  if (!current_mask_.has_value()) {
    throw std::logic_error("trainer: swap without an active mask");
  }
  swap_mask(model_, *current_mask_, next, config_.restore_mode, initial_snapshot_);
  if (config_.reset_moments_on_activate && opt_.kind == OptKind::kAdam) {
    for (size_t pi = 0; pi < model_.params().size(); ++pi) {
      const Param& p = model_.params()[pi];
      const Tensor* om = current_mask_->find(p.name);
      const Tensor* nm = next.find(p.name);
      if (om == nullptr || nm == nullptr) continue;
      for (size_t i = 0; i < p.value.numel(); ++i) {
        if ((*om)[i] == 0.0 && (*nm)[i] != 0.0) {
          opt_.m[pi][i] = 0.0;
          opt_.v[pi][i] = 0.0;
        }
      }
    }
  }
  if (s > 0.0) {
    current_mask_ = std::move(next);
  } else {
    current_mask_.reset();
  }
  schedule_idx_ = step;
  refresh_lr();
}

double Trainer::run_epoch(int epoch) {
  (void)epoch;
  const Mask* mask = current_mask_.has_value() ? &*current_mask_ : nullptr;
  auto batches = dataset_.epoch_batches(rng_);
  double loss_sum = 0.0;
  for (const auto& batch : batches) {
    Tensor bx = dataset_.gather_inputs(batch);
    Tensor by = dataset_.gather_targets(batch);
    LossGraph lg = batch_loss(model_, bx, by, mask);
    double loss = lg.graph.evaluate(lg.loss)[0];
    lg.graph.backward(lg.loss);

    for (size_t pi = 0; pi < model_.params().size(); ++pi) {
      Param& p = model_.params()[pi];
      p.grad = lg.graph.grad(lg.param_nodes[pi]);
      const Tensor* pm = mask != nullptr ? mask->find(p.name) : nullptr;
      if (pm != nullptr) {
        for (size_t i = 0; i < p.grad.numel(); ++i) {
          if ((*pm)[i] == 0.0) {
            assert(p.grad[i] == 0.0 && "masked entry received a nonzero gradient");
            p.grad[i] = 0.0;  // normalize -0.0 from the mul backward
          }
        }
      }
    }

    opt_.step(model_, lr_per_param_, mask);
    ++global_step_;

    // Masked weights stay exactly zero after every optimizer step.
    if (mask != nullptr) {
      for (Param& p : model_.params()) {
        const Tensor* pm = mask->find(p.name);
        if (pm == nullptr) continue;
        for (size_t i = 0; i < p.value.numel(); ++i) {
          if ((*pm)[i] == 0.0) {
            assert(p.value[i] == 0.0 && "optimizer touched a masked weight");
            p.value[i] = 0.0;
          }
        }
      }
    }

    loss_sum += loss * static_cast<double>(batch.size());
  }
  return loss_sum / static_cast<double>(dataset_.train_count);
}

double Trainer::validation_loss() {
  const Mask* mask = current_mask_.has_value() ? &*current_mask_ : nullptr;
  LossGraph lg = batch_loss(model_, dataset_.val_inputs(), dataset_.val_targets(), mask);
  return lg.graph.evaluate(lg.loss)[0];
}

ExperimentResult Trainer::run() {
  using Clock = std::chrono::steady_clock;
  for (int epoch = epochs_done_ + 1; epoch <= options_.epochs; ++epoch) {
    auto t0 = Clock::now();
    enter_epoch(epoch);
    double train = run_epoch(epoch);
    double val = validation_loss();
    double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    result_.rows.push_back(
        {epoch, schedule_.steps[schedule_idx_].sparsity, train, val, wall});
    epochs_done_ = epoch;
    if (options_.checkpoint_at.has_value() && *options_.checkpoint_at == epoch &&
        !options_.checkpoint_path.empty()) {
      save_checkpoint(options_.checkpoint_path);
    }
  }
  return result_;
}

uint64_t Trainer::config_fingerprint() const {
  uint64_t h = io::fnv1a_str("sniper-train-v1");
  for (size_t s : model_.arch().layer_sizes) h = io::fnv1a_u64(s, h);
  h = io::fnv1a_str(activation_name(model_.arch().activation), h);
  h = io::fnv1a_u64(model_.init_seed(), h);
  h = io::fnv1a_u64(dataset_.fingerprint(), h);
  h = io::fnv1a_str(schedule_.to_text(), h);
  for (const Mask& m : masks_) h = io::fnv1a_u64(mask_fingerprint(m), h);
  h = io::fnv1a_str(config_.canonical_text(), h);
  h = io::fnv1a_str(opt_kind_name(opt_.kind), h);
  h = io::fnv1a_f64(&opt_.base_lr, 1, h);
  h = io::fnv1a_f64(&opt_.adam.beta1, 1, h);
  h = io::fnv1a_f64(&opt_.adam.beta2, 1, h);
  h = io::fnv1a_f64(&opt_.adam.eps, 1, h);
  return h;
}

namespace {
constexpr char kCheckpointMagic[9] = "SNIPCKP\x01";
constexpr uint32_t kCheckpointVersion = 1;
}  // namespace

void Trainer::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
  io::write_magic(os, kCheckpointMagic);
  io::write_u32(os, kCheckpointVersion);
  io::write_u64(os, config_fingerprint());
  io::write_u32(os, static_cast<uint32_t>(epochs_done_));
  io::write_u64(os, global_step_);
  io::write_u64(os, schedule_idx_);
  io::write_u64(os, opt_.t);
  rng_.save(os);
  io::write_u32(os, static_cast<uint32_t>(model_.params().size()));
  for (const Param& p : model_.params()) {
    io::write_string(os, p.name);
    io::write_tensor(os, p.value);
  }
  io::write_u8(os, opt_.kind == OptKind::kAdam ? 1 : 0);
  if (opt_.kind == OptKind::kAdam) {
    for (const Tensor& t : opt_.m) io::write_tensor(os, t);
    for (const Tensor& t : opt_.v) io::write_tensor(os, t);
  }
  for (const Tensor& t : initial_snapshot_) io::write_tensor(os, t);
  io::write_u32(os, static_cast<uint32_t>(result_.rows.size()));
  for (const EpochRow& r : result_.rows) {
    io::write_i32(os, r.epoch);
    io::write_f64(os, r.sparsity);
    io::write_f64(os, r.train_loss);
    io::write_f64(os, r.val_loss);
    io::write_f64(os, r.wall_seconds);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Trainer Trainer::resume(const std::string& path, Model model, Dataset dataset,
                        SparsitySchedule schedule, std::vector<Mask> masks, SniperConfig config,
                        TrainOptions options) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: not found: " + path);

  Trainer tr(std::move(model), std::move(dataset), std::move(schedule), std::move(masks),
             std::move(config), std::move(options));

  io::expect_magic(is, kCheckpointMagic, "checkpoint");
  uint32_t version = io::read_u32(is);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  uint64_t fp = io::read_u64(is);
  if (fp != tr.config_fingerprint()) {
    throw std::runtime_error(
        "checkpoint: config fingerprint mismatch (refusing silent divergence)");
  }
  tr.epochs_done_ = static_cast<int>(io::read_u32(is));
  tr.global_step_ = io::read_u64(is);
  tr.schedule_idx_ = io::read_u64(is);
  tr.opt_.t = io::read_u64(is);
  tr.rng_.load(is);
  uint32_t n_params = io::read_u32(is);
  if (n_params != tr.model_.params().size()) {
    throw std::runtime_error("checkpoint: param count mismatch");
  }
  for (Param& p : tr.model_.params()) {
    std::string name = io::read_string(is);
    if (name != p.name) throw std::runtime_error("checkpoint: param order mismatch at " + name);
    Tensor t = io::read_tensor(is);
    if (!t.same_shape(p.value)) throw std::runtime_error("checkpoint: shape mismatch at " + name);
    p.value = std::move(t);
  }
  bool has_adam = io::read_u8(is) != 0;
  if (has_adam != (tr.opt_.kind == OptKind::kAdam)) {
    throw std::runtime_error("checkpoint: optimizer kind mismatch");
  }
  if (has_adam) {
    for (Tensor& t : tr.opt_.m) t = io::read_tensor(is);
    for (Tensor& t : tr.opt_.v) t = io::read_tensor(is);
  }
  for (Tensor& t : tr.initial_snapshot_) t = io::read_tensor(is);
  uint32_t n_rows = io::read_u32(is);
  tr.result_.rows.clear();
  for (uint32_t i = 0; i < n_rows; ++i) {
    EpochRow r;
    r.epoch = io::read_i32(is);
    r.sparsity = io::read_f64(is);
    r.train_loss = io::read_f64(is);
    r.val_loss = io::read_f64(is);
    r.wall_seconds = io::read_f64(is);
    tr.result_.rows.push_back(r);
  }

  // Rebuild the active mask from the schedule position.
  double s = tr.schedule_.steps[tr.schedule_idx_].sparsity;
  if (s > 0.0 && tr.epochs_done_ >= 1) {
    tr.current_mask_ = tr.mask_for(s);
  } else {
    tr.current_mask_.reset();
  }
  tr.refresh_lr();
  return tr;
}

}  // namespace sniper
