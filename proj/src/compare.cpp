#include "sniper/compare.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sniper/plot.hpp"
#include "sniper/pruning.hpp"

namespace sniper {

void ComparisonSpec::validate() const {
  if (seeds.empty()) throw std::invalid_argument("comparison: at least one seed required");
  if (levels.empty()) throw std::invalid_argument("comparison: at least one sparsity level required");
  if (epochs < 1) throw std::invalid_argument("comparison: epochs must be >= 1");
  for (double l : levels) {
    if (l <= 0.0 || l >= 1.0) throw std::invalid_argument("comparison: levels must be in (0, 1)");
    if (schedules.find(l) == schedules.end()) {
      throw std::invalid_argument("comparison: missing schedule for level " + std::to_string(l));
    }
  }
  for (const auto& [level, sched] : schedules) {
    sched.validate();
    // Paired comparison: the decaying run starts where the constant run sits.
    if (std::find(levels.begin(), levels.end(), sched.steps.front().sparsity) == levels.end()) {
      throw std::invalid_argument("comparison: schedule initial sparsity " +
                                  std::to_string(sched.steps.front().sparsity) +
                                  " is not among the constant levels");
    }
  }
  sniper.validate();
}

ComparisonSpec ComparisonSpec::from_kv(const KvFile& kv) {
  ComparisonSpec spec;
  spec.d_in = static_cast<size_t>(kv.get_int_or("d_in", 16));
  spec.teacher_hidden = static_cast<size_t>(kv.get_int_or("teacher_hidden", 8));
  spec.student_hidden = static_cast<size_t>(kv.get_int_or("student_hidden", 64));
  spec.n_samples = static_cast<size_t>(kv.get_int_or("n_samples", 1000));
  spec.noise_std = kv.get_double_or("noise_std", 0.05);
  spec.batch_size = static_cast<size_t>(kv.get_int_or("batch_size", 32));
  spec.val_fraction = kv.get_double_or("val_fraction", 0.2);
  spec.activation = activation_from_string(kv.get_or("activation", "tanh"));
  spec.epochs = static_cast<int>(kv.get_int_or("epochs", 60));
  spec.seeds = split_u64s(kv.get_or("seeds", "1"));
  spec.levels = split_doubles(kv.get_or("levels", "0.2,0.4"));
  spec.optimizer = opt_kind_from_string(kv.get_or("optimizer", "adam"));
  spec.base_lr = kv.get_double_or("base_lr", 1e-3);
  spec.sniper = SniperConfig::from_kv(kv);

  for (const std::string& key : kv.keys()) {
    if (key.rfind("schedule.", 0) != 0) continue;
    SparsitySchedule sched = parse_schedule(kv.get(key));
    double level = sched.steps.front().sparsity;
    std::string suffix = key.substr(9);
    size_t pos = 0;
    double labeled = std::stod(suffix, &pos);
    if (pos != suffix.size() || labeled != level) {
      throw std::runtime_error(kv.origin() + ": key '" + key +
                               "' does not match its schedule's initial sparsity");
    }
    spec.schedules[level] = std::move(sched);
  }
  spec.validate();
  return spec;
}

ComparisonSpec ComparisonSpec::from_file(const std::string& path) {
  return from_kv(KvFile::parse_file(path));
}

namespace {

std::string level_tag(double level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", level);
  return buf;
}

struct Cell {
  std::string variant;
  double level;
  uint64_t seed;
};

// One fully independent comparison cell: builds its own dataset, model,
// saliency and masks, then trains.
RunRecord run_cell(const ComparisonSpec& spec, const Cell& cell, const std::string& out_dir) {
  RunRecord rec;
  rec.variant = cell.variant;
  rec.level = cell.level;
  rec.seed = cell.seed;
  std::string name = "run_" + cell.variant +
                     (cell.variant == "baseline" ? "" : "_" + level_tag(cell.level)) + "_seed" +
                     std::to_string(cell.seed) + ".csv";
  rec.csv_path = out_dir + "/" + name;
  try {
    TeacherStudent ts =
        make_teacher_student(spec.d_in, spec.teacher_hidden, spec.student_hidden, spec.n_samples,
                             spec.noise_std, cell.seed, spec.batch_size, spec.val_fraction,
                             spec.activation);

    SparsitySchedule schedule;
    if (cell.variant == "baseline") {
      schedule = parse_schedule("1:0.0");
    } else if (cell.variant == "constant") {
      schedule.steps = {{1, cell.level}};
      schedule.validate();
    } else {
      schedule = spec.schedules.at(cell.level);
    }

    std::vector<Mask> masks;
    std::set<double> needed = schedule.nonzero_sparsities();
    if (!needed.empty()) {
      SaliencyMap sal = compute_saliency(ts.student, ts.dataset, spec.sniper.saliency_subset_fraction,
                                         cell.seed, spec.sniper.accum);
      for (double s : needed) {
        masks.push_back(
            generate_mask(sal, s, spec.sniper.max_param_sparsity, spec.sniper.exclude_patterns));
      }
    }

    TrainOptions opts;
    opts.epochs = spec.epochs;
    opts.optimizer = spec.optimizer;
    opts.base_lr = spec.base_lr;

    Trainer trainer(std::move(ts.student), std::move(ts.dataset), std::move(schedule),
                    std::move(masks), spec.sniper, opts);
    rec.result = trainer.run();
    rec.result.save_csv(rec.csv_path);
    rec.status = "ok";
  } catch (const std::exception& e) {
    rec.status = e.what();
  }
  return rec;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nan("");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_summary_csv(const ComparisonSpec& spec, const std::vector<RunRecord>& records,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("summary: cannot write " + path);

  os << "variant,level";
  for (uint64_t s : spec.seeds) os << ",final_train_s" << s;
  os << ",final_train_mean";
  for (uint64_t s : spec.seeds) os << ",final_val_s" << s;
  os << ",final_val_mean";
  for (uint64_t s : spec.seeds) os << ",best_val_s" << s;
  os << ",best_val_mean,status\n";

  auto emit_row = [&](const std::string& variant, double level) {
    std::vector<double> ftr, fva, bva;
    int failed = 0;
    std::vector<std::string> cols_ftr, cols_fva, cols_bva;
    for (uint64_t seed : spec.seeds) {
      const RunRecord* rec = nullptr;
      for (const RunRecord& r : records) {
        if (r.variant == variant && r.level == level && r.seed == seed) rec = &r;
      }
      if (rec == nullptr || rec->status != "ok" || rec->result.rows.empty()) {
        ++failed;
        cols_ftr.push_back("nan");
        cols_fva.push_back("nan");
        cols_bva.push_back("nan");
        continue;
      }
      ftr.push_back(rec->result.final_train_loss());
      fva.push_back(rec->result.final_val_loss());
      bva.push_back(rec->result.best_val_loss());
      cols_ftr.push_back(fmt17(ftr.back()));
      cols_fva.push_back(fmt17(fva.back()));
      cols_bva.push_back(fmt17(bva.back()));
    }
    os << variant << "," << level_tag(level);
    for (const auto& c : cols_ftr) os << "," << c;
    os << "," << fmt17(mean_of(ftr));
    for (const auto& c : cols_fva) os << "," << c;
    os << "," << fmt17(mean_of(fva));
    for (const auto& c : cols_bva) os << "," << c;
    os << "," << fmt17(mean_of(bva));
    os << "," << (failed == 0 ? "ok" : "incomplete(" + std::to_string(failed) + " failed)") << "\n";
  };

  emit_row("baseline", 0.0);
  for (double level : spec.levels) {
    emit_row("constant", level);
    emit_row("sniper", level);
  }
  if (!os) throw std::runtime_error("summary: write failed for " + path);
}

ComparisonOutput run_comparison(const ComparisonSpec& spec, const std::string& out_dir, int jobs) {
  spec.validate();
  std::filesystem::create_directories(out_dir);

  std::vector<Cell> cells;
  for (uint64_t seed : spec.seeds) {
    cells.push_back({"baseline", 0.0, seed});
    for (double level : spec.levels) {
      cells.push_back({"constant", level, seed});
      cells.push_back({"sniper", level, seed});
    }
  }

  std::vector<RunRecord> records(cells.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < cells.size(); ++i) records[i] = run_cell(spec, cells[i], out_dir);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    int n = std::min<int>(jobs, static_cast<int>(cells.size()));
    for (int t = 0; t < n; ++t) {
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
          records[i] = run_cell(spec, cells[i], out_dir);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  ComparisonOutput out;
  out.records = records;
  out.summary_path = out_dir + "/summary.csv";
  write_summary_csv(spec, records, out.summary_path);

  // One chart per level, first seed: baseline vs constant vs decaying.
  uint64_t seed0 = spec.seeds.front();
  for (double level : spec.levels) {
    std::vector<LabeledResult> series;
    for (const RunRecord& r : records) {
      if (r.seed != seed0 || r.status != "ok") continue;
      bool in_chart = r.variant == "baseline" || r.level == level;
      if (!in_chart) continue;
      std::string label = r.variant == "baseline" ? "baseline" : r.variant + " " + level_tag(level);
      series.push_back({label, r.result});
    }
    if (series.empty()) continue;
    std::string path = out_dir + "/loss_" + level_tag(level) + ".svg";
    write_loss_chart(series, path);
    out.chart_paths.push_back(path);
  }
  return out;
}

SuggestOutcome suggest_schedule(const ExperimentResult& constant_run,
                                const ExperimentResult& baseline_run,
                                const HalvingPolicy& policy) {
  if (!(policy.min_sparsity > 0.0)) {
    throw std::invalid_argument("suggest_schedule: min sparsity must be > 0");
  }
  if (constant_run.rows.empty() || baseline_run.rows.empty()) {
    throw std::invalid_argument("suggest_schedule: empty run");
  }
  if (constant_run.rows.size() != baseline_run.rows.size()) {
    throw std::invalid_argument("suggest_schedule: runs cover different epochs");
  }
  for (size_t i = 0; i < constant_run.rows.size(); ++i) {
    if (constant_run.rows[i].epoch != baseline_run.rows[i].epoch) {
      throw std::invalid_argument("suggest_schedule: runs cover different epochs");
    }
  }
  double s0 = constant_run.rows.front().sparsity;
  if (s0 <= 0.0) {
    throw std::invalid_argument("suggest_schedule: constant run has zero sparsity");
  }

  SuggestOutcome out;
  int crossing = 0;
  for (size_t i = 0; i < constant_run.rows.size(); ++i) {
    double c = policy.use_validation_loss ? constant_run.rows[i].val_loss
                                          : constant_run.rows[i].train_loss;
    double b = policy.use_validation_loss ? baseline_run.rows[i].val_loss
                                          : baseline_run.rows[i].train_loss;
    if (c > b) {
      crossing = constant_run.rows[i].epoch;
      break;
    }
  }
  if (crossing == 0) {
    out.message = "no crossing; keep constant sparsity";
    return out;
  }
  out.crossing_epoch = crossing;

  // First reduction at the crossing epoch (but never before epoch 2, so the
  // schedule still opens at the initial sparsity); later phases copy the
  // triggering phase length, doubling it after each reduction.
  int b1 = std::max(crossing, 2);
  int gap = b1 - 1;
  SparsitySchedule sched;
  sched.steps.push_back({1, s0});
  double s = s0;
  int b = b1;
  while (true) {
    s /= 2.0;
    if (s < policy.min_sparsity) {
      sched.steps.push_back({b, 0.0});
      break;
    }
    sched.steps.push_back({b, s});
    b += gap;
    if (policy.double_phase_length) gap *= 2;
  }
  sched.validate();
  out.message = "crossing at epoch " + std::to_string(crossing);
  out.schedule = std::move(sched);
  return out;
}

}  // namespace sniper
