#include "sniper/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sniper/io.hpp"

namespace sniper {

std::vector<std::vector<size_t>> Dataset::epoch_batches(Rng& rng) const {
  std::vector<size_t> order(train_count);
  for (size_t i = 0; i < train_count; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < train_count; start += batch_size) {
    size_t end = std::min(start + batch_size, train_count);
    batches.emplace_back(order.begin() + static_cast<ptrdiff_t>(start),
                         order.begin() + static_cast<ptrdiff_t>(end));
  }
  return batches;
}

namespace {
Tensor gather(const Tensor& t, const std::vector<size_t>& rows) {
  size_t c = t.cols();
  Tensor out({rows.size(), c});
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < c; ++j) out.at(i, j) = t.at(rows[i], j);
  return out;
}

Tensor slice_rows(const Tensor& t, size_t begin, size_t end) {
  size_t c = t.cols();
  Tensor out({end - begin, c});
  for (size_t i = begin; i < end; ++i)
    for (size_t j = 0; j < c; ++j) out.at(i - begin, j) = t.at(i, j);
  return out;
}
}  // namespace

Tensor Dataset::gather_inputs(const std::vector<size_t>& rows) const { return gather(inputs, rows); }
Tensor Dataset::gather_targets(const std::vector<size_t>& rows) const { return gather(targets, rows); }
Tensor Dataset::val_inputs() const { return slice_rows(inputs, train_count, size()); }
Tensor Dataset::val_targets() const { return slice_rows(targets, train_count, size()); }

uint64_t Dataset::fingerprint() const {
  uint64_t h = io::fnv1a_f64(inputs.data(), inputs.numel());
  h = io::fnv1a_f64(targets.data(), targets.numel(), h);
  h = io::fnv1a_u64(inputs.rows(), h);
  h = io::fnv1a_u64(inputs.cols(), h);
  h = io::fnv1a_u64(targets.cols(), h);
  h = io::fnv1a_u64(batch_size, h);
  h = io::fnv1a_u64(seed, h);
  h = io::fnv1a_u64(train_count, h);
  return h;
}

void Dataset::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dataset: cannot write " + path);
  for (size_t j = 0; j < d_in(); ++j) os << (j ? "," : "") << "x" << j;
  for (size_t j = 0; j < d_out(); ++j) os << ",y" << j;
  os << "\n";
  char buf[40];
  for (size_t i = 0; i < size(); ++i) {
    for (size_t j = 0; j < d_in(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", inputs.at(i, j));
      os << (j ? "," : "") << buf;
    }
    for (size_t j = 0; j < d_out(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", targets.at(i, j));
      os << "," << buf;
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("dataset: write failed for " + path);
}

Dataset Dataset::load_csv(const std::string& path, size_t batch_size, uint64_t seed,
                          double val_fraction) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ":1: missing header row");

  size_t d_in = 0, d_out = 0;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (!col.empty() && col[0] == 'x') {
        ++d_in;
      } else if (!col.empty() && col[0] == 'y') {
        ++d_out;
      } else {
        throw std::runtime_error(path + ":1: unexpected column name '" + col + "'");
      }
    }
  }
  if (d_in == 0 || d_out == 0) throw std::runtime_error(path + ":1: header must list x* and y* columns");

  std::vector<double> xs, ys;
  size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
      if (pos != cell.size()) {
        throw std::runtime_error(path + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
      if (col < d_in) {
        xs.push_back(v);
      } else {
        ys.push_back(v);
      }
      ++col;
    }
    if (col != d_in + d_out) {
      throw std::runtime_error(path + ":" + std::to_string(row) + ": expected " +
                               std::to_string(d_in + d_out) + " columns, got " + std::to_string(col));
    }
  }
  size_t n = xs.size() / d_in;
  if (n == 0) throw std::runtime_error(path + ": no samples");

  Dataset ds;
  ds.inputs = Tensor({n, d_in}, std::move(xs));
  ds.targets = Tensor({n, d_out}, std::move(ys));
  ds.batch_size = batch_size;
  ds.seed = seed;
  size_t val = static_cast<size_t>(std::llround(val_fraction * static_cast<double>(n)));
  if (val >= n) val = n - 1;
  ds.train_count = n - val;
  return ds;
}

TeacherStudent make_teacher_student(size_t d_in, size_t hidden_teacher, size_t hidden_student,
                                    size_t n, double noise_std, uint64_t seed, size_t batch_size,
                                    double val_fraction, Activation activation) {
  if (d_in == 0 || hidden_teacher == 0 || hidden_student == 0) {
    throw std::invalid_argument("make_teacher_student: dimensions must be positive");
  }
  if (hidden_student <= hidden_teacher) {
    throw std::invalid_argument("make_teacher_student: student must be wider than teacher");
  }
  if (n < 1) throw std::invalid_argument("make_teacher_student: need at least one sample");
  if (batch_size == 0) throw std::invalid_argument("make_teacher_student: batch size must be positive");
  if (noise_std < 0.0) throw std::invalid_argument("make_teacher_student: noise std must be >= 0");
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw std::invalid_argument("make_teacher_student: val fraction must be in [0, 1)");
  }

  Model teacher = build_mlp({d_in, hidden_teacher, 1}, activation, derive_seed(seed, 101));
  Model student = build_mlp({d_in, hidden_student, 1}, activation, derive_seed(seed, 202));

  Rng rng(derive_seed(seed, 303));
  Tensor x({n, d_in});
  for (size_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
  Tensor y = model_forward(teacher, x);
  if (noise_std > 0.0) {
    for (size_t i = 0; i < y.numel(); ++i) y[i] += noise_std * rng.normal();
  }

  Dataset ds;
  ds.inputs = std::move(x);
  ds.targets = std::move(y);
  ds.batch_size = batch_size;
  ds.seed = seed;
  size_t val = static_cast<size_t>(std::llround(val_fraction * static_cast<double>(n)));
  if (val >= n) val = n - 1;
  ds.train_count = n - val;
  return TeacherStudent{std::move(ds), std::move(student), std::move(teacher)};
}

}  // namespace sniper
