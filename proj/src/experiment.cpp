#include "sniper/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sniper {

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void ExperimentResult::write_csv(std::ostream& os, bool include_wall) const {
  os << "epoch,sparsity,train_loss,val_loss";
  if (include_wall) os << ",wall_seconds";
  os << "\n";
  for (const EpochRow& r : rows) {
    os << r.epoch << "," << fmt(r.sparsity) << "," << fmt(r.train_loss) << "," << fmt(r.val_loss);
    if (include_wall) os << "," << fmt(r.wall_seconds);
    os << "\n";
  }
}

void ExperimentResult::save_csv(const std::string& path, bool include_wall) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("result: cannot write " + path);
  write_csv(os, include_wall);
  if (!os) throw std::runtime_error("result: write failed for " + path);
}

std::string ExperimentResult::to_csv(bool include_wall) const {
  std::ostringstream os;
  write_csv(os, include_wall);
  return os.str();
}

double ExperimentResult::final_train_loss() const {
  if (rows.empty()) throw std::logic_error("result: no rows");
  return rows.back().train_loss;
}

double ExperimentResult::final_val_loss() const {
  if (rows.empty()) throw std::logic_error("result: no rows");
  return rows.back().val_loss;
}

double ExperimentResult::best_val_loss() const {
  if (rows.empty()) throw std::logic_error("result: no rows");
  double best = rows.front().val_loss;
  for (const EpochRow& r : rows)
    if (r.val_loss < best) best = r.val_loss;
  return best;
}

int ExperimentResult::best_val_epoch() const {
  if (rows.empty()) throw std::logic_error("result: no rows");
  int epoch = rows.front().epoch;
  double best = rows.front().val_loss;
  for (const EpochRow& r : rows) {
    if (r.val_loss < best) {
      best = r.val_loss;
      epoch = r.epoch;
    }
  }
  return epoch;
}

ExperimentResult load_result_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("result: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ":1: empty file");
  bool has_wall = line.find("wall_seconds") != std::string::npos;
  if (line.rfind("epoch,sparsity,train_loss,val_loss", 0) != 0) {
    throw std::runtime_error(path + ":1: unexpected header '" + line + "'");
  }
  ExperimentResult out;
  size_t rowno = 1;
  while (std::getline(is, line)) {
    ++rowno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t pos = 0;
        vals.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(rowno) + ": bad number '" + cell + "'");
      }
    }
    size_t expect = has_wall ? 5 : 4;
    if (vals.size() != expect) {
      throw std::runtime_error(path + ":" + std::to_string(rowno) + ": expected " +
                               std::to_string(expect) + " columns, got " +
                               std::to_string(vals.size()));
    }
    EpochRow r;
    r.epoch = static_cast<int>(vals[0]);
    r.sparsity = vals[1];
    r.train_loss = vals[2];
    r.val_loss = vals[3];
    r.wall_seconds = has_wall ? vals[4] : 0.0;
    out.rows.push_back(r);
  }
  return out;
}

}  // namespace sniper
