#include "sniper/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sniper {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Panel {
  double x0, y0, w, h;  // pixel viewport
  double xmin, xmax;
  double ymin, ymax;
  bool log_y;

  double px(double x) const {
    double t = xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5;
    return x0 + t * w;
  }
  double py(double y) const {
    double a = log_y ? std::log10(y) : y;
    double lo = log_y ? std::log10(ymin) : ymin;
    double hi = log_y ? std::log10(ymax) : ymax;
    double t = hi > lo ? (a - lo) / (hi - lo) : 0.5;
    return y0 + h - t * h;
  }
};

void draw_panel(std::ostringstream& svg, const Panel& p, const std::string& title,
                const std::vector<LabeledResult>& runs, bool use_val) {
  svg << "<rect x='" << p.x0 << "' y='" << p.y0 << "' width='" << p.w << "' height='" << p.h
      << "' fill='none' stroke='#333' stroke-width='1'/>\n";
  svg << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 - 8
      << "' text-anchor='middle' font-size='13' font-family='sans-serif'>" << title << "</text>\n";

  // x ticks at ~5 integer epochs
  int span = static_cast<int>(p.xmax - p.xmin);
  int step = std::max(1, span / 5);
  for (int e = static_cast<int>(p.xmin); e <= static_cast<int>(p.xmax); e += step) {
    double x = p.px(e);
    svg << "<line x1='" << x << "' y1='" << p.y0 + p.h << "' x2='" << x << "' y2='"
        << p.y0 + p.h + 4 << "' stroke='#333'/>\n";
    svg << "<text x='" << x << "' y='" << p.y0 + p.h + 16
        << "' text-anchor='middle' font-size='10' font-family='sans-serif'>" << e << "</text>\n";
  }
  svg << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 + p.h + 32
      << "' text-anchor='middle' font-size='11' font-family='sans-serif'>epoch</text>\n";

  // y ticks: 4 divisions of the (possibly log) range
  for (int i = 0; i <= 4; ++i) {
    double lo = p.log_y ? std::log10(p.ymin) : p.ymin;
    double hi = p.log_y ? std::log10(p.ymax) : p.ymax;
    double a = lo + (hi - lo) * i / 4.0;
    double v = p.log_y ? std::pow(10.0, a) : a;
    double y = p.py(v);
    svg << "<line x1='" << p.x0 - 4 << "' y1='" << y << "' x2='" << p.x0 << "' y2='" << y
        << "' stroke='#333'/>\n";
    svg << "<text x='" << p.x0 - 7 << "' y='" << y + 3
        << "' text-anchor='end' font-size='10' font-family='sans-serif'>" << fmt(v) << "</text>\n";
  }

  for (size_t r = 0; r < runs.size(); ++r) {
    const char* color = kPalette[r % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const auto& rows = runs[r].result.rows;
    std::ostringstream pts;
    for (const EpochRow& row : rows) {
      double y = use_val ? row.val_loss : row.train_loss;
      pts << p.px(row.epoch) << "," << p.py(y) << " ";
    }
    if (rows.size() >= 2) {
      svg << "<polyline points='" << pts.str() << "' fill='none' stroke='" << color
          << "' stroke-width='1.5'/>\n";
    }
    // markers keep single-epoch series visible
    for (const EpochRow& row : rows) {
      double y = use_val ? row.val_loss : row.train_loss;
      svg << "<circle cx='" << p.px(row.epoch) << "' cy='" << p.py(y) << "' r='2' fill='" << color
          << "'/>\n";
    }
  }
}

}  // namespace

void write_loss_chart(const std::vector<LabeledResult>& runs, const std::string& out_path) {
  if (runs.empty()) throw std::invalid_argument("plot: no input series");
  for (const LabeledResult& r : runs) {
    if (r.result.rows.empty()) throw std::invalid_argument("plot: series '" + r.label + "' is empty");
  }

  double xmin = 1e300, xmax = -1e300;
  double ymin = 1e300, ymax = -1e300;
  bool all_positive = true;
  for (const LabeledResult& r : runs) {
    for (const EpochRow& row : r.result.rows) {
      xmin = std::min(xmin, static_cast<double>(row.epoch));
      xmax = std::max(xmax, static_cast<double>(row.epoch));
      for (double v : {row.train_loss, row.val_loss}) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
        if (v <= 0.0) all_positive = false;
      }
    }
  }
  if (ymin == ymax) {
    ymin -= 0.5;
    ymax += 0.5;
    if (ymin <= 0.0) all_positive = false;
  }

  const double panel_w = 320, panel_h = 240, margin = 60, gap = 50;
  const double width = margin * 2 + panel_w * 2 + gap;
  const double legend_h = 18.0 * static_cast<double>(runs.size());
  const double height = margin + panel_h + 60 + legend_h;

  Panel left{margin, 40, panel_w, panel_h, xmin, xmax, ymin, ymax, all_positive};
  Panel right{margin + panel_w + gap, 40, panel_w, panel_h, xmin, xmax, ymin, ymax, all_positive};

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  draw_panel(svg, left, "training loss", runs, false);
  draw_panel(svg, right, "validation loss", runs, true);

  double ly = 40 + panel_h + 46;
  for (size_t r = 0; r < runs.size(); ++r) {
    const char* color = kPalette[r % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<line x1='" << margin << "' y1='" << ly << "' x2='" << margin + 24 << "' y2='" << ly
        << "' stroke='" << color << "' stroke-width='2'/>\n";
    svg << "<text x='" << margin + 30 << "' y='" << ly + 4
        << "' font-size='11' font-family='sans-serif'>" << runs[r].label << "</text>\n";
    ly += 18;
  }
  svg << "</svg>\n";

  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("plot: cannot write " + out_path);
  os << svg.str();
  if (!os) throw std::runtime_error("plot: write failed for " + out_path);
}

}  // namespace sniper
