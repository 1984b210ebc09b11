#include "rotorwalk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace rotorwalk {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw CsvFormatError(fmt::format("not a number: '{}'", s));
  }
  if (used != s.size()) throw CsvFormatError(fmt::format("not a number: '{}'", s));
  return v;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return lo > hi; }
  void pad() {
    if (empty()) {
      lo = 0;
      hi = 1;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw CsvFormatError(fmt::format("missing column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& row : rows) {
    if (c < row.size() && !row[c].empty()) out.push_back(parse_number(row[c]));
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw CsvFormatError("empty CSV input");
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw CsvFormatError(fmt::format("row has {} cells, header has {}", cells.size(), t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

ChartSeries xy_series(const CsvTable& table, const std::string& x, const std::string& y) {
  const std::size_t cx = table.column(x);
  const std::size_t cy = table.column(y);
  ChartSeries s;
  s.name = y;
  for (const auto& row : table.rows) {
    if (row[cx].empty() || row[cy].empty()) continue;
    s.xs.push_back(parse_number(row[cx]));
    s.ys.push_back(parse_number(row[cy]));
  }
  return s;
}

void write_line_chart_svg(std::ostream& out, const std::vector<ChartSeries>& series,
                          const ChartOptions& options) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  auto tx = [&](double v) { return options.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return options.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!options.log_x || x > 0) && (!options.log_y || y > 0);
  };

  Range rx, ry;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      if (!usable(s.xs[k], s.ys[k])) continue;
      rx.add(tx(s.xs[k]));
      ry.add(ty(s.ys[k]));
    }
  }
  rx.pad();
  ry.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - ry.lo) / (ry.hi - ry.lo) * ph; };

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
             "viewBox=\"0 0 {0} {1}\">\n",
             kWidth, kHeight);
  fmt::print(out, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  fmt::print(out, "<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
             kWidth / 2, escape(options.title));
  fmt::print(out,
             "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
             "stroke=\"black\"/>\n",
             kLeft, kTop, pw, ph);
  const auto tick_label = [](double v, bool log) {
    return log ? fmt::format("1e{:.2g}", v) : fmt::format("{:.4g}", v);
  };
  for (int i = 0; i <= 4; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    const double sx = kLeft + pw * i / 4.0;
    const double sy = kTop + ph - ph * i / 4.0;
    fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
               sx, kTop + ph + 16, tick_label(fx, options.log_x));
    fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
               kLeft - 6, sy + 4, tick_label(fy, options.log_y));
  }
  fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
             kLeft + pw / 2, kHeight - 10, escape(options.x_label));
  fmt::print(out,
             "<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"13\" "
             "transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
             kTop + ph / 2, kTop + ph / 2, escape(options.y_label));

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    std::string pts;
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      if (!usable(s.xs[k], s.ys[k])) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", px(s.xs[k]), py(s.ys[k]));
    }
    fmt::print(out, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color,
               pts);
    fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
               kLeft + 8, kTop + 16 + 14.0 * static_cast<double>(si), color, escape(s.name));
  }
  out << "</svg>\n";
}

void write_trajectory_svg(std::ostream& out, const std::vector<Point>& path,
                          const std::vector<Point>& markers) {
  Range rx, ry;
  for (const Point& p : path) {
    rx.add(p.x);
    ry.add(-p.y);
  }
  for (const Point& p : markers) {
    rx.add(p.x);
    ry.add(-p.y);
  }
  rx.pad();
  ry.pad();
  const double span = std::max(rx.hi - rx.lo, ry.hi - ry.lo);
  const double mx = 0.05 * (rx.hi - rx.lo);
  const double my = 0.05 * (ry.hi - ry.lo);
  const double stroke = std::max(0.05, span / 600.0);
  const double d = std::max(0.3, span / 150.0);

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
             "viewBox=\"{:.3f} {:.3f} {:.3f} {:.3f}\" preserveAspectRatio=\"xMidYMid meet\">\n",
             rx.lo - mx, ry.lo - my, rx.hi - rx.lo + 2 * mx, ry.hi - ry.lo + 2 * my);
  std::string pts;
  for (const Point& p : path) {
    if (!pts.empty()) pts += ' ';
    pts += fmt::format("{:.3f},{:.3f}", p.x, 0.0 - p.y);
  }
  fmt::print(out,
             "<polyline fill=\"none\" stroke=\"#1f3f7f\" stroke-width=\"{:.3f}\" "
             "stroke-linejoin=\"round\" points=\"{}\"/>\n",
             stroke, pts);
  for (const Point& m : markers) {
    fmt::print(out,
               "<path d=\"M {0:.3f} {1:.3f} L {2:.3f} {3:.3f} L {0:.3f} {4:.3f} L {5:.3f} {3:.3f} Z\" "
               "fill=\"#d62728\"/>\n",
               m.x, 0.0 - m.y - d, m.x + d, 0.0 - m.y, 0.0 - m.y + d, m.x - d);
  }
  out << "</svg>\n";
}

}  // namespace rotorwalk
