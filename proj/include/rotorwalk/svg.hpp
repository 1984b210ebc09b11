#pragma once

// Static SVG rendering of trajectories and line charts. Inputs are plain
// tables so that every figure is a function of a CSV file.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotorwalk/lattice.hpp"

namespace rotorwalk {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws CsvFormatError when absent.
  std::size_t column(const std::string& name) const;
  /// Column parsed as numbers; empty cells are skipped together with the row
  /// when used through xy().
  std::vector<double> numbers(const std::string& name) const;
};

class CsvFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CsvTable read_csv(std::istream& in);

struct ChartSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Rows where both cells are non-empty.
ChartSeries xy_series(const CsvTable& table, const std::string& x, const std::string& y);

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

void write_line_chart_svg(std::ostream& out, const std::vector<ChartSeries>& series,
                          const ChartOptions& options);

/// One polyline through the embedded points and a diamond at each marker.
/// The viewBox covers all points with a 5% margin.
void write_trajectory_svg(std::ostream& out, const std::vector<Point>& path,
                          const std::vector<Point>& markers);

}  // namespace rotorwalk
