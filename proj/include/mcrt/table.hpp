#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace mcrt {

using Cell = std::variant<double, std::string>;

/// Column-named table of numbers and strings; the unit of experiment output.
class Table {
public:
  Table() = default;
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }

  void add(std::vector<Cell> row);
  int column_index(const std::string& name) const;
  std::vector<double> numbers(const std::string& column) const;
  std::vector<std::string> strings(const std::string& column) const;
  /// Value of `column` in the first row whose `key_column` equals `key`.
  double lookup(const std::string& key_column, const std::string& key, const std::string& column) const;

  void write_csv(std::ostream& os) const;
  static Table read_csv(std::istream& is);
  std::string to_json() const;

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

Table read_table(const std::string& path);
void write_table(const std::string& path, const Table& t);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Draw as a line (fits) instead of markers.
  bool line = false;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
};

/// Self-contained SVG scatter/line plot.
void write_svg_plot(std::ostream& os, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace mcrt
