#include "mcrt/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mcrt {

namespace {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Cell parse_cell(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) return v;
  return s;
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw std::invalid_argument("Table::add: row width mismatch");
  rows_.push_back(std::move(row));
}

int Table::column_index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw std::out_of_range("Table: no column '" + name + "'");
  return static_cast<int>(it - columns_.begin());
}

std::vector<double> Table::numbers(const std::string& column) const {
  const int c = column_index(column);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) {
    if (const double* d = std::get_if<double>(&r[c])) out.push_back(*d);
    else throw std::runtime_error("Table: non-numeric entry in column '" + column + "'");
  }
  return out;
}

std::vector<std::string> Table::strings(const std::string& column) const {
  const int c = column_index(column);
  std::vector<std::string> out;
  for (const auto& r : rows_)
    out.push_back(std::holds_alternative<double>(r[c]) ? format_number(std::get<double>(r[c]))
                                                       : std::get<std::string>(r[c]));
  return out;
}

double Table::lookup(const std::string& key_column, const std::string& key,
                     const std::string& column) const {
  const auto keys = strings(key_column);
  const int c = column_index(column);
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (keys[i] == key) {
      if (const double* d = std::get_if<double>(&rows_[i][c])) return *d;
      throw std::runtime_error("Table::lookup: non-numeric value");
    }
  throw std::out_of_range("Table::lookup: no row with " + key_column + " = " + key);
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << quote(columns_[c]);
  os << '\n';
  for (const auto& r : rows_) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << ',';
      if (const double* d = std::get_if<double>(&r[c])) os << format_number(*d);
      else os << quote(std::get<std::string>(r[c]));
    }
    os << '\n';
  }
}

Table Table::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
  Table t(split_csv(line));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    std::vector<Cell> row;
    for (const auto& f : fields) row.push_back(parse_cell(f));
    t.add(std::move(row));
  }
  return t;
}

std::string Table::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rows_) {
    nlohmann::json obj;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (const double* d = std::get_if<double>(&r[c])) {
        if (std::isfinite(*d)) obj[columns_[c]] = *d;
        else obj[columns_[c]] = format_number(*d);
      } else {
        obj[columns_[c]] = std::get<std::string>(r[c]);
      }
    }
    rows.push_back(std::move(obj));
  }
  return nlohmann::json{{"columns", columns_}, {"rows", rows}}.dump(2);
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Table::read_csv(in);
}

void write_table(const std::string& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  t.write_csv(out);
}

void write_svg_plot(std::ostream& os, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 440, left = 70, right = 20, top = 40, bottom = 60;
  const auto tx = [&](double x) { return spec.logx ? std::log10(x) : x; };
  const auto ty = [&](double y) { return spec.logy ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = tx(s.x[i]), y = ty(s.y[i]);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  const auto sx = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * (W - left - right); };
  const auto sy = [&](double y) { return H - bottom - (ty(y) - y0) / (y1 - y0) * (H - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << spec.title
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
     << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double gx = x0 + (x1 - x0) * k / 4, gy = y0 + (y1 - y0) * k / 4;
    const double vx = spec.logx ? std::pow(10.0, gx) : gx, vy = spec.logy ? std::pow(10.0, gy) : gy;
    os << "<text x=\"" << sx(vx) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << vx
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << sy(vy) + 4 << "\" text-anchor=\"end\">" << vy
       << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
     << spec.xlabel << (spec.logx ? " (log)" : "") << "</text>\n";
  os << "<text transform=\"translate(16," << (top + H - bottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << spec.ylabel << (spec.logy ? " (log)" : "")
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double cx = sx(s.x[i]), cy = sy(s.y[i]);
        if (!std::isfinite(cx) || !std::isfinite(cy)) continue;
        os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"" << col << "\"/>\n";
      }
    }
    os << "<text x=\"" << W - right - 6 << "\" y=\"" << top + 16 + 14 * k << "\" text-anchor=\"end\" fill=\""
       << col << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace mcrt
