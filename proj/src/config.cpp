#include "mcrt/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>

namespace mcrt {

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(text));
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError("config: bad value '" + text + "' for key '" + key + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<T> out;
  for (const auto& p : parts)
    if (!boost::trim_copy(p).empty()) out.push_back(parse_value<T>(key, p));
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (gammas.empty()) throw ConfigError("config: gammas must be nonempty");
  if (sizes.empty()) throw ConfigError("config: sizes must be nonempty");
  for (double g : gammas)
    if (!(g > 0 && g < 2)) throw ConfigError("config: gamma must lie in (0,2)");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw ConfigError("config: sizes must be positive");
    if (i && sizes[i] <= sizes[i - 1]) throw ConfigError("config: sizes must be ascending");
  }
  if (replicates < 1 || walks < 1 || substeps < 1 || field_size < 8 || threads < 1)
    throw ConfigError("config: counts must be positive");
  if (format != "csv" && format != "json") throw ConfigError("config: format must be csv or json");
}

double ExperimentConfig::tolerance(const std::string& key, double fallback) const {
  const auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

void apply_config_entry(const std::string& key, const std::string& value, ExperimentConfig& cfg) {
  if (key == "experiment") cfg.experiment = boost::trim_copy(value);
  else if (key == "gammas") cfg.gammas = parse_list<double>(key, value);
  else if (key == "sizes") cfg.sizes = parse_list<int>(key, value);
  else if (key == "replicates") cfg.replicates = parse_value<int>(key, value);
  else if (key == "walks") cfg.walks = parse_value<int>(key, value);
  else if (key == "substeps") cfg.substeps = parse_value<int>(key, value);
  else if (key == "field_size") cfg.field_size = parse_value<int>(key, value);
  else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value);
  else if (key == "out") cfg.out_dir = boost::trim_copy(value);
  else if (key == "threads") cfg.threads = parse_value<int>(key, value);
  else if (key == "format") cfg.format = boost::trim_copy(value);
  else if (key.starts_with("tol.") && key.size() > 4) cfg.tolerances[key.substr(4)] = parse_value<double>(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

void apply_config(std::istream& is, ExperimentConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    boost::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    apply_config_entry(boost::trim_copy(line.substr(0, eq)), line.substr(eq + 1), cfg);
  }
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  apply_config(in, base);
  return base;
}

void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  const auto join = [](const auto& xs) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? "," : "") << xs[i];
    return s.str();
  };
  os << "experiment = " << cfg.experiment << '\n'
     << "gammas = " << join(cfg.gammas) << '\n'
     << "sizes = " << join(cfg.sizes) << '\n'
     << "replicates = " << cfg.replicates << '\n'
     << "walks = " << cfg.walks << '\n'
     << "substeps = " << cfg.substeps << '\n'
     << "field_size = " << cfg.field_size << '\n'
     << "seed = " << cfg.seed << '\n'
     << "out = " << cfg.out_dir << '\n'
     << "threads = " << cfg.threads << '\n'
     << "format = " << cfg.format << '\n';
  for (const auto& [k, v] : cfg.tolerances) os << "tol." << k << " = " << std::setprecision(17) << v << '\n';
}

}  // namespace mcrt
