#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcrt {

/// Settings of one experiment run. Sizes are n_cells for map experiments and
/// the grid side M for field experiments.
struct ExperimentConfig {
  std::string experiment;
  std::vector<double> gammas{1.0};
  std::vector<int> sizes;
  int replicates = 8;
  /// Walks (or paths) per replicate.
  int walks = 200;
  int substeps = 16;
  /// Grid side for the field pipeline of mixed experiments.
  int field_size = 256;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 1;
  std::string format = "csv";
  std::map<std::string, double> tolerances;

  /// Nonempty lists, strictly ascending sizes, positive counts.
  void validate() const;
  double tolerance(const std::string& key, double fallback) const;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flat "key = value" text, '#' comments. Keys: experiment, gammas, sizes
/// (comma lists), replicates, walks, substeps, field_size, seed, out,
/// threads, format and tol.<name>. Unknown keys throw ConfigError.
void apply_config(std::istream& is, ExperimentConfig& cfg);
void apply_config_entry(const std::string& key, const std::string& value, ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void write_config(std::ostream& os, const ExperimentConfig& cfg);

}  // namespace mcrt
