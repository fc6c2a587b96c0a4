#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcrt {

enum class Topology { Plane, Disk };
enum class Coord { L, R };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

struct PathParams {
  double gamma = 1.0;
  int n_cells = 64;
  /// Grid points per cell (K).
  int substeps = 16;
  std::uint64_t seed = 0;
  Topology topology = Topology::Plane;
  /// Cell duration epsilon in plane mode; ignored for disks (epsilon = 1/n_cells).
  double cell_duration = 1.0;

  void validate() const;
  double cell_length() const;
  double dt() const { return cell_length() / substeps; }
  std::size_t grid_size() const { return static_cast<std::size_t>(n_cells) * substeps + 1; }
};

struct SamplerDiagnostics {
  std::uint64_t attempts = 0;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate() const {
    return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }
};

struct CorrelatedPath {
  double gamma = 0;
  double dt = 0;
  int n_cells = 0;
  int substeps = 0;
  std::uint64_t seed = 0;
  Topology topology = Topology::Plane;
  std::vector<double> L;
  std::vector<double> R;
  SamplerDiagnostics diagnostics;

  const std::vector<double>& coord(Coord c) const { return c == Coord::L ? L : R; }
};

struct CellMinima {
  Coord coord = Coord::L;
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

class SamplingFailure : public std::runtime_error {
public:
  SamplingFailure(const std::string& what, std::uint64_t attempts)
      : std::runtime_error(what), attempts_(attempts) {}
  std::uint64_t attempts() const { return attempts_; }

private:
  std::uint64_t attempts_;
};

/// -cos(pi gamma^2 / 4), the correlation of the two coordinates.
double correlation_of(double gamma);

CorrelatedPath sample_plane(const PathParams& params);

enum class DiskMethod { Rejection, LocalResample };

struct DiskOptions {
  std::uint64_t max_attempts = 10'000'000;
  /// Local bridge-resampling moves; 0 selects the default 50 * n_cells.
  std::uint64_t sweeps = 0;
};

/// Discretized correlated Brownian bridge (0,0) -> (1,0) on [0,1] that is
/// nonnegative in both coordinates at every interior grid point.
CorrelatedPath sample_disk_excursion(const PathParams& params, DiskMethod method,
                                     const DiskOptions& options = {});

/// Per-cell minima over the closed index windows [iK, (i+1)K]; neighbouring
/// cells share their common endpoint.
CellMinima cell_minima(const CorrelatedPath& path, Coord coord);
CellMinima cell_minima(const std::vector<double>& values, int n_cells, int substeps,
                       Coord coord = Coord::L);

/// Breaks exact ties m[i] == m[i+1] produced by a shared window endpoint:
/// the cell whose other neighbouring grid value is lower is moved down by one
/// ulp. Returns the number of ties split.
int split_adjacent_ties(const std::vector<double>& values, int substeps, CellMinima& minima);

void write_path_binary(std::ostream& os, const CorrelatedPath& path);
CorrelatedPath read_path_binary(std::istream& is);
void write_path_csv(std::ostream& os, const CorrelatedPath& path);

}  // namespace mcrt
