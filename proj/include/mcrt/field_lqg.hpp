#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcrt {

enum class FieldBc { ZeroBoundary, TorusProjected };

std::string to_string(FieldBc bc);
FieldBc field_bc_from_string(const std::string& s);

/// Lattice field on an M x M grid of cells covering [-1,1]^2. Cell (i, j)
/// has centre (-1 + (i + 1/2) a, -1 + (j + 1/2) a) and is stored at
/// values[j * M + i].
struct GffGrid {
  int M = 0;
  double a = 0;
  FieldBc bc = FieldBc::ZeroBoundary;
  std::uint64_t seed = 0;
  /// Strength of the -gamma log|z| term added so far (0 for a plain GFF).
  double cone_gamma = 0;
  std::vector<double> values;

  GffGrid() = default;
  GffGrid(int M, FieldBc bc);

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * M + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * M + i]; }
  std::complex<double> centre(int i, int j) const { return {-1 + (i + 0.5) * a, -1 + (j + 0.5) * a}; }
  /// Bilinear interpolation between cell centres. Outside the grid the field
  /// is zero (ZeroBoundary) or periodic (TorusProjected).
  double interpolate(std::complex<double> z) const;
};

/// Discrete GFF with covariance 2 pi (-Delta)^{-1} for the 5-point
/// Laplacian with unit spacing, so that Var h_eps ~ log(1/eps).
/// ZeroBoundary: exact spectral sample on the interior (M-2)^2 cells with
/// the outer ring fixed to 0. TorusProjected: zero-mean torus field recentred
/// so that its average over the unit circle vanishes.
GffGrid sample_gff(int M, FieldBc bc, std::uint64_t seed);

/// Adds gamma log(1/|z|) at cell centres, with |z| floored at a/2.
GffGrid add_cone_singularity(const GffGrid& field, double gamma);

/// Mean of the interpolated field over ceil(2 pi r / a) equally spaced points
/// of the circle |w - z| = r. Requires r >= 2a and the circle inside [-1,1]^2.
double circle_average(const GffGrid& field, std::complex<double> z, double r);

struct LqgMeasure {
  int M = 0;
  double a = 0;
  double gamma = 0;
  double eps_c = 0;
  std::uint64_t seed = 0;
  std::vector<double> mass;  // same layout as GffGrid::values

  double at(int i, int j) const { return mass[static_cast<std::size_t>(j) * M + i]; }
  std::complex<double> centre(int i, int j) const { return {-1 + (i + 0.5) * a, -1 + (j + 0.5) * a}; }
  double total() const;
  /// Mass of cells whose centre lies in the closed ball B_r(z).
  double ball_mass(std::complex<double> z, double r) const;
};

/// Cell mass a^2 eps_c^{gamma^2/2} exp(gamma h_{eps_c}(centre)). eps_c <= 0
/// selects 4a. Circles crossing the edge of the grid use the field's
/// extension rule.
LqgMeasure build_lqg_measure(const GffGrid& field, double gamma, double eps_c = 0);

/// Lebesgue measure on the same grid (every cell has mass a^2).
LqgMeasure lebesgue_measure(int M);

struct BallMassScan {
  std::vector<double> deltas;
  std::vector<double> min_mass;
  std::vector<double> max_mass;
  double min_exponent = 0;
  double max_exponent = 0;
  double min_r_squared = 0;
  double max_r_squared = 0;
};

BallMassScan ball_mass_scan(const LqgMeasure& measure, const std::vector<std::complex<double>>& centres,
                            const std::vector<double>& deltas);

/// Binary grid export: text header lines terminated by "end", then M*M
/// little-endian float64 values.
void write_field_binary(std::ostream& os, const GffGrid& field);
GffGrid read_field_binary(std::istream& is);
void write_measure_binary(std::ostream& os, const LqgMeasure& measure);
LqgMeasure read_measure_binary(std::istream& is);

}  // namespace mcrt
