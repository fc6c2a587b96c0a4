#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcrt/config.hpp"
#include "mcrt/mated_crt.hpp"
#include "mcrt/network.hpp"
#include "mcrt/rng.hpp"
#include "mcrt/stats.hpp"
#include "mcrt/table.hpp"
#include "mcrt/tutte.hpp"

namespace mcrt {

/// Runs fn(0..count-1) on up to `threads` workers. Every index must write
/// only its own output slot.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------- walks

struct StopRule {
  enum class Kind { Steps, ExitBall, HitBoundary };
  Kind kind = Kind::Steps;
  long steps = 0;
  Point centre{};
  double radius = 0;

  static StopRule after(long n) { return {Kind::Steps, n, {}, 0}; }
  static StopRule exit_ball(Point z, double r) { return {Kind::ExitBall, 0, z, r}; }
  static StopRule hit_boundary() { return {Kind::HitBoundary, 0, {}, 0}; }
};

struct WalkTrace {
  std::vector<int> vertices;
  std::vector<Point> points;
  /// Step index times time_scale.
  std::vector<double> times;
  bool truncated = false;
  long steps() const { return static_cast<long>(vertices.size()) - 1; }
};

/// Conductance-weighted walk from `start` until the stop rule fires or
/// `budget` steps pass (then flagged truncated). The exit-ball rule stops at
/// the first vertex embedded at distance >= radius from the centre.
WalkTrace run_walk(const Network& net, const TutteEmbedding& emb, int start, const StopRule& rule,
                   Rng& rng, double time_scale = 1.0, long budget = 10'000'000);

/// Step count of the same exit-ball walk without storing the trace; -1 when
/// the budget runs out.
long exit_steps(const Network& net, const std::vector<Point>& pos, int start, Point centre,
                double radius, Rng& rng, long budget = 10'000'000);

// ---------------------------------------------------------- disk maps

class RetryBudgetExhausted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EmbeddedMap {
  MatedCrtMap map;
  Network net;
  TutteEmbedding emb;
};

struct DiskMapOptions {
  int substeps = 16;
  /// Root must be interior and embedded inside this radius.
  double root_radius = 0.25;
  int root_retries = 64;
};

/// Disk map from seed `seed`, Tutte-embedded from a root accepted by the
/// retry loop (root draws use their own stream of the same seed).
EmbeddedMap embedded_disk_map(double gamma, int n_cells, std::uint64_t seed,
                              const DiskMapOptions& opts = {});

/// Vertices embedded in the open ball B_r(z).
std::vector<int> embedded_ball(const TutteEmbedding& emb, Point z, double r);
/// Vertices embedded outside B_r(z) with a neighbour inside: the vertex set
/// of the circle of radius r.
std::vector<int> embedded_circle(const Network& net, const TutteEmbedding& emb, Point z, double r);

// ------------------------------------------------------------- m_eps

struct MEpsOptions {
  DiskMapOptions map;
  int walks_per_map = 200;
  double radius = 0.5;
  long budget = 50'000'000;
  int threads = 1;
};

struct MEpsEstimate {
  /// Lower median of the pooled exit step counts.
  double median = 0;
  std::vector<double> exit_steps;
  int maps = 0;
  std::size_t truncated = 0;
};

/// Annealed median (maps x walks) of the steps the embedded walk from the
/// root needs to leave B_radius around its start. Replicate k builds its map
/// from rng.split(k).
MEpsEstimate estimate_m_eps(double gamma, int n_cells, int replicates, const Rng& rng,
                            const MEpsOptions& opts = {});

// ------------------------------------------------------ electrical scans

/// Rows (s, r, log_ratio, R, inner, circle): resistance between the
/// embedded ball B_s(z) and the circle set of radius r.
Table annulus_resistance_scan(const Network& net, const TutteEmbedding& emb, Point z,
                              const std::vector<std::pair<double, double>>& radii);

struct GreenScan {
  /// Rows (vertex, distance, gr) for y in the inner third of the region.
  Table points;
  /// Rows (distance, log_inv_distance, mean_gr, count) per log bin.
  Table bins;
  /// Binned mean gr against log(1/distance) over [r/30, r/3].
  stats::LinearFit fit;
  double gr_at_source = 0;
  double gr_max = 0;
  double gr_min = 0;
};

/// Fit of bin-averaged g against log(1/d) over log-spaced distance bins in
/// [lo, hi); appends (distance, log_inv_distance, mean_gr, count) to `bins`.
stats::LinearFit log_binned_fit(const std::vector<double>& d, const std::vector<double>& g, double lo,
                                double hi, int nbins, Table& bins);

/// Green's function of the walk from x killed on leaving the embedded ball
/// B_r(psi(x)).
GreenScan green_log_scan(const Network& net, const TutteEmbedding& emb, int x, double r,
                         int bins = 8);

/// max/min of gr_{B_r(z)}(x_z, .) over the circle set of radius s about z;
/// x_z is the vertex embedded nearest z. Requires 3s <= r.
double harnack_ratio(const Network& net, const TutteEmbedding& emb, Point z, double s, double r);

/// Rows (centre, x, y, r, walks, mean, median, second_moment, moment_ratio,
/// cell_count, truncated); cell_count counts vertices in B_{fraction r}.
Table exit_time_scan(const Network& net, const TutteEmbedding& emb, const std::vector<int>& centres,
                     const std::vector<double>& radii, int walks, const Rng& rng,
                     double cell_fraction = 0.25, long budget = 10'000'000);

// --------------------------------------------------------- statistics

/// 2(2+gamma)/(2-gamma) + 0.5.
double modulus_exponent(double gamma);

/// Largest displacement of the linearly interpolated trace over time windows
/// of length <= w.
double max_window_displacement(const WalkTrace& trace, double w);

/// Rows (delta, window, violation_frequency, mean_max_displacement).
/// A trace violates at delta when it moves more than 2 delta in a window of
/// length delta^chi.
Table modulus_statistic(const std::vector<WalkTrace>& traces, const std::vector<double>& deltas,
                        double gamma);

struct DegreeStats {
  double mean = 0;
  std::vector<long> histogram;
  int max_degree = 0;
  std::size_t bulk = 0;
};

/// Degrees over vertices at index distance >= margin from both ends.
DegreeStats degree_statistics(const MatedCrtMap& map, int margin);

/// External-face degree of the map on n plane cells.
int interval_perimeter(double gamma, int n_cells, std::uint64_t seed, int substeps = 16);

/// Number of unit intervals [k-1, k], k = 1..n, containing a running minimum
/// of a 1-D Brownian motion, for every n in `sizes` along one path.
std::vector<long> record_counts(const std::vector<int>& sizes, int substeps, Rng& rng);

/// Rows (ball, centre, x, y, r, walks, ks, p_value): exit angles of the
/// embedded walk from B_r(psi(centre)) against the uniform law.
Table bm_comparison(const Network& net, const TutteEmbedding& emb, const std::vector<int>& centres,
                    double radius, int walks, const Rng& rng);

/// Two-sample KS after dividing each sample by its own median.
stats::KsResult normalized_ks(std::vector<double> a, std::vector<double> b);

struct LbmWalkRecord {
  int n = 0;
  int M = 0;
  double m_eps = 0;
  double m0 = 0;
  double ks = 0;
  double p_value = 0;
  std::size_t walk_samples = 0;
  std::size_t lbm_samples = 0;
};

/// Exit times from B_{1/2}: the embedded walk (over `replicates` disk maps)
/// and Liouville Brownian motion (over `replicates` cone fields on an M grid),
/// each rescaled by its median, then compared by KS.
LbmWalkRecord lbm_walk_comparison(double gamma, int n, int M, int replicates, int walks,
                                  const Rng& rng, const MEpsOptions& opts = {});

// ---------------------------------------------------------- runners

struct ExperimentResult {
  std::string name;
  std::map<std::string, Table> tables;
  /// Rows (metric, gamma, size, value); gamma/size are nan when unused.
  Table summary{{"metric", "gamma", "size", "value"}};
  void report(const std::string& metric, double gamma, double size, double value);
  struct Plot {
    std::string file;
    PlotSpec spec;
    std::vector<PlotSeries> series;
  };
  std::vector<Plot> plots;
  double wall_seconds = 0;
};

std::vector<std::string> experiment_names();

/// Summary value for (metric, gamma, size); nan arguments match anything.
double summary_value(const Table& summary, const std::string& metric, double gamma = std::nan(""),
                     double size = std::nan(""));

/// Runs the named experiment; a pure function of the config.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes <out>/<name>_<table>.csv (or .json), <name>_summary, SVG plots and
/// <name>_manifest.json. Returns the written paths.
std::vector<std::string> write_experiment(const ExperimentResult& result, const ExperimentConfig& cfg);

}  // namespace mcrt
