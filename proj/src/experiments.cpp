#include "mcrt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "mcrt/brownian_paths.hpp"
#include "mcrt/electrical.hpp"
#include "mcrt/field_lqg.hpp"
#include "mcrt/lbm.hpp"

namespace mcrt {

namespace {

constexpr std::uint64_t kRootStream = 0x524f4f54ULL;

struct ExitResult {
  long steps = -1;
  int vertex = -1;
};

ExitResult exit_walk(const Network& net, const std::vector<Point>& pos, int start, Point centre,
                     double radius, Rng& rng, long budget) {
  const double r2 = radius * radius;
  int v = start;
  for (long k = 0;; ++k) {
    if (std::norm(pos[v] - centre) >= r2) return {k, v};
    if (k >= budget) return {-1, v};
    v = net.step(v, rng);
  }
}

double lower_median(std::vector<double> xs) {
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>((xs.size() - 1) / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  return *mid;
}

}  // namespace

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

WalkTrace run_walk(const Network& net, const TutteEmbedding& emb, int start, const StopRule& rule,
                   Rng& rng, double time_scale, long budget) {
  if (start < 0 || start >= net.size()) throw std::out_of_range("run_walk: start not in map");
  const auto stop = [&](int v, long k) {
    switch (rule.kind) {
      case StopRule::Kind::Steps: return k >= rule.steps;
      case StopRule::Kind::ExitBall: return std::abs(emb.positions[v] - rule.centre) >= rule.radius;
      case StopRule::Kind::HitBoundary: return emb.is_boundary[v] != 0;
    }
    return true;
  };
  WalkTrace tr;
  int v = start;
  for (long k = 0;; ++k) {
    tr.vertices.push_back(v);
    tr.points.push_back(emb.positions[v]);
    tr.times.push_back(static_cast<double>(k) * time_scale);
    if (stop(v, k)) break;
    if (k >= budget) {
      tr.truncated = true;
      break;
    }
    v = net.step(v, rng);
  }
  return tr;
}

long exit_steps(const Network& net, const std::vector<Point>& pos, int start, Point centre,
                double radius, Rng& rng, long budget) {
  return exit_walk(net, pos, start, centre, radius, rng, budget).steps;
}

EmbeddedMap embedded_disk_map(double gamma, int n_cells, std::uint64_t seed, const DiskMapOptions& opts) {
  PathParams p;
  p.gamma = gamma;
  p.n_cells = n_cells;
  p.substeps = opts.substeps;
  p.seed = seed;
  p.topology = Topology::Disk;
  EmbeddedMap em;
  em.map = map_from_path(sample_disk_excursion(p, DiskMethod::LocalResample));
  em.net = Network::from_map(em.map);
  const auto boundary = em.map.boundary_list();
  Rng rng(seed, kRootStream);
  for (int attempt = 0; attempt < opts.root_retries; ++attempt) {
    const int root = pick_root(em.map, rng);
    if (em.map.is_boundary(root)) continue;
    em.emb = tutte_embed(em.net, boundary, root);
    if (std::abs(em.emb.positions[root]) < opts.root_radius) {
      em.map.root = root;
      return em;
    }
  }
  throw RetryBudgetExhausted("embedded_disk_map: no interior root inside the root radius after " +
                             std::to_string(opts.root_retries) + " draws");
}

std::vector<int> embedded_ball(const TutteEmbedding& emb, Point z, double r) {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(emb.positions.size()); ++v)
    if (std::abs(emb.positions[v] - z) < r) out.push_back(v);
  return out;
}

std::vector<int> embedded_circle(const Network& net, const TutteEmbedding& emb, Point z, double r) {
  std::vector<int> out;
  for (int v = 0; v < net.size(); ++v) {
    if (std::abs(emb.positions[v] - z) < r) continue;
    for (const auto& arc : net.arcs(v))
      if (std::abs(emb.positions[arc.to] - z) < r) {
        out.push_back(v);
        break;
      }
  }
  return out;
}

MEpsEstimate estimate_m_eps(double gamma, int n_cells, int replicates, const Rng& rng,
                            const MEpsOptions& opts) {
  if (replicates < 1) throw std::invalid_argument("estimate_m_eps: replicates must be positive");
  std::vector<std::vector<double>> per_map(static_cast<std::size_t>(replicates));
  parallel_for(per_map.size(), opts.threads, [&](std::size_t k) {
    Rng rk = rng.split(k);
    const auto em = embedded_disk_map(gamma, n_cells, rk(), opts.map);
    const int root = em.emb.root;
    auto& out = per_map[k];
    for (int w = 0; w < opts.walks_per_map; ++w) {
      Rng rw = rk.split(static_cast<std::uint64_t>(w));
      const long s = exit_steps(em.net, em.emb.positions, root, em.emb.positions[root], opts.radius, rw,
                                opts.budget);
      out.push_back(s < 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(s));
    }
  });
  MEpsEstimate est;
  est.maps = replicates;
  for (const auto& v : per_map) est.exit_steps.insert(est.exit_steps.end(), v.begin(), v.end());
  est.truncated = static_cast<std::size_t>(
      std::count(est.exit_steps.begin(), est.exit_steps.end(), std::numeric_limits<double>::infinity()));
  est.median = lower_median(est.exit_steps);
  return est;
}

Table annulus_resistance_scan(const Network& net, const TutteEmbedding& emb, Point z,
                              const std::vector<std::pair<double, double>>& radii) {
  Table t({"s", "r", "log_ratio", "R", "inner", "circle"});
  for (const auto& [s, r] : radii) {
    if (!(s > 0 && s <= r)) throw std::invalid_argument("annulus_resistance_scan: need 0 < s <= r");
    const auto A = embedded_ball(emb, z, s);
    const auto Z = embedded_circle(net, emb, z, r);
    if (A.empty() || Z.empty()) throw std::invalid_argument("annulus_resistance_scan: empty vertex set");
    const double R = effective_resistance(net, A, Z);
    t.add({s, r, std::log(r / s), R, static_cast<double>(A.size()), static_cast<double>(Z.size())});
  }
  return t;
}

stats::LinearFit log_binned_fit(const std::vector<double>& d, const std::vector<double>& g, double lo,
                                double hi, int nbins, Table& bins) {
  std::vector<double> sum_gr(nbins, 0.0), sum_log(nbins, 0.0);
  std::vector<int> count(nbins, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < lo || d[i] >= hi) continue;
    const int b = std::min(nbins - 1, static_cast<int>(std::log(d[i] / lo) / std::log(hi / lo) * nbins));
    sum_gr[b] += g[i];
    sum_log[b] += std::log(1 / d[i]);
    ++count[b];
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < nbins; ++b) {
    if (!count[b]) continue;
    xs.push_back(sum_log[b] / count[b]);
    ys.push_back(sum_gr[b] / count[b]);
    bins.add({std::exp(-xs.back()), xs.back(), ys.back(), static_cast<double>(count[b])});
  }
  return xs.size() >= 2 ? stats::linear_fit(xs, ys) : stats::LinearFit{};
}

GreenScan green_log_scan(const Network& net, const TutteEmbedding& emb, int x, double r, int bins) {
  const Point zx = emb.positions[x];
  const auto region = embedded_ball(emb, zx, r);
  const auto g = green_function(net, region, x);
  GreenScan out;
  out.points = Table({"vertex", "distance", "gr"});
  out.bins = Table({"distance", "log_inv_distance", "mean_gr", "count"});
  out.gr_at_source = g.gr[x];
  out.gr_max = 0;
  out.gr_min = std::numeric_limits<double>::infinity();
  for (int v : region) {
    out.gr_max = std::max(out.gr_max, g.gr[v]);
    out.gr_min = std::min(out.gr_min, g.gr[v]);
  }
  const double hi = r / 3;
  std::vector<double> ds, gs;
  for (int v : region) {
    const double d = std::abs(emb.positions[v] - zx);
    if (v == x || d <= 0 || d >= hi) continue;
    out.points.add({static_cast<double>(v), d, g.gr[v]});
    ds.push_back(d);
    gs.push_back(g.gr[v]);
  }
  out.fit = log_binned_fit(ds, gs, r / 30, hi, bins, out.bins);
  return out;
}

double harnack_ratio(const Network& net, const TutteEmbedding& emb, Point z, double s, double r) {
  if (!(s > 0 && 3 * s <= r)) throw std::invalid_argument("harnack_ratio: need 0 < 3s <= r");
  int xz = 0;
  for (int v = 1; v < net.size(); ++v)
    if (std::abs(emb.positions[v] - z) < std::abs(emb.positions[xz] - z)) xz = v;
  const Point c = emb.positions[xz];
  const auto region = embedded_ball(emb, c, r);
  const auto g = green_function(net, region, xz);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  int used = 0;
  for (int v : embedded_circle(net, emb, c, s)) {
    if (std::abs(emb.positions[v] - c) >= r) continue;
    lo = std::min(lo, g.gr[v]);
    hi = std::max(hi, g.gr[v]);
    ++used;
  }
  if (!used) throw std::invalid_argument("harnack_ratio: empty circle set");
  return hi / lo;
}

Table exit_time_scan(const Network& net, const TutteEmbedding& emb, const std::vector<int>& centres,
                     const std::vector<double>& radii, int walks, const Rng& rng, double cell_fraction,
                     long budget) {
  Table t({"centre", "x", "y", "r", "walks", "mean", "median", "second_moment", "moment_ratio",
           "cell_count", "truncated"});
  std::uint64_t index = 0;
  for (int c : centres) {
    const Point zc = emb.positions[c];
    for (double r : radii) {
      Rng rr = rng.split(index++);
      std::vector<double> taus;
      double truncated = 0;
      for (int w = 0; w < walks; ++w) {
        const long s = exit_steps(net, emb.positions, c, zc, r, rr, budget);
        if (s < 0) ++truncated;
        else taus.push_back(static_cast<double>(s));
      }
      if (taus.empty()) throw std::runtime_error("exit_time_scan: every walk exhausted the budget");
      double m1 = 0, m2 = 0;
      for (double x : taus) m1 += x, m2 += x * x;
      m1 /= static_cast<double>(taus.size());
      m2 /= static_cast<double>(taus.size());
      const double cells = static_cast<double>(embedded_ball(emb, zc, cell_fraction * r).size());
      t.add({static_cast<double>(c), zc.real(), zc.imag(), r, static_cast<double>(walks), m1,
             stats::median(taus), m2, m1 > 0 ? m2 / (m1 * m1) : 1.0, cells, truncated});
    }
  }
  return t;
}

double modulus_exponent(double gamma) { return 2 * (2 + gamma) / (2 - gamma) + 0.5; }

double max_window_displacement(const WalkTrace& trace, double w) {
  const auto& t = trace.times;
  const auto& p = trace.points;
  const std::size_t n = p.size();
  if (n < 2) return 0;
  const auto interp = [&](std::size_t j, double s) {
    const double span = t[j] - t[j - 1];
    return span > 0 ? p[j - 1] + (s - t[j - 1]) / span * (p[j] - p[j - 1]) : p[j];
  };
  double best = 0;
  std::size_t back = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + 1;
    for (; j < n && t[j] - t[i] <= w; ++j) best = std::max(best, std::abs(p[j] - p[i]));
    if (j < n) best = std::max(best, std::abs(interp(j, t[i] + w) - p[i]));
    while (back < i && t[back] < t[i] - w) ++back;
    if (back > 0 && t[back] > t[i] - w) best = std::max(best, std::abs(interp(back, t[i] - w) - p[i]));
  }
  return best;
}

Table modulus_statistic(const std::vector<WalkTrace>& traces, const std::vector<double>& deltas,
                        double gamma) {
  const double chi = modulus_exponent(gamma);
  Table t({"delta", "window", "violation_frequency", "mean_max_displacement"});
  for (double delta : deltas) {
    const double w = std::pow(delta, chi);
    double violations = 0, total = 0;
    for (const auto& tr : traces) {
      const double d = max_window_displacement(tr, w);
      total += d;
      if (d > 2 * delta) ++violations;
    }
    const double n = std::max<double>(1, static_cast<double>(traces.size()));
    t.add({delta, w, violations / n, total / n});
  }
  return t;
}

DegreeStats degree_statistics(const MatedCrtMap& map, int margin) {
  DegreeStats s;
  double sum = 0;
  for (int x = std::max(0, margin); x <= map.n - 1 - margin; ++x) {
    const int d = map.degree(x);
    if (d >= static_cast<int>(s.histogram.size())) s.histogram.resize(static_cast<std::size_t>(d) + 1, 0);
    ++s.histogram[static_cast<std::size_t>(d)];
    s.max_degree = std::max(s.max_degree, d);
    sum += d;
    ++s.bulk;
  }
  if (!s.bulk) throw std::invalid_argument("degree_statistics: empty bulk");
  s.mean = sum / static_cast<double>(s.bulk);
  return s;
}

int interval_perimeter(double gamma, int n_cells, std::uint64_t seed, int substeps) {
  PathParams p;
  p.gamma = gamma;
  p.n_cells = n_cells;
  p.substeps = substeps;
  p.seed = seed;
  p.cell_duration = 1.0 / n_cells;
  return enumerate_faces(map_from_path(sample_plane(p))).perimeter;
}

std::vector<long> record_counts(const std::vector<int>& sizes, int substeps, Rng& rng) {
  if (sizes.empty()) return {};
  const int n = *std::max_element(sizes.begin(), sizes.end());
  const double sd = std::sqrt(1.0 / substeps);
  std::vector<long> cumulative(static_cast<std::size_t>(n) + 1, 0);
  double b = 0, running = 0;
  bool last_was_record = true;
  for (int k = 1; k <= n; ++k) {
    bool hit = last_was_record;
    for (int s = 0; s < substeps; ++s) {
      b += sd * rng.normal();
      last_was_record = b < running;
      if (last_was_record) {
        running = b;
        hit = true;
      }
    }
    cumulative[static_cast<std::size_t>(k)] = cumulative[static_cast<std::size_t>(k) - 1] + (hit ? 1 : 0);
  }
  std::vector<long> out;
  for (int m : sizes) out.push_back(cumulative[static_cast<std::size_t>(m)]);
  return out;
}

Table bm_comparison(const Network& net, const TutteEmbedding& emb, const std::vector<int>& centres,
                    double radius, int walks, const Rng& rng) {
  Table t({"ball", "centre", "x", "y", "r", "walks", "ks", "p_value"});
  for (std::size_t b = 0; b < centres.size(); ++b) {
    const int c = centres[b];
    const Point zc = emb.positions[c];
    Rng rb = rng.split(b);
    std::vector<double> u;
    for (int w = 0; w < walks; ++w) {
      const auto e = exit_walk(net, emb.positions, c, zc, radius, rb, 10'000'000);
      if (e.steps < 0) continue;
      double a = std::arg(emb.positions[e.vertex] - zc) / (2 * std::numbers::pi);
      if (a < 0) a += 1;
      u.push_back(a);
    }
    const auto ks = stats::ks_uniform(u);
    t.add({static_cast<double>(b), static_cast<double>(c), zc.real(), zc.imag(), radius,
           static_cast<double>(u.size()), ks.statistic, ks.p_value});
  }
  return t;
}

stats::KsResult normalized_ks(std::vector<double> a, std::vector<double> b) {
  std::erase_if(a, [](double x) { return !std::isfinite(x); });
  std::erase_if(b, [](double x) { return !std::isfinite(x); });
  if (a.empty() || b.empty()) throw std::invalid_argument("normalized_ks: empty sample");
  const double ma = stats::median(a), mb = stats::median(b);
  for (double& x : a) x /= ma;
  for (double& x : b) x /= mb;
  return stats::ks_two_sample(std::move(a), std::move(b));
}

LbmWalkRecord lbm_walk_comparison(double gamma, int n, int M, int replicates, int walks, const Rng& rng,
                                  const MEpsOptions& opts) {
  MEpsOptions mo = opts;
  mo.walks_per_map = walks;
  const auto walk = estimate_m_eps(gamma, n, replicates, rng.split(0), mo);

  std::vector<std::vector<double>> per_field(static_cast<std::size_t>(replicates));
  parallel_for(per_field.size(), opts.threads, [&](std::size_t k) {
    Rng rk = rng.split(1).split(k);
    const auto field = add_cone_singularity(sample_gff(M, FieldBc::ZeroBoundary, rk()), gamma);
    const auto density = Density::from_measure(build_lqg_measure(field, gamma));
    per_field[k] = estimate_m0(density, static_cast<std::size_t>(walks), rk.split(1)).exit_times;
  });
  std::vector<double> lbm;
  for (const auto& v : per_field)
    for (double x : v)
      if (std::isfinite(x)) lbm.push_back(x);

  LbmWalkRecord rec;
  rec.n = n;
  rec.M = M;
  std::vector<double> w;
  for (double x : walk.exit_steps)
    if (std::isfinite(x)) w.push_back(x);
  rec.m_eps = stats::median(w);
  rec.m0 = stats::median(lbm);
  rec.walk_samples = w.size();
  rec.lbm_samples = lbm.size();
  const auto ks = normalized_ks(w, lbm);
  rec.ks = ks.statistic;
  rec.p_value = ks.p_value;
  return rec;
}

}  // namespace mcrt
