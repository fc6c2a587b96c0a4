#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "mcrt/electrical.hpp"
#include "mcrt/experiments.hpp"
#include "mcrt/field_lqg.hpp"
#include "mcrt/lbm.hpp"

namespace mcrt {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
// Median exit time of planar Brownian motion from B_{1/2}(0).
constexpr double kBmExitMedian = 0.100262;

using Runner = void (*)(const ExperimentConfig&, ExperimentResult&);

std::uint64_t replicate_seed(const ExperimentConfig& cfg, std::size_t gi, std::size_t si, std::size_t rep) {
  return Rng(cfg.seed).split(gi).split(si).split(rep)();
}

Rng replicate_rng(const ExperimentConfig& cfg, std::size_t gi, std::size_t si, std::size_t rep) {
  return Rng(cfg.seed, 1).split(gi).split(si).split(rep);
}

DiskMapOptions map_options(const ExperimentConfig& cfg) {
  DiskMapOptions o;
  o.substeps = cfg.substeps;
  return o;
}

std::vector<int> vertices_within(const TutteEmbedding& emb, double bound, std::size_t count, Rng& rng) {
  std::vector<int> pool;
  for (int v = 0; v < static_cast<int>(emb.positions.size()); ++v)
    if (std::abs(emb.positions[v]) < bound && !emb.is_boundary[v]) pool.push_back(v);
  if (pool.empty()) throw std::runtime_error("no vertices inside the sampling radius");
  std::vector<int> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[rng.below(pool.size())]);
  return out;
}

std::vector<double> log_of(const std::vector<double>& xs) {
  std::vector<double> out;
  for (double x : xs) out.push_back(std::log(x));
  return out;
}

void report_fit(ExperimentResult& res, const std::string& prefix, const stats::LinearFit& f, double gamma,
                double size = kNan) {
  res.report(prefix + "_slope", gamma, size, f.slope);
  res.report(prefix + "_slope_lo", gamma, size, f.slope_lo);
  res.report(prefix + "_slope_hi", gamma, size, f.slope_hi);
  res.report(prefix + "_intercept", gamma, size, f.intercept);
  res.report(prefix + "_r_squared", gamma, size, f.r_squared);
}

std::vector<double> fit_line(const stats::LinearFit& f, const std::vector<double>& x, bool logx, bool logy) {
  std::vector<double> y;
  for (double v : x) {
    const double fx = f.intercept + f.slope * (logx ? std::log(v) : v);
    y.push_back(logy ? std::exp(fx) : fx);
  }
  return y;
}

std::string gamma_label(double g) {
  std::ostringstream os;
  os << "gamma=" << g;
  return os.str();
}

// ------------------------------------------------------------- maps

void run_degree(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "replicate", "mean_degree", "max_degree", "bulk"});
  Table hist({"gamma", "n", "degree", "count"});
  const double margin_fraction = cfg.tolerance("margin_fraction", 0.01);
  ExperimentResult::Plot plot{"max_degree.svg", {"Maximum degree", "n", "max degree", true, true}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    std::vector<double> ns, maxdeg;
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      const int margin = static_cast<int>(margin_fraction * n);
      std::vector<DegreeStats> st(static_cast<std::size_t>(cfg.replicates));
      parallel_for(st.size(), cfg.threads, [&](std::size_t k) {
        PathParams p;
        p.gamma = gamma;
        p.n_cells = n;
        p.substeps = cfg.substeps;
        p.seed = replicate_seed(cfg, gi, si, k);
        st[k] = degree_statistics(map_from_path(sample_plane(p)), margin);
      });
      double sum = 0, bulk = 0, mx = 0;
      std::vector<long> h;
      for (std::size_t k = 0; k < st.size(); ++k) {
        rows.add({gamma, static_cast<double>(n), static_cast<double>(k), st[k].mean,
                  static_cast<double>(st[k].max_degree), static_cast<double>(st[k].bulk)});
        sum += st[k].mean * static_cast<double>(st[k].bulk);
        bulk += static_cast<double>(st[k].bulk);
        mx += st[k].max_degree;
        if (h.size() < st[k].histogram.size()) h.resize(st[k].histogram.size(), 0);
        for (std::size_t d = 0; d < st[k].histogram.size(); ++d) h[d] += st[k].histogram[d];
      }
      for (std::size_t d = 0; d < h.size(); ++d)
        if (h[d]) hist.add({gamma, static_cast<double>(n), static_cast<double>(d), static_cast<double>(h[d])});
      res.report("mean_degree", gamma, n, sum / bulk);
      ns.push_back(n);
      maxdeg.push_back(mx / static_cast<double>(st.size()));
      res.report("mean_max_degree", gamma, n, maxdeg.back());
    }
    if (ns.size() >= 2) {
      const auto f = stats::linear_fit(log_of(ns), log_of(maxdeg));
      report_fit(res, "max_degree", f, gamma);
      plot.spec.title = "Maximum degree against n";
      plot.series.push_back({gamma_label(gamma), ns, maxdeg, false});
    }
  }
  res.tables["degrees"] = rows;
  res.tables["histogram"] = hist;
  if (!plot.series.empty()) res.plots.push_back(plot);
}

void run_perimeter(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "replicate", "perimeter"});
  Table means({"gamma", "n", "mean_perimeter", "sd"});
  ExperimentResult::Plot plot{"perimeter.svg", {"Interval submap perimeter", "n", "mean perimeter", true, true}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    std::vector<double> ns, ms;
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      std::vector<double> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        per[k] = interval_perimeter(gamma, n, replicate_seed(cfg, gi, si, k), cfg.substeps);
      });
      for (std::size_t k = 0; k < per.size(); ++k)
        rows.add({gamma, static_cast<double>(n), static_cast<double>(k), per[k]});
      const double m = stats::mean(per);
      means.add({gamma, static_cast<double>(n), m, per.size() > 1 ? std::sqrt(stats::variance(per)) : 0.0});
      ns.push_back(n);
      ms.push_back(m);
    }
    if (ns.size() >= 2) {
      const auto f = stats::linear_fit(log_of(ns), log_of(ms));
      report_fit(res, "perimeter_exponent", f, gamma);
      plot.series.push_back({gamma_label(gamma), ns, ms, false});
      plot.series.push_back({"fit " + gamma_label(gamma), ns, fit_line(f, ns, true, true), true});
    }
  }
  res.tables["perimeter"] = rows;
  res.tables["means"] = means;
  res.plots.push_back(plot);
}

void run_records(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"n", "mean_records", "sd"});
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(cfg.replicates));
  parallel_for(counts.size(), cfg.threads, [&](std::size_t k) {
    Rng rng = replicate_rng(cfg, 0, 0, k);
    counts[k] = record_counts(cfg.sizes, cfg.substeps, rng);
  });
  std::vector<double> ns, ms;
  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    std::vector<double> xs;
    for (const auto& c : counts) xs.push_back(static_cast<double>(c[si]));
    ns.push_back(cfg.sizes[si]);
    ms.push_back(stats::mean(xs));
    rows.add({ns.back(), ms.back(), xs.size() > 1 ? std::sqrt(stats::variance(xs)) : 0.0});
  }
  res.tables["records"] = rows;
  if (ns.size() >= 2) {
    const auto f = stats::linear_fit(log_of(ns), log_of(ms));
    report_fit(res, "record_exponent", f, kNan);
    res.plots.push_back({"records.svg",
                         {"Running-minimum intervals K_n", "n", "mean K_n", true, true},
                         {{"K_n", ns, ms, false}, {"fit", ns, fit_line(f, ns, true, true), true}}});
  }
}

void run_m_eps(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "m_eps", "m_eps_over_n", "maps", "samples", "truncated"});
  Table raw({"gamma", "n", "exit_steps"});
  MEpsOptions opts;
  opts.map = map_options(cfg);
  opts.walks_per_map = cfg.walks;
  opts.threads = cfg.threads;
  ExperimentResult::Plot plot{"m_eps.svg", {"Median exit steps from B_1/2", "n", "m_eps", true, true}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    std::vector<double> ns, ms, ratios;
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      const auto est = estimate_m_eps(gamma, n, cfg.replicates, replicate_rng(cfg, gi, si, 0), opts);
      rows.add({gamma, static_cast<double>(n), est.median, est.median / n, static_cast<double>(est.maps),
                static_cast<double>(est.exit_steps.size()), static_cast<double>(est.truncated)});
      for (double s : est.exit_steps) raw.add({gamma, static_cast<double>(n), s});
      res.report("m_eps", gamma, n, est.median);
      ns.push_back(n);
      ms.push_back(est.median);
      ratios.push_back(est.median / n);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    res.report("m_eps_over_n_max_min_ratio", gamma, kNan, *hi / *lo);
    for (std::size_t i = 1; i < ms.size(); ++i)
      res.report("m_eps_step_ratio", gamma, ns[i], ms[i] / ms[i - 1]);
    if (ns.size() >= 2) report_fit(res, "m_eps_exponent", stats::linear_fit(log_of(ns), log_of(ms)), gamma);
    plot.series.push_back({gamma_label(gamma), ns, ms, false});
  }
  res.tables["m_eps"] = rows;
  res.tables["exit_steps"] = raw;
  res.plots.push_back(plot);
}

// ------------------------------------------------------ electrical

void run_resistance(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "replicate", "s", "r", "log_ratio", "R", "inner", "circle"});
  Table means({"gamma", "n", "log_ratio", "mean_R", "sd"});
  const double r_out = cfg.tolerance("outer_radius", 0.5);
  const int ratios = static_cast<int>(cfg.tolerance("ratios", 5));
  std::vector<std::pair<double, double>> radii;
  for (int k = 1; k <= ratios; ++k) radii.push_back({r_out / std::exp2(k), r_out});
  ExperimentResult::Plot plot{"resistance.svg", {"Annulus resistance", "log(r/s)", "R", false, false}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      std::vector<Table> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        const auto em = embedded_disk_map(gamma, n, replicate_seed(cfg, gi, si, k), map_options(cfg));
        per[k] = annulus_resistance_scan(em.net, em.emb, em.emb.positions[em.emb.root], radii);
      });
      std::vector<std::vector<double>> by_ratio(radii.size());
      for (std::size_t k = 0; k < per.size(); ++k)
        for (std::size_t i = 0; i < per[k].rows(); ++i) {
          const auto& r = per[k].row(i);
          std::vector<Cell> row{gamma, static_cast<double>(n), static_cast<double>(k)};
          row.insert(row.end(), r.begin(), r.end());
          rows.add(row);
          by_ratio[i].push_back(std::get<double>(r[3]));
        }
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < radii.size(); ++i) {
        xs.push_back(std::log(radii[i].second / radii[i].first));
        ys.push_back(stats::mean(by_ratio[i]));
        means.add({gamma, static_cast<double>(n), xs.back(), ys.back(),
                   by_ratio[i].size() > 1 ? std::sqrt(stats::variance(by_ratio[i])) : 0.0});
      }
      const auto f = stats::linear_fit(xs, ys);
      report_fit(res, "resistance_log", f, gamma, n);
      plot.series.push_back({gamma_label(gamma) + " n=" + std::to_string(n), xs, ys, false});
      plot.series.push_back({"fit", xs, fit_line(f, xs, false, false), true});
    }
  }
  res.tables["resistance"] = rows;
  res.tables["means"] = means;
  res.plots.push_back(plot);
}

void run_green(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table points({"gamma", "n", "replicate", "distance", "gr"});
  const double r = cfg.tolerance("region_radius", 0.5);
  ExperimentResult::Plot plot{"green.svg", {"Green's function against distance", "log(1/distance)", "mean gr", false, false}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      std::vector<GreenScan> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        const auto em = embedded_disk_map(gamma, n, replicate_seed(cfg, gi, si, k), map_options(cfg));
        per[k] = green_log_scan(em.net, em.emb, em.emb.root, r);
      });
      std::vector<double> ds, gs;
      double source_max = 1, nonneg = 1;
      for (std::size_t k = 0; k < per.size(); ++k) {
        const auto d = per[k].points.numbers("distance");
        const auto g = per[k].points.numbers("gr");
        for (std::size_t i = 0; i < d.size(); ++i)
          points.add({gamma, static_cast<double>(n), static_cast<double>(k), d[i], g[i]});
        ds.insert(ds.end(), d.begin(), d.end());
        gs.insert(gs.end(), g.begin(), g.end());
        if (per[k].gr_at_source < per[k].gr_max) source_max = 0;
        if (per[k].gr_min < 0) nonneg = 0;
        res.report("green_map_r_squared", gamma, n, per[k].fit.r_squared);
      }
      Table bins({"distance", "log_inv_distance", "mean_gr", "count"});
      const auto f = log_binned_fit(ds, gs, r / 30, r / 3, 8, bins);
      res.tables["bins_n" + std::to_string(n) + "_" + gamma_label(gamma)] = bins;
      report_fit(res, "green_log", f, gamma, n);
      res.report("green_source_is_max", gamma, n, source_max);
      res.report("green_nonnegative", gamma, n, nonneg);
      const auto xs = bins.numbers("log_inv_distance");
      plot.series.push_back({gamma_label(gamma) + " n=" + std::to_string(n), xs, bins.numbers("mean_gr"), false});
      plot.series.push_back({"fit", xs, fit_line(f, xs, false, false), true});
    }
  }
  res.tables["points"] = points;
  res.plots.push_back(plot);
}

void run_harnack(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "draw", "x", "y", "s", "r", "ratio"});
  const double r = cfg.tolerance("outer_radius", 0.25);
  const double bound = cfg.tolerance("centre_radius", 0.5);
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      const int draws = cfg.walks;
      std::vector<std::vector<std::vector<Cell>>> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        const auto em = embedded_disk_map(gamma, n, replicate_seed(cfg, gi, si, k), map_options(cfg));
        Rng rng = replicate_rng(cfg, gi, si, k);
        for (int d = static_cast<int>(k); d < draws; d += cfg.replicates) {
          const Point z = em.emb.positions[vertices_within(em.emb, bound, 1, rng)[0]];
          const double s = r / 3 * std::exp2(-3 * rng.uniform());
          per[k].push_back({gamma, static_cast<double>(n), static_cast<double>(d), z.real(), z.imag(), s, r,
                            harnack_ratio(em.net, em.emb, z, s, r)});
        }
      });
      std::vector<double> ratios;
      for (const auto& p : per)
        for (const auto& row : p) {
          rows.add(row);
          ratios.push_back(std::get<double>(row.back()));
        }
      res.report("harnack_p95", gamma, n, stats::quantile(ratios, 0.95));
      res.report("harnack_median", gamma, n, stats::median(ratios));
      res.report("harnack_min", gamma, n, *std::min_element(ratios.begin(), ratios.end()));
      res.report("harnack_max", gamma, n, *std::max_element(ratios.begin(), ratios.end()));
    }
  }
  res.tables["ratios"] = rows;
}

void run_exit_time(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "replicate", "centre", "x", "y", "r", "walks", "mean", "median", "second_moment",
              "moment_ratio", "cell_count", "truncated"});
  const std::vector<double> radii{0.05, 0.1, 0.2};
  const int centres = static_cast<int>(cfg.tolerance("centres_per_map", 5));
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      std::vector<Table> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        const auto em = embedded_disk_map(gamma, n, replicate_seed(cfg, gi, si, k), map_options(cfg));
        Rng rng = replicate_rng(cfg, gi, si, k);
        const auto cs = vertices_within(em.emb, 0.4, static_cast<std::size_t>(centres), rng);
        per[k] = exit_time_scan(em.net, em.emb, cs, radii, cfg.walks, rng.split(1));
      });
      double dominated = 0, total = 0, monotone = 0, groups = 0, worst_ratio = 0;
      for (std::size_t k = 0; k < per.size(); ++k) {
        const auto mean = per[k].numbers("mean");
        const auto cells = per[k].numbers("cell_count");
        const auto ratio = per[k].numbers("moment_ratio");
        for (std::size_t i = 0; i < per[k].rows(); ++i) {
          std::vector<Cell> row{gamma, static_cast<double>(n), static_cast<double>(k)};
          const auto& r = per[k].row(i);
          row.insert(row.end(), r.begin(), r.end());
          rows.add(row);
          total += 1;
          if (mean[i] >= cells[i]) dominated += 1;
          worst_ratio = std::max(worst_ratio, ratio[i]);
        }
        for (std::size_t i = 0; i + radii.size() <= mean.size(); i += radii.size()) {
          groups += 1;
          bool inc = true;
          for (std::size_t j = 1; j < radii.size(); ++j) inc = inc && mean[i + j] > mean[i + j - 1];
          if (inc) monotone += 1;
        }
      }
      res.report("exit_mean_ge_cells_fraction", gamma, n, dominated / total);
      res.report("exit_mean_increasing_fraction", gamma, n, monotone / groups);
      res.report("exit_max_moment_ratio", gamma, n, worst_ratio);
    }
  }
  res.tables["exit_times"] = rows;
}

void run_modulus(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "delta", "window", "violation_frequency", "mean_max_displacement"});
  const std::vector<double> deltas{0.2, 0.1, 0.05};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      std::vector<std::vector<WalkTrace>> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        const auto em = embedded_disk_map(gamma, n, replicate_seed(cfg, gi, si, k), map_options(cfg));
        Rng rng = replicate_rng(cfg, gi, si, k);
        const int root = em.emb.root;
        for (int w = 0; w < cfg.walks; ++w) {
          Rng rw = rng.split(static_cast<std::uint64_t>(w));
          per[k].push_back(run_walk(em.net, em.emb, root, StopRule::exit_ball(em.emb.positions[root], 0.5), rw));
        }
      });
      std::vector<WalkTrace> traces;
      std::vector<double> steps;
      for (auto& p : per)
        for (auto& t : p) {
          steps.push_back(static_cast<double>(t.steps()));
          traces.push_back(std::move(t));
        }
      std::sort(steps.begin(), steps.end());
      const double m = std::max(1.0, steps[(steps.size() - 1) / 2]);
      for (auto& t : traces)
        for (auto& x : t.times) x /= m;
      const auto table = modulus_statistic(traces, deltas, gamma);
      for (std::size_t i = 0; i < table.rows(); ++i) {
        std::vector<Cell> row{gamma, static_cast<double>(n)};
        const auto& r = table.row(i);
        row.insert(row.end(), r.begin(), r.end());
        rows.add(row);
        res.report("violation_frequency_delta_" + std::to_string(i), gamma, n, std::get<double>(r[2]));
      }
      res.report("modulus_exponent", gamma, n, modulus_exponent(gamma));
      res.report("m_eps", gamma, n, m);
    }
  }
  res.tables["modulus"] = rows;
}

void run_bm(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "replicate", "ball", "centre", "x", "y", "r", "walks", "ks", "p_value"});
  const int balls = static_cast<int>(cfg.tolerance("balls", 20));
  const double radius = cfg.tolerance("ball_radius", 0.25);
  ExperimentResult::Plot plot{"bm.svg", {"Exit-angle KS distance", "n", "median KS", true, false}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    std::vector<double> ns, med;
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      std::vector<Table> per(static_cast<std::size_t>(cfg.replicates));
      parallel_for(per.size(), cfg.threads, [&](std::size_t k) {
        const auto em = embedded_disk_map(gamma, n, replicate_seed(cfg, gi, si, k), map_options(cfg));
        Rng rng = replicate_rng(cfg, gi, si, k);
        const std::size_t mine = static_cast<std::size_t>((balls - static_cast<int>(k) + cfg.replicates - 1) / cfg.replicates);
        const auto cs = vertices_within(em.emb, 1.0 - radius - 0.25, mine, rng);
        per[k] = bm_comparison(em.net, em.emb, cs, radius, cfg.walks, rng.split(1));
      });
      std::vector<double> ks;
      for (std::size_t k = 0; k < per.size(); ++k)
        for (std::size_t i = 0; i < per[k].rows(); ++i) {
          std::vector<Cell> row{gamma, static_cast<double>(n), static_cast<double>(k)};
          const auto& r = per[k].row(i);
          row.insert(row.end(), r.begin(), r.end());
          rows.add(row);
          ks.push_back(std::get<double>(r[6]));
        }
      ns.push_back(n);
      med.push_back(stats::median(ks));
      res.report("bm_median_ks", gamma, n, med.back());
      res.report("bm_null_ks", gamma, n, 0.87 / std::sqrt(static_cast<double>(cfg.walks)));
    }
    plot.series.push_back({gamma_label(gamma), ns, med, false});
  }
  res.tables["ks"] = rows;
  res.plots.push_back(plot);
}

void run_lbm_walk(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"gamma", "n", "M", "m_eps", "m0", "ks", "p_value", "walk_samples", "lbm_samples"});
  MEpsOptions opts;
  opts.map = map_options(cfg);
  opts.threads = cfg.threads;
  ExperimentResult::Plot plot{"lbm_walk.svg", {"Walk against Liouville Brownian motion", "n", "KS", true, false}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    std::vector<double> ns, ks;
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int n = cfg.sizes[si];
      const auto rec = lbm_walk_comparison(gamma, n, cfg.field_size, cfg.replicates, cfg.walks,
                                           replicate_rng(cfg, gi, si, 0), opts);
      rows.add({gamma, static_cast<double>(n), static_cast<double>(rec.M), rec.m_eps, rec.m0, rec.ks, rec.p_value,
                static_cast<double>(rec.walk_samples), static_cast<double>(rec.lbm_samples)});
      res.report("lbm_walk_ks", gamma, n, rec.ks);
      ns.push_back(n);
      ks.push_back(rec.ks);
    }
    double non_increasing = 0;
    for (std::size_t i = 1; i < ks.size(); ++i)
      if (ks[i] <= ks[i - 1]) non_increasing += 1;
    res.report("lbm_walk_non_increasing", gamma, kNan, non_increasing);
    res.report("lbm_walk_comparisons", gamma, kNan, static_cast<double>(ks.size()) - 1);
    plot.series.push_back({gamma_label(gamma), ns, ks, false});
  }
  res.tables["comparison"] = rows;
  res.plots.push_back(plot);
}

// ---------------------------------------------------------- fields

Eigen::MatrixXd dense_zero_boundary_green(int M) {
  const int N = M - 2;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N * N, N * N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const int v = j * N + i;
      L(v, v) = 4;
      if (i > 0) L(v, v - 1) = -1;
      if (i + 1 < N) L(v, v + 1) = -1;
      if (j > 0) L(v, v - N) = -1;
      if (j + 1 < N) L(v, v + N) = -1;
    }
  return 2 * std::numbers::pi * L.inverse();
}

void run_gff_covariance(const ExperimentConfig& cfg, ExperimentResult& res) {
  const int M = cfg.sizes.front();
  const int samples = cfg.walks;
  const auto G = dense_zero_boundary_green(M);
  const int N = M - 2;
  const std::vector<std::array<int, 4>> probes{
      {M / 2, M / 2, M / 2, M / 2}, {M / 2, M / 2, M / 2 + 1, M / 2}, {M / 2, M / 2, M / 2 + 2, M / 2 + 1},
      {2, 3, 2, 3}, {3, M / 2, M - 4, M / 2}};
  std::vector<std::vector<double>> products(probes.size());
  for (int s = 0; s < samples; ++s) {
    const auto f = sample_gff(M, FieldBc::ZeroBoundary, Rng(cfg.seed).split(static_cast<std::uint64_t>(s))());
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const auto& q = probes[p];
      products[p].push_back(f.at(q[0], q[1]) * f.at(q[2], q[3]));
    }
  }
  Table rows({"i1", "j1", "i2", "j2", "empirical", "oracle", "stderr", "z"});
  double worst = 0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& q = probes[p];
    const double oracle = G((q[1] - 1) * N + (q[0] - 1), (q[3] - 1) * N + (q[2] - 1));
    const double emp = stats::mean(products[p]);
    const double se = std::sqrt(stats::variance(products[p]) / samples);
    const double z = (emp - oracle) / se;
    worst = std::max(worst, std::abs(z));
    rows.add({double(q[0]), double(q[1]), double(q[2]), double(q[3]), emp, oracle, se, z});
  }
  res.tables["covariance"] = rows;
  res.report("covariance_max_abs_z", kNan, M, worst);
}

void run_gmc(const ExperimentConfig& cfg, ExperimentResult& res) {
  const std::vector<double> deltas{0.025, 0.05, 0.1, 0.2};
  const std::vector<double> env_deltas{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  const int envelope_fields = static_cast<int>(cfg.tolerance("envelope_fields", 4));
  Table logmass({"gamma", "M", "delta", "mean_log_mass", "sd", "mean_mass"});
  Table envelope({"gamma", "M", "field", "delta", "min_mass", "max_mass"});
  ExperimentResult::Plot plot{"gmc.svg", {"Ball mass at a fixed point", "delta", "exp E log mass", true, true}, {}};
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      const int M = cfg.sizes[si];
      std::vector<std::vector<double>> masses(static_cast<std::size_t>(cfg.replicates));
      parallel_for(masses.size(), cfg.threads, [&](std::size_t k) {
        const auto mu = build_lqg_measure(sample_gff(M, FieldBc::ZeroBoundary, replicate_seed(cfg, gi, si, k)), gamma);
        for (double d : deltas) masses[k].push_back(mu.ball_mass(0, d));
      });
      std::vector<double> xs, ys;
      for (std::size_t di = 0; di < deltas.size(); ++di) {
        std::vector<double> logs, raw;
        for (const auto& m : masses) logs.push_back(std::log(m[di])), raw.push_back(m[di]);
        logmass.add({gamma, double(M), deltas[di], stats::mean(logs), std::sqrt(stats::variance(logs)),
                     stats::mean(raw)});
        xs.push_back(std::log(deltas[di]));
        ys.push_back(stats::mean(logs));
      }
      const auto f = stats::linear_fit(xs, ys);
      report_fit(res, "log_mass_exponent", f, gamma, M);
      res.report("log_mass_target", gamma, M, 2 + gamma * gamma / 2);
      std::vector<double> ey;
      for (double y : ys) ey.push_back(std::exp(y));
      plot.series.push_back({gamma_label(gamma) + " M=" + std::to_string(M), deltas, ey, false});

      std::vector<BallMassScan> scans(static_cast<std::size_t>(envelope_fields));
      parallel_for(scans.size(), cfg.threads, [&](std::size_t k) {
        const auto field = add_cone_singularity(
            sample_gff(M, FieldBc::ZeroBoundary, replicate_seed(cfg, gi, si, 1000 + k)), gamma);
        const auto mu = build_lqg_measure(field, gamma);
        std::vector<std::complex<double>> centres;
        for (int j = 0; j < M; j += 2)
          for (int i = 0; i < M; i += 2) {
            const std::complex<double> z(-1 + (i + 0.5) * mu.a, -1 + (j + 0.5) * mu.a);
            if (std::abs(z) <= 0.5) centres.push_back(z);
          }
        scans[k] = ball_mass_scan(mu, centres, env_deltas);
      });
      double emin = 0, emax = 0;
      for (std::size_t k = 0; k < scans.size(); ++k) {
        for (std::size_t di = 0; di < env_deltas.size(); ++di)
          envelope.add({gamma, double(M), double(k), env_deltas[di], scans[k].min_mass[di], scans[k].max_mass[di]});
        emin += scans[k].min_exponent / static_cast<double>(scans.size());
        emax += scans[k].max_exponent / static_cast<double>(scans.size());
      }
      res.report("envelope_min_exponent", gamma, M, emin);
      res.report("envelope_max_exponent", gamma, M, emax);
      res.report("envelope_min_target", gamma, M, (2 + gamma) * (2 + gamma) / 2);
      res.report("envelope_max_target", gamma, M, (2 - gamma) * (2 - gamma) / 2);
    }
  }
  res.tables["log_mass"] = logmass;
  res.tables["envelope"] = envelope;
  res.plots.push_back(plot);
}

void run_lbm_m0(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"density", "gamma", "M", "samples", "median", "ci_lo", "ci_hi", "truncated"});
  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    const int M = cfg.sizes[si];
    const auto flat = estimate_m0(Density::constant(M, 1.0), static_cast<std::size_t>(cfg.walks),
                                  replicate_rng(cfg, 0, si, 0));
    rows.add({"constant", 0.0, double(M), double(cfg.walks), flat.median, flat.ci_lo, flat.ci_hi,
              double(flat.truncated)});
    res.report("m0_lebesgue", kNan, M, flat.median);
    res.report("m0_lebesgue_rel_error", kNan, M, flat.median / kBmExitMedian - 1);
    for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
      const double gamma = cfg.gammas[gi];
      std::vector<double> meds(static_cast<std::size_t>(cfg.replicates));
      parallel_for(meds.size(), cfg.threads, [&](std::size_t k) {
        const auto field = add_cone_singularity(sample_gff(M, FieldBc::ZeroBoundary, replicate_seed(cfg, gi, si, k)), gamma);
        const auto est = estimate_m0(Density::from_measure(build_lqg_measure(field, gamma)),
                                     static_cast<std::size_t>(cfg.walks), replicate_rng(cfg, gi, si, k + 1));
        meds[k] = est.median;
      });
      for (std::size_t k = 0; k < meds.size(); ++k)
        rows.add({"cone_field", gamma, double(M), double(cfg.walks), meds[k], kNan, kNan, 0.0});
      res.report("m0_cone_median_of_medians", gamma, M, stats::median(meds));
    }
  }
  res.tables["m0"] = rows;
}

void run_lbm_invariance(const ExperimentConfig& cfg, ExperimentResult& res) {
  Table rows({"case", "gamma", "M", "t", "samples", "survivors", "tv", "chi_square", "dof", "p_value"});
  Table bins({"case", "bin", "start", "end"});
  const int M = cfg.sizes.front();
  const auto n = static_cast<std::size_t>(cfg.walks);
  const auto add = [&](const std::string& name, double gamma, const InvarianceRecord& r) {
    rows.add({name, gamma, double(M), r.t, double(r.samples), double(r.survivors), r.tv, r.chi_square,
              double(r.dof), r.p_value});
    for (std::size_t b = 0; b < r.start_hist.size(); ++b) bins.add({name, double(b), r.start_hist[b], r.end_hist[b]});
  };
  InvarianceOptions torus;
  torus.wrap = true;
  const auto flat = invariance_test(Density::constant(M, 1.0), 0.05, n, replicate_rng(cfg, 0, 0, 0), torus);
  add("torus_lebesgue", 0.0, flat);
  res.report("invariance_tv_torus_lebesgue", kNan, M, flat.tv);
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    const auto mu = build_lqg_measure(sample_gff(M, FieldBc::ZeroBoundary, replicate_seed(cfg, gi, 0, 0)), gamma);
    const auto density = Density::from_measure(mu);
    const double m0 = estimate_m0(density, 2000, replicate_rng(cfg, gi, 0, 1)).median;
    const double t = cfg.tolerance("time_fraction", 0.1) * m0;
    const auto rec = invariance_test(density, t, n, replicate_rng(cfg, gi, 0, 2));
    add("field", gamma, rec);
    res.report("invariance_m0", gamma, M, m0);
    res.report("invariance_tv", gamma, M, rec.tv);
    res.report("invariance_p_value", gamma, M, rec.p_value);
    res.report("invariance_survivors", gamma, M, double(rec.survivors));
  }
  res.tables["invariance"] = rows;
  res.tables["bins"] = bins;
}

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"degree", run_degree},         {"perimeter", run_perimeter},
      {"records", run_records},       {"m_eps", run_m_eps},
      {"resistance", run_resistance}, {"green", run_green},
      {"harnack", run_harnack},       {"exit_time", run_exit_time},
      {"modulus", run_modulus},       {"bm", run_bm},
      {"lbm_walk", run_lbm_walk},     {"gff_covariance", run_gff_covariance},
      {"gmc", run_gmc},               {"lbm_m0", run_lbm_m0},
      {"lbm_invariance", run_lbm_invariance}};
  return r;
}

}  // namespace

void ExperimentResult::report(const std::string& metric, double gamma, double size, double value) {
  summary.add({metric, gamma, size, value});
}

double summary_value(const Table& summary, const std::string& metric, double gamma, double size) {
  const auto names = summary.strings("metric");
  const auto gammas = summary.numbers("gamma");
  const auto sizes = summary.numbers("size");
  const auto values = summary.numbers("value");
  const auto match = [](double want, double have) {
    return std::isnan(want) || std::isnan(have) || std::abs(want - have) <= 1e-9 * std::max(1.0, std::abs(want));
  };
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == metric && match(gamma, gammas[i]) && match(size, sizes[i])) return values[i];
  throw std::out_of_range("summary: no metric " + metric);
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto& [name, fn] : registry())
    if (name == cfg.experiment) {
      ExperimentResult res;
      res.name = name;
      const auto t0 = std::chrono::steady_clock::now();
      fn(cfg, res);
      res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return res;
    }
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

std::vector<std::string> write_experiment(const ExperimentResult& result, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  const auto emit = [&](const std::string& stem, const Table& t) {
    const fs::path p = fs::path(cfg.out_dir) / (result.name + "_" + stem + (cfg.format == "json" ? ".json" : ".csv"));
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    if (cfg.format == "json") out << t.to_json() << '\n';
    else t.write_csv(out);
    written.push_back(p.string());
  };
  for (const auto& [name, t] : result.tables) emit(name, t);
  emit("summary", result.summary);
  for (const auto& plot : result.plots) {
    const fs::path p = fs::path(cfg.out_dir) / (result.name + "_" + plot.file);
    std::ofstream out(p);
    write_svg_plot(out, plot.spec, plot.series);
    written.push_back(p.string());
  }
  std::ostringstream cfg_text;
  write_config(cfg_text, cfg);
  nlohmann::json manifest{{"experiment", result.name},
                          {"config", cfg_text.str()},
                          {"seed", cfg.seed},
                          {"version", "1.0.0"},
                          {"compiler", __VERSION__},
                          {"wall_seconds", result.wall_seconds},
                          {"outputs", written}};
  const fs::path mp = fs::path(cfg.out_dir) / (result.name + "_manifest.json");
  std::ofstream(mp) << manifest.dump(2) << '\n';
  written.push_back(mp.string());
  return written;
}

}  // namespace mcrt
