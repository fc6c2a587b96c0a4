#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "mcrt/config.hpp"
#include "mcrt/electrical.hpp"
#include "mcrt/experiments.hpp"
#include "mcrt/lbm.hpp"
#include "mcrt/table.hpp"

using namespace mcrt;

namespace {

Network path3() { return Network(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

MatedCrtMap path3_map() {
  CellMinima l{Coord::L, {0, -1, 0}}, r{Coord::R, {0, -1, 0}};
  return build_map(l, r);
}

const EmbeddedMap& small_disk() {
  static const EmbeddedMap em = embedded_disk_map(1.0, 512, 7);
  return em;
}

}  // namespace

TEST(RunWalk, SingleVertexIsConstant) {
  const Network net(1, {});
  const auto emb = tutte_embed(net, {0}, 0);
  Rng rng(1);
  const auto tr = run_walk(net, emb, 0, StopRule::after(5), rng);
  ASSERT_EQ(tr.points.size(), 6u);
  for (const auto& p : tr.points) EXPECT_EQ(p, tr.points.front());
}

TEST(RunWalk, ZeroStepsIsStart) {
  const auto& em = small_disk();
  Rng rng(1);
  const auto tr = run_walk(em.net, em.emb, em.emb.root, StopRule::after(0), rng);
  EXPECT_EQ(tr.vertices, std::vector<int>{em.emb.root});
}

TEST(RunWalk, PathSymmetry) {
  const auto net = path3();
  const auto emb = tutte_embed(net, {0, 2}, 1);
  Rng rng(3);
  int left = 0;
  const int runs = 100000;
  for (int k = 0; k < runs; ++k) {
    const auto tr = run_walk(net, emb, 1, StopRule::hit_boundary(), rng);
    EXPECT_EQ(tr.steps(), 1);
    if (tr.vertices.back() == 0) ++left;
  }
  EXPECT_NEAR(left / double(runs), 0.5, 0.01);
}

TEST(RunWalk, ConsecutiveVerticesAdjacent) {
  const auto& em = small_disk();
  Rng rng(5);
  const auto tr = run_walk(em.net, em.emb, em.emb.root, StopRule::after(2000), rng, 0.5);
  for (std::size_t i = 1; i < tr.vertices.size(); ++i) {
    bool adjacent = false;
    for (const auto& a : em.net.arcs(tr.vertices[i - 1])) adjacent = adjacent || a.to == tr.vertices[i];
    EXPECT_TRUE(adjacent);
    EXPECT_EQ(tr.points[i], em.emb.positions[tr.vertices[i]]);
  }
  EXPECT_DOUBLE_EQ(tr.times.back(), 1000.0);
}

TEST(RunWalk, BudgetFlagsTruncation) {
  const auto& em = small_disk();
  Rng rng(5);
  const auto tr = run_walk(em.net, em.emb, em.emb.root, StopRule::exit_ball(0, 10.0), rng, 1.0, 100);
  EXPECT_TRUE(tr.truncated);
  EXPECT_EQ(tr.steps(), 100);
  Rng rng2(5);
  EXPECT_EQ(exit_steps(em.net, em.emb.positions, em.emb.root, 0, 10.0, rng2, 100), -1);
}

TEST(RunWalk, ExitStepsMatchesTrace) {
  const auto& em = small_disk();
  const Point c = em.emb.positions[em.emb.root];
  for (int k = 0; k < 20; ++k) {
    Rng a(k), b(k);
    const auto tr = run_walk(em.net, em.emb, em.emb.root, StopRule::exit_ball(c, 0.5), a);
    EXPECT_EQ(exit_steps(em.net, em.emb.positions, em.emb.root, c, 0.5, b), tr.steps());
    EXPECT_GE(std::abs(tr.points.back() - c), 0.5);
  }
}

TEST(DiskMap, RootInsideRootRadius) {
  const auto& em = small_disk();
  EXPECT_FALSE(em.map.is_boundary(em.emb.root));
  EXPECT_LT(std::abs(em.emb.positions[em.emb.root]), 0.25);
  DiskMapOptions opts;
  opts.root_radius = 1e-12;
  opts.root_retries = 3;
  EXPECT_THROW(embedded_disk_map(1.0, 64, 3, opts), RetryBudgetExhausted);
}

TEST(MEps, DeterministicIntegerMedian) {
  MEpsOptions opts;
  opts.walks_per_map = 40;
  const auto a = estimate_m_eps(1.0, 256, 2, Rng(9), opts);
  const auto b = estimate_m_eps(1.0, 256, 2, Rng(9), opts);
  EXPECT_EQ(a.median, b.median);
  EXPECT_EQ(a.exit_steps, b.exit_steps);
  EXPECT_GE(a.median, 1.0);
  EXPECT_EQ(a.median, std::floor(a.median));
  EXPECT_EQ(a.exit_steps.size(), 80u);
  opts.threads = 2;
  EXPECT_EQ(estimate_m_eps(1.0, 256, 2, Rng(9), opts).exit_steps, a.exit_steps);
}

TEST(Annulus, ShortedAndMonotone) {
  const auto& em = small_disk();
  const Point z = em.emb.positions[em.emb.root];
  const auto t = annulus_resistance_scan(em.net, em.emb, z, {{0.2, 0.2}, {0.05, 0.1}, {0.05, 0.2}, {0.05, 0.4}});
  const auto R = t.numbers("R");
  const auto ball = embedded_ball(em.emb, z, 0.2);
  std::vector<std::uint8_t> in(em.net.size(), 0);
  for (int v : ball) in[v] = 1;
  double crossing = 0;
  for (int v : ball)
    for (const auto& a : em.net.arcs(v))
      if (!in[a.to]) crossing += a.conductance;
  EXPECT_NEAR(R[0], 1 / crossing, 1e-9 * R[0]);
  EXPECT_LT(R[1], R[2]);
  EXPECT_LT(R[2], R[3]);
  EXPECT_THROW(annulus_resistance_scan(em.net, em.emb, Point(5, 5), {{0.1, 0.2}}), std::invalid_argument);
  EXPECT_THROW(annulus_resistance_scan(em.net, em.emb, z, {{0.3, 0.2}}), std::invalid_argument);
}

TEST(Annulus, CircleSetDefinition) {
  const auto& em = small_disk();
  const Point z = em.emb.positions[em.emb.root];
  const auto ball = embedded_ball(em.emb, z, 0.3);
  const auto circle = embedded_circle(em.net, em.emb, z, 0.3);
  std::vector<std::uint8_t> in(em.net.size(), 0);
  for (int v : ball) in[v] = 1;
  for (int v : circle) {
    EXPECT_FALSE(in[v]);
    bool touches = false;
    for (const auto& a : em.net.arcs(v)) touches = touches || in[a.to];
    EXPECT_TRUE(touches);
  }
  EXPECT_EQ(inner_boundary(em.net, [&] {
              std::vector<int> out;
              for (int v = 0; v < em.net.size(); ++v)
                if (!in[v]) out.push_back(v);
              return out;
            }()),
            circle);
}

TEST(Green, MaximumAtSourceAndNonnegative) {
  const auto& em = small_disk();
  const auto g = green_log_scan(em.net, em.emb, em.emb.root, 0.5);
  EXPECT_EQ(g.gr_at_source, g.gr_max);
  EXPECT_GE(g.gr_min, 0.0);
  EXPECT_GT(g.points.rows(), 0u);
}

TEST(Green, BinnedFitRecoversLine) {
  std::vector<double> d, g;
  for (int i = 0; i < 200; ++i) {
    d.push_back(0.01 * std::pow(10.0, i / 200.0));
    g.push_back(3 + 0.7 * std::log(1 / d.back()));
  }
  Table bins({"distance", "log_inv_distance", "mean_gr", "count"});
  const auto f = log_binned_fit(d, g, 0.01, 0.1, 8, bins);
  EXPECT_NEAR(f.slope, 0.7, 1e-9);
  EXPECT_NEAR(f.intercept, 3, 1e-9);
  EXPECT_EQ(bins.rows(), 8u);
}

TEST(Harnack, RatioAtLeastOne) {
  const auto& em = small_disk();
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const Point z = em.emb.positions[rng.below(em.net.size())] * 0.3;
    EXPECT_GE(harnack_ratio(em.net, em.emb, z, 0.05, 0.2), 1.0);
  }
  EXPECT_THROW(harnack_ratio(em.net, em.emb, 0, 0.1, 0.2), std::invalid_argument);
}

TEST(Harnack, TinyCircleIsNeighbourhood) {
  const auto& em = small_disk();
  const int x = em.emb.root;
  const double ratio = harnack_ratio(em.net, em.emb, em.emb.positions[x], 1e-9, 0.3);
  const auto g = green_function(em.net, embedded_ball(em.emb, em.emb.positions[x], 0.3), x);
  double lo = 1e300, hi = 0;
  for (const auto& a : em.net.arcs(x)) lo = std::min(lo, g.gr[a.to]), hi = std::max(hi, g.gr[a.to]);
  EXPECT_NEAR(ratio, hi / lo, 1e-12 * ratio);
  EXPECT_LT(ratio, 10.0);
}

TEST(ExitTimeScan, MonotoneAndMomentShape) {
  const auto& em = small_disk();
  const auto t = exit_time_scan(em.net, em.emb, {em.emb.root}, {0.1, 0.2, 0.4}, 400, Rng(8));
  const auto mean = t.numbers("mean");
  EXPECT_LT(mean[0], mean[1]);
  EXPECT_LT(mean[1], mean[2]);
  for (double r : t.numbers("moment_ratio")) EXPECT_LE(r, 2.0 * 2.0);
}

TEST(Modulus, ConstantTraceAndLargeDelta) {
  WalkTrace c;
  for (int i = 0; i < 10; ++i) c.vertices.push_back(0), c.points.push_back({0.3, 0.1}), c.times.push_back(i);
  EXPECT_EQ(max_window_displacement(c, 3.0), 0.0);
  const auto& em = small_disk();
  Rng rng(2);
  auto tr = run_walk(em.net, em.emb, em.emb.root, StopRule::after(500), rng, 0.01);
  const auto t = modulus_statistic({c, tr}, {2.0}, 1.0);
  EXPECT_EQ(t.numbers("violation_frequency")[0], 0.0);
  EXPECT_DOUBLE_EQ(modulus_exponent(1.0), 6.5);
}

TEST(Modulus, WindowDisplacementMatchesBruteForce) {
  Rng rng(6);
  WalkTrace tr;
  double t = 0;
  Point p = 0;
  for (int i = 0; i < 40; ++i) {
    tr.vertices.push_back(i);
    tr.points.push_back(p);
    tr.times.push_back(t);
    t += 0.2 + rng.uniform();
    p += Point(rng.normal(), rng.normal());
  }
  const auto at = [&](double s) {
    std::size_t j = 1;
    while (j + 1 < tr.times.size() && tr.times[j] < s) ++j;
    const double f = (s - tr.times[j - 1]) / (tr.times[j] - tr.times[j - 1]);
    return tr.points[j - 1] + f * (tr.points[j] - tr.points[j - 1]);
  };
  for (double w : {0.1, 0.7, 2.5}) {
    double brute = 0;
    const double T = tr.times.back();
    const int grid = 4000;
    for (int a = 0; a <= grid; ++a) {
      const double s = T * a / grid;
      for (int b = 0; b <= 60; ++b) {
        const double u = std::min(T, s + w * b / 60);
        brute = std::max(brute, std::abs(at(u) - at(s)));
      }
    }
    const double exact = max_window_displacement(tr, w);
    EXPECT_GE(exact + 1e-12, brute);
    EXPECT_LE(exact, brute * 1.02 + 1e-9);
  }
}

TEST(Degree, PathDegrees) {
  const auto map = path3_map();
  ASSERT_EQ(map.num_edges(), 2);
  const auto s = degree_statistics(map, 0);
  EXPECT_NEAR(s.mean, 4.0 / 3.0, 1e-15);
  EXPECT_EQ(s.max_degree, 2);
  EXPECT_EQ(s.histogram[1], 2);
  EXPECT_EQ(s.histogram[2], 1);
  EXPECT_EQ(degree_statistics(map, 1).bulk, 1u);
  EXPECT_THROW(degree_statistics(map, 2), std::invalid_argument);
}

TEST(Perimeter, FaceTraceConvention) {
  CellMinima l{Coord::L, {0}}, r{Coord::R, {0}};
  EXPECT_EQ(interval_perimeter(1.0, 1, 3), enumerate_faces(build_map(l, r)).perimeter);
  const int p = interval_perimeter(1.0, 200, 3);
  EXPECT_GE(p, 3);
  EXPECT_LE(p, 2 * 200);
}

TEST(Records, CountsAreMonotone) {
  Rng rng(12);
  const std::vector<int> sizes{1, 4, 16, 64, 256};
  const auto k = record_counts(sizes, 16, rng);
  EXPECT_EQ(k[0], 1);
  for (std::size_t i = 1; i < k.size(); ++i) {
    EXPECT_GE(k[i], k[i - 1]);
    EXPECT_LE(k[i], sizes[i]);
  }
}

TEST(BmComparison, UniformAnglesAndSelfComparison) {
  std::vector<double> u;
  for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000);
  EXPECT_NEAR(stats::ks_uniform(u).statistic, 0.0005, 1e-12);
  const auto& em = small_disk();
  const auto t = bm_comparison(em.net, em.emb, {em.emb.root}, 0.4, 200, Rng(1));
  EXPECT_EQ(t.rows(), 1u);
  EXPECT_GT(t.numbers("ks")[0], 0.0);

  const Density d = Density::constant(64, 1.0);
  const auto a = estimate_m0(d, 4000, Rng(1)).exit_times;
  const auto b = estimate_m0(d, 4000, Rng(2)).exit_times;
  EXPECT_GT(normalized_ks(a, b).p_value, 0.001);
  EXPECT_EQ(normalized_ks(a, a).statistic, 0.0);
}

// LBM with density 1 against independent Brownian exit times on a finer
// step, both median-normalized.
TEST(LbmWalk, FlatDensityMatchesBrownianExit) {
  const auto lbm = estimate_m0(Density::constant(64, 1.0), 10000, Rng(3)).exit_times;
  std::vector<double> bm;
  Rng rng(4);
  const double dt = 2e-5, sd = std::sqrt(dt);
  for (int k = 0; k < 10000; ++k) {
    Point z = 0;
    long steps = 0;
    while (std::norm(z) < 0.25) z += Point(sd * rng.normal(), sd * rng.normal()), ++steps;
    bm.push_back(steps * dt);
  }
  EXPECT_LE(normalized_ks(lbm, bm).statistic, 0.05);
}

TEST(LbmWalk, RecordIsConsistent) {
  const auto rec = lbm_walk_comparison(1.0, 256, 64, 2, 50, Rng(5));
  EXPECT_EQ(rec.walk_samples, 100u);
  EXPECT_EQ(rec.lbm_samples, 100u);
  EXPECT_GT(rec.ks, 0.0);
  EXPECT_LE(rec.ks, 1.0);
}

TEST(Config, ParsesAndRejectsUnknownKeys) {
  std::istringstream in("# comment\nexperiment = degree\ngammas = 0.5, 1.7\nsizes = 10,20\nseed=9\ntol.margin_fraction = 0.02\n");
  ExperimentConfig cfg;
  apply_config(in, cfg);
  EXPECT_EQ(cfg.experiment, "degree");
  EXPECT_EQ(cfg.gammas, (std::vector<double>{0.5, 1.7}));
  EXPECT_EQ(cfg.sizes, (std::vector<int>{10, 20}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.tolerance("margin_fraction", 0), 0.02);
  cfg.validate();
  std::istringstream bad("colour = blue\n");
  EXPECT_THROW(apply_config(bad, cfg), ConfigError);
  std::istringstream junk("sizes = ten\n");
  EXPECT_THROW(apply_config(junk, cfg), ConfigError);
}

TEST(Config, ValidationAndRoundTrip) {
  ExperimentConfig cfg;
  cfg.experiment = "records";
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sizes = {4, 2};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sizes = {2, 4};
  cfg.gammas = {};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.gammas = {1.0, std::numbers::sqrt2};
  cfg.tolerances["x"] = 0.125;
  cfg.validate();
  std::stringstream text;
  write_config(text, cfg);
  ExperimentConfig back;
  apply_config(text, back);
  EXPECT_EQ(back.gammas, cfg.gammas);
  EXPECT_EQ(back.sizes, cfg.sizes);
  EXPECT_EQ(back.tolerances, cfg.tolerances);
}

TEST(TableIo, CsvRoundTrip) {
  Table t({"name", "x", "y"});
  t.add({"a,b", 1.5, std::nan("")});
  t.add({"plain", -2.0, std::numeric_limits<double>::infinity()});
  std::stringstream s;
  t.write_csv(s);
  const auto back = Table::read_csv(s);
  EXPECT_EQ(back.columns(), t.columns());
  EXPECT_EQ(back.strings("name"), (std::vector<std::string>{"a,b", "plain"}));
  EXPECT_EQ(back.numbers("x"), (std::vector<double>{1.5, -2.0}));
  EXPECT_TRUE(std::isnan(back.numbers("y")[0]));
  EXPECT_TRUE(std::isinf(back.numbers("y")[1]));
  EXPECT_EQ(back.lookup("name", "plain", "x"), -2.0);
  EXPECT_THROW(t.add({1.0}), std::invalid_argument);
  EXPECT_NE(t.to_json().find("\"a,b\""), std::string::npos);
}

TEST(TableIo, SvgIsSelfContained) {
  std::ostringstream os;
  write_svg_plot(os, {"t", "x", "y", true, true}, {{"pts", {1, 10, 100}, {2, 20, 200}, false}});
  EXPECT_EQ(os.str().rfind("<svg", 0), 0u);
  EXPECT_NE(os.str().find("</svg>"), std::string::npos);
}

TEST(Runner, PureFunctionOfConfig) {
  ExperimentConfig cfg;
  cfg.experiment = "perimeter";
  cfg.sizes = {32, 64};
  cfg.replicates = 3;
  cfg.seed = 4;
  const auto a = run_experiment(cfg);
  cfg.threads = 3;
  const auto b = run_experiment(cfg);
  std::ostringstream sa, sb;
  a.tables.at("perimeter").write_csv(sa);
  b.tables.at("perimeter").write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NO_THROW(summary_value(a.summary, "perimeter_exponent_slope", 1.0));
  cfg.experiment = "nope";
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Runner, WritesTablesAndManifest) {
  ExperimentConfig cfg;
  cfg.experiment = "records";
  cfg.sizes = {4, 8, 16};
  cfg.replicates = 5;
  cfg.out_dir = (std::filesystem::temp_directory_path() / "mcrt_runner_test").string();
  std::filesystem::remove_all(cfg.out_dir);
  const auto files = write_experiment(run_experiment(cfg), cfg);
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  const auto summary = read_table(cfg.out_dir + "/records_summary.csv");
  EXPECT_GT(summary_value(summary, "record_exponent_slope"), 0.0);
  EXPECT_TRUE(std::filesystem::exists(cfg.out_dir + "/records_manifest.json"));
  std::filesystem::remove_all(cfg.out_dir);
}
