// Command-line front end: sampling, map building, embedding, walks,
// electrical queries, fields, Liouville Brownian motion and experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcrt/brownian_paths.hpp"
#include "mcrt/config.hpp"
#include "mcrt/electrical.hpp"
#include "mcrt/experiments.hpp"
#include "mcrt/field_lqg.hpp"
#include "mcrt/lbm.hpp"
#include "mcrt/mated_crt.hpp"
#include "mcrt/tutte.hpp"

namespace fs = std::filesystem;
using namespace mcrt;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string config;
  int threads = 1;
  std::string format = "csv";
};

std::string out_path(const Globals& g, const std::string& file) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / file).string();
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

void emit(const Globals& g, const std::string& stem, const Table& t) {
  const auto path = out_path(g, stem + (g.format == "json" ? ".json" : ".csv"));
  auto os = open_out(path);
  if (g.format == "json") os << t.to_json() << '\n';
  else t.write_csv(os);
  std::cout << path << '\n';
}

MatedCrtMap load_map(const std::string& path) {
  auto is = open_in(path);
  return read_map(is);
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mated-CRT maps, Tutte embeddings, GFF/LQG fields and Liouville Brownian motion"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->default_val(1);
  app.add_option("--out", g.out, "Output directory")->default_val("out");
  app.add_option("--config", g.config, "Flat key = value config file");
  app.add_option("--threads", g.threads, "Worker threads")->default_val(1);
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->default_val("csv");

  // sample-path
  PathParams pp;
  std::string topology = "plane", method = "local";
  auto* sp = app.add_subcommand("sample-path", "Sample a correlated Brownian path or disk excursion");
  sp->add_option("--gamma", pp.gamma)->default_val(1.0);
  sp->add_option("--n", pp.n_cells, "Number of cells")->default_val(64);
  sp->add_option("--substeps", pp.substeps)->default_val(16);
  sp->add_option("--topology", topology)->check(CLI::IsMember({"plane", "disk"}))->default_val("plane");
  sp->add_option("--method", method, "Disk sampler")->check(CLI::IsMember({"rejection", "local"}))->default_val("local");

  // build-map
  std::string path_file;
  auto* bm = app.add_subcommand("build-map", "Build the mated-CRT map of a path file (or a fresh sample)");
  bm->add_option("--path", path_file, "Path file written by sample-path");
  bm->add_option("--gamma", pp.gamma)->default_val(1.0);
  bm->add_option("--n", pp.n_cells)->default_val(64);
  bm->add_option("--substeps", pp.substeps)->default_val(16);
  bm->add_option("--topology", topology)->check(CLI::IsMember({"plane", "disk"}))->default_val("plane");

  // tutte
  std::string map_file;
  int root = -1;
  auto* tu = app.add_subcommand("tutte", "Tutte-embed a disk map");
  tu->add_option("--map", map_file)->required();
  tu->add_option("--root", root, "Root vertex (default: drawn from the seed)");

  // walk
  long steps = -1;
  double exit_radius = -1;
  bool to_boundary = false;
  auto* wk = app.add_subcommand("walk", "Random walk on an embedded disk map");
  wk->add_option("--map", map_file)->required();
  wk->add_option("--root", root);
  wk->add_option("--start", root, "Start vertex (default: root)");
  auto* stop_group = wk->add_option_group("stop");
  stop_group->add_option("--steps", steps);
  stop_group->add_option("--exit-radius", exit_radius);
  stop_group->add_flag("--boundary", to_boundary);
  stop_group->require_option(1);

  // resistance
  std::string edge_file, set_a, set_z;
  auto* rs = app.add_subcommand("resistance", "Effective resistance between vertex sets");
  rs->add_option("--edges", edge_file, "Edge list (or a map file with --map)");
  rs->add_option("--map", map_file);
  rs->add_option("--a", set_a, "Comma-separated vertices of A")->required();
  rs->add_option("--z", set_z, "Comma-separated vertices of Z")->required();

  // gff
  int M = 256;
  std::string bc = "zero";
  double cone = 0;
  auto* gf = app.add_subcommand("gff", "Sample a discrete GFF");
  gf->add_option("--M", M)->default_val(256);
  gf->add_option("--bc", bc)->check(CLI::IsMember({"zero", "torus"}))->default_val("zero");
  gf->add_option("--cone", cone, "Add gamma log(1/|z|) with this gamma")->default_val(0);

  // lqg
  std::string field_file;
  double gamma = 1.0, eps_c = 0;
  auto* lq = app.add_subcommand("lqg", "Build the LQG measure of a field and scan ball masses");
  lq->add_option("--field", field_file)->required();
  lq->add_option("--gamma", gamma)->default_val(1.0);
  lq->add_option("--eps-c", eps_c, "Circle-average radius (0: four cells)")->default_val(0);

  // lbm
  std::string measure_file;
  double horizon = 0.1;
  std::size_t samples = 0;
  auto* lb = app.add_subcommand("lbm", "Liouville Brownian motion path and m0 estimate");
  lb->add_option("--measure", measure_file, "Measure file (default: density 1)");
  lb->add_option("--M", M)->default_val(256);
  lb->add_option("--steps", steps, "Base Brownian steps")->default_val(10000);
  lb->add_option("--m0-samples", samples, "Exit-time samples for m0 (0: skip)")->default_val(0);
  lb->add_option("--t", horizon, "Quantum time for the invariance test (with --invariance)")->default_val(0.1);
  bool invariance = false;
  lb->add_flag("--invariance", invariance);

  // experiment
  ExperimentConfig cfg;
  std::string experiment;
  auto* ex = app.add_subcommand("experiment", "Run a named experiment");
  ex->add_option("name", experiment)->required()->check(CLI::IsMember(experiment_names()));
  std::vector<std::string> overrides;
  ex->add_option("--set", overrides, "key=value config override (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    Rng rng(g.seed);
    if (*sp) {
      pp.seed = g.seed;
      pp.topology = topology_from_string(topology);
      const auto path = pp.topology == Topology::Plane
                            ? sample_plane(pp)
                            : sample_disk_excursion(pp, method == "rejection" ? DiskMethod::Rejection
                                                                               : DiskMethod::LocalResample);
      auto bin = open_out(out_path(g, "path.bin"), true);
      write_path_binary(bin, path);
      auto csv = open_out(out_path(g, "path.csv"));
      write_path_csv(csv, path);
      std::cout << out_path(g, "path.bin") << '\n' << out_path(g, "path.csv") << '\n';
    } else if (*bm) {
      CorrelatedPath path;
      if (!path_file.empty()) {
        auto is = open_in(path_file, true);
        path = read_path_binary(is);
      } else {
        pp.seed = g.seed;
        pp.topology = topology_from_string(topology);
        path = pp.topology == Topology::Plane ? sample_plane(pp)
                                              : sample_disk_excursion(pp, DiskMethod::LocalResample);
      }
      const auto map = map_from_path(path);
      auto os = open_out(out_path(g, "map.txt"));
      write_map(os, map);
      const auto faces = enumerate_faces(map);
      std::cout << out_path(g, "map.txt") << '\n'
                << "vertices " << map.n << " edges " << map.num_edges() << " faces " << faces.faces.size()
                << " perimeter " << faces.perimeter << '\n';
    } else if (*tu) {
      const auto map = load_map(map_file);
      if (root < 0) root = pick_root(map, rng);
      const auto emb = tutte_embed(map, root);
      auto csv = open_out(out_path(g, "embedding.csv"));
      write_embedding_csv(csv, emb);
      auto svg = open_out(out_path(g, "embedding.svg"));
      write_embedding_svg(svg, emb, map);
      std::cout << out_path(g, "embedding.csv") << '\n'
                << out_path(g, "embedding.svg") << '\n'
                << "root " << root << " residual " << harmonicity_residual(emb, map) << '\n';
    } else if (*wk) {
      const auto map = load_map(map_file);
      const auto net = Network::from_map(map);
      if (root < 0) root = pick_root(map, rng);
      const auto emb = tutte_embed(map, root);
      const StopRule rule = to_boundary       ? StopRule::hit_boundary()
                            : exit_radius > 0 ? StopRule::exit_ball(emb.positions[root], exit_radius)
                                              : StopRule::after(steps);
      Rng wr = rng.split(1);
      const auto tr = run_walk(net, emb, root, rule, wr);
      Table t({"step", "vertex", "x", "y"});
      for (std::size_t i = 0; i < tr.vertices.size(); ++i)
        t.add({double(i), double(tr.vertices[i]), tr.points[i].real(), tr.points[i].imag()});
      emit(g, "walk", t);
      std::cout << "steps " << tr.steps() << (tr.truncated ? " (truncated)" : "") << '\n';
    } else if (*rs) {
      Network net;
      if (!map_file.empty()) {
        net = Network::from_map(load_map(map_file));
      } else {
        auto is = open_in(edge_file);
        net = read_edge_list(is);
      }
      std::cout << std::setprecision(15) << effective_resistance(net, parse_ints(set_a), parse_ints(set_z)) << '\n';
    } else if (*gf) {
      auto field = sample_gff(M, field_bc_from_string(bc), g.seed);
      if (cone > 0) field = add_cone_singularity(field, cone);
      auto os = open_out(out_path(g, "field.bin"), true);
      write_field_binary(os, field);
      std::cout << out_path(g, "field.bin") << '\n';
    } else if (*lq) {
      auto is = open_in(field_file, true);
      const auto field = read_field_binary(is);
      const auto mu = build_lqg_measure(field, gamma, eps_c);
      auto os = open_out(out_path(g, "measure.bin"), true);
      write_measure_binary(os, mu);
      std::vector<std::complex<double>> centres;
      for (int j = 0; j < mu.M; j += 4)
        for (int i = 0; i < mu.M; i += 4) {
          const std::complex<double> z(-1 + (i + 0.5) * mu.a, -1 + (j + 0.5) * mu.a);
          if (std::abs(z) <= 0.5) centres.push_back(z);
        }
      const std::vector<double> deltas{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
      const auto scan = ball_mass_scan(mu, centres, deltas);
      Table t({"delta", "min_mass", "max_mass"});
      for (std::size_t i = 0; i < deltas.size(); ++i) t.add({deltas[i], scan.min_mass[i], scan.max_mass[i]});
      emit(g, "ball_mass", t);
      std::cout << out_path(g, "measure.bin") << '\n'
                << "total " << mu.total() << " min_exponent " << scan.min_exponent << " max_exponent "
                << scan.max_exponent << '\n';
    } else if (*lb) {
      Density density = Density::constant(M, 1.0);
      if (!measure_file.empty()) {
        auto is = open_in(measure_file, true);
        density = Density::from_measure(read_measure_binary(is));
      }
      Rng pr = rng.split(0);
      const double dt = density.default_dt();
      const auto path = make_lbm_path(brownian_path(0, dt, steps, pr), dt, density);
      auto os = open_out(out_path(g, "lbm.csv"));
      write_lbm_csv(os, path);
      std::cout << out_path(g, "lbm.csv") << '\n';
      if (samples > 0) {
        const auto est = estimate_m0(density, samples, rng.split(1));
        std::cout << "m0 " << est.median << " ci [" << est.ci_lo << ", " << est.ci_hi << "] truncated "
                  << est.truncated << '\n';
      }
      if (invariance) {
        const auto rec = invariance_test(density, horizon, 100000, rng.split(2));
        std::cout << "invariance tv " << rec.tv << " chi2 " << rec.chi_square << " dof " << rec.dof << " p "
                  << rec.p_value << " survivors " << rec.survivors << '\n';
      }
    } else if (*ex) {
      if (!g.config.empty()) cfg = load_config(g.config, cfg);
      cfg.experiment = experiment;
      if (app.get_option("--seed")->count() || g.config.empty()) cfg.seed = g.seed;
      if (app.get_option("--out")->count() || g.config.empty()) cfg.out_dir = g.out;
      if (app.get_option("--threads")->count()) cfg.threads = g.threads;
      if (app.get_option("--format")->count()) cfg.format = g.format;
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value");
        apply_config_entry(kv.substr(0, eq), kv.substr(eq + 1), cfg);
      }
      const auto result = run_experiment(cfg);
      for (const auto& p : write_experiment(result, cfg)) std::cout << p << '\n';
      result.summary.write_csv(std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
