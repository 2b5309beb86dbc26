#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "interlace/brw.hpp"
#include "interlace/coupling.hpp"
#include "interlace/errors.hpp"
#include "interlace/frog.hpp"
#include "interlace/parallel.hpp"
#include "interlace/percolation.hpp"
#include "interlace/potential.hpp"
#include "interlace/soup.hpp"
#include "interlace/walk.hpp"

namespace interlace::cli {

namespace {

using json = nlohmann::ordered_json;

// Flat JSON object mirroring the long flag names; underscores may stand for dashes.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json doc;
    try {
      doc = json::parse(input);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config must be a flat JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        // list flags take comma-separated text
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(key, v);
        item.inputs.push_back(joined);
      } else {
        item.inputs.push_back(scalar(key, value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const std::string& key, const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config key '" + key + "' must be a scalar or a list of scalars");
  }
};

struct Options {
  std::string command;
  std::string graph;
  std::optional<double> u;
  std::string u_grid;
  int window = 0;
  std::string center;
  std::optional<int> kill_radius;
  double reentry_eps = kDefaultReentryEps;
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out;
  std::string set;
  double tol = 0;
  int n_max = -1;
  std::string mode = "closed_form";
  std::string observable = "eta_proxy";
  std::string x, y;
  std::string distances;
  int hit_n_max = 100;
  std::string gen_csv, hit_csv, samples_csv;
  std::size_t node_budget = 1'000'000;
  std::string sampler = "poisson";
  std::size_t mc_walks = 20000;
  std::string probes;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::filesystem::path resolve(const std::string& path) {
  std::filesystem::path p(path);
  const char* dir = std::getenv("INTERLACE_OUT_DIR");
  if (p.is_relative() && dir != nullptr && *dir != '\0') p = std::filesystem::path(dir) / p;
  return p;
}

void write_file(const std::string& path, const std::string& text) {
  const auto p = resolve(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(v)) throw ArgumentError(std::string("bad number in ") + what + ": '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError(std::string(what) + " is empty");
  return out;
}

Graph need_graph(const Options& o) {
  if (o.graph.empty()) throw ArgumentError("--graph is required");
  return Graph::parse(o.graph);
}

double need_u(const Options& o) {
  if (!o.u) throw ArgumentError("--u is required");
  if (!(*o.u >= 0)) throw ArgumentError("--u must be nonnegative");
  return *o.u;
}

std::uint64_t need_seed(const Options& o) {
  if (!o.seed) throw ArgumentError("--seed is required for sampling commands");
  return *o.seed;
}

void need_transient(const Graph& g) {
  if (!g.transient()) throw DomainError("graph not transient: " + g.spec());
}

Vertex center_of(const Graph& g, const Options& o) {
  return o.center.empty() ? g.origin() : g.parse_vertex(o.center);
}

Ball window_of(const Graph& g, const Options& o) {
  if (o.window < 0) throw ArgumentError("--window must be nonnegative");
  return g.ball(center_of(g, o), o.window);
}

KillRadius kill_of(const Graph& g, const Ball& window, const Options& o) {
  if (o.kill_radius) {
    if (*o.kill_radius < window.radius) throw ArgumentError("--kill-radius must be at least --window");
    return KillRadius{*o.kill_radius, std::nan(""), false};
  }
  return default_kill_radius(g, window, o.reentry_eps);
}

json vertex_list(const Graph& g, const std::vector<Vertex>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(g.format(v));
  return a;
}

json kill_json(const KillRadius& k) {
  json j;
  j["radius"] = k.radius;
  if (std::isnan(k.reentry)) {
    j["reentry_bound"] = nullptr;
  } else {
    j["reentry_bound"] = k.reentry;
  }
  j["capped"] = k.capped;
  return j;
}

// Vertex at distance k from the origin along a fixed ray.
Vertex at_distance(const Graph& g, int k) {
  Vertex v = g.origin();
  for (int i = 0; i < k; ++i) g.step(v, 1);
  return v;
}

int cmd_potential(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  need_transient(g);
  if (o.set.empty()) throw ArgumentError("--set is required");
  const auto base = g.parse_vertex_list(o.set);
  const Equilibrium eq = equilibrium(g, base, o.tol);
  json j;
  j["graph"] = g.spec();
  j["base"] = vertex_list(g, eq.base);
  json w = json::object();
  for (std::size_t i = 0; i < eq.base.size(); ++i) w[g.format(eq.base[i])] = eq.weights[i];
  j["weights"] = w;
  j["cap"] = eq.cap;
  j["tol"] = eq.tol;
  j["radius"] = eq.radius;
  j["tail_gap"] = eq.tail_gap;
  emit(o, dump(j), out);
  return kOk;
}

int cmd_rho(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  json j;
  j["graph"] = g.spec();
  j["closed_form"] = spectral_radius_closed_form(g);
  if (o.mode == "closed_form" || o.mode == "closed") {
    j["mode"] = "closed_form";
    j["value"] = spectral_radius_closed_form(g);
  } else if (o.mode == "power_estimate" || o.mode == "power") {
    const int n_max = o.n_max < 0 ? 200 : o.n_max;
    const SpectralEstimate est = spectral_radius(g, n_max, SpectralMode::PowerEstimate);
    j["mode"] = "power_estimate";
    j["n_max"] = n_max;
    j["value"] = est.value;
    j["raw_root"] = est.raw_root;
    j["max_mass_defect"] = est.max_mass_defect;
  } else {
    throw ArgumentError("--mode must be closed_form or power_estimate");
  }
  emit(o, dump(j), out);
  return kOk;
}

int cmd_soup(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  need_transient(g);
  const double u = need_u(o);
  const std::uint64_t seed = need_seed(o);
  const Ball window = window_of(g, o);
  const KillRadius kill = kill_of(g, window, o);
  const std::vector<Vertex> base = o.set.empty() ? window.members : g.parse_vertex_list(o.set);
  std::vector<std::uint32_t> base_index;
  for (const auto& v : base) {
    auto i = window.index_of(v);
    if (!i) throw ArgumentError("--set vertex " + g.format(v) + " is outside the window");
    base_index.push_back(*i);
  }

  struct Acc {
    Frequency empty;
    Frequency center_vacant;
    MeanStat trace_size;
    std::string rows;
    void merge(const Acc& other) {
      empty.merge(other.empty);
      center_vacant.merge(other.center_vacant);
      trace_size.merge(other.trace_size);
      rows += other.rows;
    }
  };
  const bool want_rows = !o.samples_csv.empty();
  std::vector<std::string> names;
  for (const auto& v : window.members) names.push_back(g.format(v));
  auto record = [&](std::size_t i, const SoupSample& s, Acc& acc) {
    bool hit = false;
    for (auto b : base_index) hit = hit || s.contains(b);
    acc.empty.add(!hit);
    acc.center_vacant.add(!s.contains(0));
    acc.trace_size.add(static_cast<double>(s.trace_size()));
    if (want_rows) {
      for (std::size_t k = 0; k < names.size(); ++k) {
        acc.rows += std::to_string(i) + ",\"" + names[k] + "\"," + (s.contains(k) ? "1" : "0") + "\n";
      }
    }
  };

  json j;
  j["graph"] = g.spec();
  j["u"] = u;
  j["center"] = g.format(window.center);
  j["window"] = window.radius;
  j["kill"] = kill_json(kill);
  j["n"] = o.n;
  j["seed"] = seed;
  j["sampler"] = o.sampler;
  Acc acc;
  if (o.sampler == "poisson") {
    const SoupSampler sampler(g, window, equilibrium(g, base), kill.radius);
    acc = run_samples<Acc>(o.n, seed, o.workers,
                           [&](std::size_t i, Rng& rng, Acc& a) { record(i, sampler.sample(u, rng), a); });
    j["base"] = vertex_list(g, sampler.equilibrium().base);
    j["cap"] = sampler.equilibrium().cap;
    j["exact_window_trace"] = sampler.exact();
    j["emptiness_expected"] = std::exp(-u * sampler.equilibrium().cap);
  } else if (o.sampler == "decomposition") {
    const ProductDecompositionSampler sampler(g, window, kill.radius, o.mc_walks, seed ^ 0x5bd1e995u);
    acc = run_samples<Acc>(o.n, seed, o.workers,
                           [&](std::size_t i, Rng& rng, Acc& a) { record(i, sampler.sample(u, rng), a); });
    json nu = json::array();
    for (int d = 0; d <= sampler.max_depth(); ++d) nu.push_back({{"depth", d}, {"nu", sampler.nu(d)}, {"ci", sampler.nu_ci(d)}});
    j["base"] = vertex_list(g, base);
    j["nu"] = nu;
  } else {
    throw ArgumentError("--sampler must be poisson or decomposition");
  }
  j["emptiness"] = {{"estimate", acc.empty.estimate()}, {"ci", acc.empty.ci_radius()}};
  j["center_vacant"] = {{"estimate", acc.center_vacant.estimate()}, {"ci", acc.center_vacant.ci_radius()}};
  j["mean_trace_size"] = {{"estimate", acc.trace_size.mean}, {"ci", acc.trace_size.ci_radius()}};
  if (want_rows) write_file(o.samples_csv, "sample_id,vertex,in_trace\n" + acc.rows);
  emit(o, dump(j), out);
  return kOk;
}

int cmd_frog(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  need_transient(g);
  const double u = need_u(o);
  const std::uint64_t seed = need_seed(o);
  const Ball window = window_of(g, o);
  const KillRadius kill = kill_of(g, window, o);
  FrogConfig cfg;
  cfg.u = u;
  cfg.origin = window.center;
  cfg.window = window;
  cfg.kill_radius = kill.radius;

  struct Acc {
    json runs = json::array();
    MeanStat trace;
    std::uint64_t stabilized = 0, bad_history = 0;
    void merge(const Acc& other) {
      for (const auto& r : other.runs) runs.push_back(r);
      trace.merge(other.trace);
      stabilized += other.stabilized;
      bad_history += other.bad_history;
    }
  };
  const Acc acc = run_samples<Acc>(o.n, seed, o.workers, [&](std::size_t i, Rng& rng, Acc& a) {
    const FrogRun run = run_frog(g, cfg, rng);
    json sizes = json::array();
    for (const auto& h : run.activation_history) sizes.push_back(h.size());
    a.runs.push_back({{"run", i},
                      {"iterations", run.activation_history.size() - 1},
                      {"activation_sizes", sizes},
                      {"trace_size", run.trace.size()},
                      {"walkers", run.walkers},
                      {"stabilized", run.stabilized}});
    a.trace.add(static_cast<double>(run.trace.size()));
    a.stabilized += run.stabilized ? 1 : 0;
    a.bad_history += check_history(g, run, window) ? 0 : 1;
  });
  json j;
  j["graph"] = g.spec();
  j["u"] = u;
  j["window"] = window.radius;
  j["kill"] = kill_json(kill);
  j["seed"] = seed;
  j["n"] = o.n;
  j["mean_trace_size"] = {{"estimate", acc.trace.mean}, {"ci", acc.trace.ci_radius()}};
  j["stabilized"] = acc.stabilized;
  j["history_violations"] = acc.bad_history;
  j["runs"] = acc.runs;
  emit(o, dump(j), out);
  return acc.bad_history == 0 ? kOk : kViolation;
}

int cmd_brw(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  const double u = need_u(o);
  const std::uint64_t seed = need_seed(o);
  const int n_max = o.n_max < 0 ? 6 : o.n_max;
  const Vertex x = center_of(g, o);

  struct Acc {
    std::vector<MeanStat> sizes;
    std::uint64_t bad = 0, truncated = 0;
    void merge(const Acc& other) {
      for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i].merge(other.sizes[i]);
      bad += other.bad;
      truncated += other.truncated;
    }
  };
  Acc prototype;
  prototype.sizes.resize(static_cast<std::size_t>(n_max) + 1);
  const Acc acc = run_samples<Acc>(
      o.n, seed, o.workers,
      [&](std::size_t, Rng& rng, Acc& a) {
        const BrwRun run = sample_brw(g, x, u, n_max, o.node_budget, rng);
        a.bad += check_structure(g, run) ? 0 : 1;
        a.truncated += run.truncated ? 1 : 0;
        for (int k = 0; k <= n_max; ++k) a.sizes[static_cast<std::size_t>(k)].add(static_cast<double>(run.generation_size(k)));
      },
      prototype);
  const GenerationSizes exact = expected_generation_sizes(u, g.degree(), n_max);

  json j;
  j["graph"] = g.spec();
  j["u"] = u;
  j["branching_mean"] = branching_mean(u, g.degree());
  j["n_max"] = n_max;
  j["n"] = o.n;
  j["seed"] = seed;
  j["structure_violations"] = acc.bad;
  j["truncated_runs"] = acc.truncated;
  j["envelope_constant"] = exact.envelope_constant;
  std::string gen = "n,empirical_mean,exact_mean,ci\n";
  json gens = json::array();
  for (int k = 0; k <= n_max; ++k) {
    const auto& s = acc.sizes[static_cast<std::size_t>(k)];
    const auto kk = static_cast<std::size_t>(k);
    gen += std::to_string(k) + "," + num(s.mean) + "," + num(exact.exact[kk]) + "," + num(s.ci_radius()) + "\n";
    gens.push_back({{"n", k}, {"empirical_mean", s.mean}, {"exact_mean", exact.exact[kk]}, {"ci", s.ci_radius()},
                    {"envelope", exact.envelope[kk]}});
  }
  j["generations"] = gens;
  if (!o.gen_csv.empty()) write_file(o.gen_csv, gen);

  if (!o.distances.empty()) {
    std::string hit = "distance,estimate,ci,tail_envelope\n";
    json hits = json::array();
    for (double d : parse_list(o.distances, "--distances")) {
      if (d < 0 || d != std::floor(d)) throw ArgumentError("--distances must be nonnegative integers");
      const int k = static_cast<int>(d);
      const HitEstimate h = hit_probability(g, x, at_distance(g, k), u, o.hit_n_max, o.n, seed + static_cast<std::uint64_t>(k) + 1, o.workers);
      hit += std::to_string(k) + "," + num(h.estimate) + "," + num(h.ci) + "," + num(h.tail_envelope) + "\n";
      hits.push_back({{"distance", k}, {"estimate", h.estimate}, {"ci", h.ci}, {"tail_envelope", h.tail_envelope},
                      {"subcritical", h.subcritical}});
    }
    j["hit_n_max"] = o.hit_n_max;
    j["hits"] = hits;
    if (!o.hit_csv.empty()) write_file(o.hit_csv, hit);
  }
  emit(o, dump(j), out);
  return acc.bad == 0 ? kOk : kViolation;
}

json size_json(const SizeSummary& s) {
  return {{"mean", s.mean.mean}, {"ci", s.mean.ci_radius()}, {"histogram", s.histogram}};
}

int cmd_couple(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  need_transient(g);
  const double u = need_u(o);
  const std::uint64_t seed = need_seed(o);
  const Ball window = window_of(g, o);
  const KillRadius kill = kill_of(g, window, o);
  const int n_max = o.n_max < 0 ? 60 : o.n_max;
  std::vector<Vertex> probes;
  if (!o.probes.empty()) probes = g.parse_vertex_list(o.probes);
  const ChainReport r = chain_report(g, u, window.center, window, kill.radius, n_max, o.n, seed, o.workers, probes);

  json j;
  j["graph"] = g.spec();
  j["u"] = u;
  j["window"] = window.radius;
  j["kill"] = kill_json(kill);
  j["n_max"] = n_max;
  j["seed"] = seed;
  j["runs"] = r.runs;
  j["violations"] = r.violations;
  j["order_violations"] = r.order_violations;
  j["brw_truncated_runs"] = r.brw_truncated;
  j["sizes"] = {{"cluster", size_json(r.cluster)}, {"frog", size_json(r.frog)}, {"brw", size_json(r.brw)}};
  json p = json::array();
  for (std::size_t i = 0; i < r.probes.size(); ++i) {
    p.push_back({{"vertex", g.format(r.probes[i])},
                 {"cluster", r.cluster_hits[i].estimate()},
                 {"cluster_ci", r.cluster_hits[i].ci_radius()},
                 {"frog", r.frog_hits[i].estimate()},
                 {"frog_ci", r.frog_hits[i].ci_radius()}});
  }
  j["probes"] = p;
  emit(o, dump(j), out);
  return r.violations == 0 && r.order_violations == 0 ? kOk : kViolation;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  need_transient(g);
  const std::uint64_t seed = need_seed(o);
  if (o.u_grid.empty()) throw ArgumentError("--u-grid is required");
  const auto grid = parse_list(o.u_grid, "--u-grid");
  const Ball window = window_of(g, o);
  const KillRadius kill = kill_of(g, window, o);
  SweepOptions options;
  options.observable = parse_observable(o.observable);
  options.kill_radius = kill.radius;
  if (!o.x.empty()) options.x = g.parse_vertex(o.x);
  if (!o.y.empty()) options.y = g.parse_vertex(o.y);
  const SweepReport r = sweep(g, grid, window, o.n, seed, o.workers, options);

  std::string csv = "u,n,estimate,ci\n";
  for (const auto& row : r.rows) csv += num(row.u) + "," + std::to_string(row.n) + "," + num(row.estimate) + "," + num(row.ci) + "\n";
  emit(o, csv, out);
  if (!o.out.empty()) {
    json meta;
    meta["graph"] = r.graph;
    meta["observable"] = r.observable_name;
    meta["center"] = g.format(r.center);
    meta["window"] = r.window_radius;
    meta["kill"] = kill_json(kill);
    meta["seed"] = r.seed;
    meta["n"] = o.n;
    meta["grid"] = r.grid;
    meta["monotonicity_violations"] = r.monotonicity_violations;
    meta["note"] = "finite-window proxy";
    write_file(o.out + ".meta.json", dump(meta));
  }
  return r.monotonicity_violations == 0 ? kOk : kViolation;
}

int cmd_bounds(const Options& o, std::ostream& out) {
  const Graph g = need_graph(o);
  need_transient(g);
  const BoundsReport r = bounds_report(g);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["graph"] = r.graph;
  j["max_degree"] = r.max_degree;
  j["rho"] = r.rho;
  j["escape_origin"] = r.escape_origin;
  j["kappa_v"] = opt(r.kappa_v);
  j["kappa_e"] = opt(r.kappa_e);
  j["u_c_lower"] = r.u_c_lower;
  j["u_star_lower"] = opt(r.u_star_lower);
  j["u_star_upper"] = opt(r.u_star_upper);
  j["amenable"] = r.amenable;
  j["notes"] = r.notes;
  emit(o, dump(j), out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random interlacements, frog model and branching random walk simulator"};
  app.require_subcommand(1, 1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "Flat JSON file with flag values (flags override it)");

  Options o;
  app.add_option("--graph", o.graph, "z:<d>, tree:<d> or treez:<d>x<d'>");
  app.add_option("--u", o.u, "Intensity level");
  app.add_option("--u-grid", o.u_grid, "Comma-separated ascending levels (sweep)");
  app.add_option("--window", o.window, "Window radius")->capture_default_str();
  app.add_option("--center", o.center, "Window center (default: origin)");
  app.add_option("--kill-radius", o.kill_radius, "Walk truncation radius (default: from --reentry-eps)");
  app.add_option("--reentry-eps", o.reentry_eps, "Target re-entry probability for the default kill radius")->capture_default_str();
  app.add_option("--n", o.n, "Number of samples / runs")->capture_default_str();
  app.add_option("--seed", o.seed, "Master seed (required for sampling commands)");
  app.add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "Output file (default: stdout); relative paths use $INTERLACE_OUT_DIR");
  app.add_option("--set", o.set, "Vertex list separated by ';'");
  app.add_option("--tol", o.tol, "Solver tolerance (0: family default)");
  app.add_option("--n-max", o.n_max, "Power-iteration steps (rho) or generation cutoff (brw, couple)");
  app.add_option("--mode", o.mode, "closed_form | power_estimate (rho)")->capture_default_str();
  app.add_option("--observable", o.observable, "eta_proxy | two_point | trace_cluster_count (sweep)")->capture_default_str();
  app.add_option("--x", o.x, "First two-point vertex (sweep)");
  app.add_option("--y", o.y, "Second two-point vertex (sweep)");
  app.add_option("--distances", o.distances, "Comma-separated hit distances (brw)");
  app.add_option("--hit-n-max", o.hit_n_max, "Generation cutoff for hit probabilities (brw)")->capture_default_str();
  app.add_option("--gen-csv", o.gen_csv, "Generation-size CSV path (brw)");
  app.add_option("--hit-csv", o.hit_csv, "Hit-probability CSV path (brw)");
  app.add_option("--samples-csv", o.samples_csv, "Per-sample trace CSV path (soup)");
  app.add_option("--node-budget", o.node_budget, "Node cap per tree (brw)")->capture_default_str();
  app.add_option("--sampler", o.sampler, "poisson | decomposition (soup)")->capture_default_str();
  app.add_option("--mc-walks", o.mc_walks, "Walks per depth for the decomposition intensities")->capture_default_str();
  app.add_option("--probes", o.probes, "Probe vertices for marginal checks (couple)");

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const Options&, std::ostream&);
  };
  const Entry entries[] = {
      {"potential", "Equilibrium measure and capacity of --set", cmd_potential},
      {"rho", "Spectral radius", cmd_rho},
      {"soup", "Interlacement soup samples in a window", cmd_soup},
      {"frog", "Frog model runs", cmd_frog},
      {"brw", "Branching random walk generation sizes and hit probabilities", cmd_brw},
      {"couple", "Coupled interlacement / frog / branching walk runs", cmd_couple},
      {"sweep", "Percolation observable over a u grid", cmd_sweep},
      {"bounds", "Threshold bounds", cmd_bounds},
  };
  for (const auto& e : entries) app.add_subcommand(e.name, e.help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    for (const auto& e : entries) {
      if (app.got_subcommand(e.name)) return e.fn(o, out);
    }
  } catch (const EncodingError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace interlace::cli
