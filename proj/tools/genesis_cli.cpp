// Command-line front end: phase-type fitting, stability analysis, trajectory
// simulation, parameter sweeps and heatmap rendering over one shared model
// vocabulary (law specs, graph specs).
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical/cap failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "genesis/config.hpp"
#include "genesis/errors.hpp"
#include "genesis/heatmap.hpp"
#include "genesis/model.hpp"
#include "genesis/network.hpp"
#include "genesis/ph_fit.hpp"
#include "genesis/phase_type.hpp"
#include "genesis/rng.hpp"
#include "genesis/simulate.hpp"
#include "genesis/stability.hpp"
#include "genesis/sweep.hpp"

namespace {

using namespace genesis;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string piece;
  for (char c : s) {
    if (c == sep) {
      out.push_back(piece);
      piece.clear();
    } else {
      piece += c;
    }
  }
  out.push_back(piece);
  return out;
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + s + "' in " + what);
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer '" + s + "' in " + what);
  }
}

std::vector<double> parse_num_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& piece : split(s, ','))
    out.push_back(parse_num(piece, what));
  return out;
}

// Graph spec: --graph FILE (edge list) or --gen KIND:ARGS with KIND one of
// path:N, cycle:N, complete:N, er:N,P, rgg:N,R. er/rgg need --graph-seed.
Network resolve_graph(const std::string& file, const std::string& gen,
                      bool have_seed, uint64_t seed) {
  if (file.empty() == gen.empty())
    throw std::invalid_argument("give exactly one of --graph and --gen");
  if (!file.empty()) return network_load(read_file(file));
  const std::vector<std::string> parts = split(gen, ':');
  const std::string& kind = parts[0];
  if (parts.size() != 2)
    throw std::invalid_argument("generator spec '" + gen + "' wants KIND:ARGS");
  if (kind == "path") return network_path(parse_int(parts[1], gen));
  if (kind == "cycle") return network_cycle(parse_int(parts[1], gen));
  if (kind == "complete") return network_complete(parse_int(parts[1], gen));
  if (kind == "er" || kind == "rgg") {
    const std::vector<std::string> args = split(parts[1], ',');
    if (args.size() != 2)
      throw std::invalid_argument("generator spec '" + gen + "' wants two arguments");
    if (!have_seed)
      throw std::invalid_argument("--graph-seed is required for " + kind + " graphs");
    const int n = parse_int(args[0], gen);
    const double x = parse_num(args[1], gen);
    return kind == "er" ? network_erdos_renyi(n, x, seed)
                        : network_random_geometric(n, x, seed);
  }
  throw std::invalid_argument("unknown graph generator '" + kind + "'");
}

// Law spec grammar:
//   exp:RATE
//   erlang:K,RATE
//   hyperexp:W1,W2,...:R1,R2,...
//   hypererlang:W1,...:K1,...:R1,...
//   lognormal:MEAN,VAR   (fitted at --fit-order; needs --seed)
//   ph:FILE              (serialized phase-type)
PhaseType resolve_law(const std::string& spec, const std::string& which,
                      int fit_order, bool have_seed, uint64_t seed,
                      uint64_t stream, const FitOptions& fit_opts) {
  const std::vector<std::string> groups = split(spec, ':');
  const std::string& name = groups[0];
  const std::string where = which + " law '" + spec + "'";
  if (name == "exp") {
    if (groups.size() != 2) throw std::invalid_argument(where + ": want exp:RATE");
    return ph_exponential(parse_num(groups[1], where));
  }
  if (name == "erlang") {
    if (groups.size() != 2) throw std::invalid_argument(where + ": want erlang:K,RATE");
    const std::vector<std::string> args = split(groups[1], ',');
    if (args.size() != 2) throw std::invalid_argument(where + ": want erlang:K,RATE");
    return ph_erlang(parse_int(args[0], where), parse_num(args[1], where));
  }
  if (name == "hyperexp") {
    if (groups.size() != 3)
      throw std::invalid_argument(where + ": want hyperexp:WEIGHTS:RATES");
    return ph_hyperexponential(parse_num_list(groups[1], where),
                               parse_num_list(groups[2], where));
  }
  if (name == "hypererlang") {
    if (groups.size() != 4)
      throw std::invalid_argument(where + ": want hypererlang:WEIGHTS:SHAPES:RATES");
    std::vector<int> shapes;
    for (const std::string& piece : split(groups[2], ','))
      shapes.push_back(parse_int(piece, where));
    return ph_hyper_erlang(parse_num_list(groups[1], where), shapes,
                           parse_num_list(groups[3], where));
  }
  if (name == "lognormal") {
    if (groups.size() != 2)
      throw std::invalid_argument(where + ": want lognormal:MEAN,VAR");
    const std::vector<std::string> args = split(groups[1], ',');
    if (args.size() != 2)
      throw std::invalid_argument(where + ": want lognormal:MEAN,VAR");
    if (!have_seed)
      throw std::invalid_argument(where + ": fitting needs an explicit --seed");
    const double mean = parse_num(args[0], where);
    const double var = parse_num(args[1], where);
    const FitResult fit = ph_fit(lognormal_target(mean, var), fit_order,
                                 fit_opts, derive_seed(seed, stream));
    std::fprintf(stderr, "%s: fitted order %d structure %s, L1 %.3g\n",
                 where.c_str(), fit_order, fit.diagnostics.structure.c_str(),
                 fit.diagnostics.l1_error);
    return fit.fitted;
  }
  if (name == "ph") {
    if (groups.size() < 2) throw std::invalid_argument(where + ": want ph:FILE");
    // File paths may contain ':'.
    std::string path = groups[1];
    for (size_t i = 2; i < groups.size(); ++i) path += ":" + groups[i];
    return phase_type_from_json(read_file(path));
  }
  throw std::invalid_argument("unknown law '" + name + "' in " + which);
}

struct GraphArgs {
  std::string file, gen;
  uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--graph", file, "edge-list file");
    cmd->add_option("--gen", gen,
                    "generated graph: path:N | cycle:N | complete:N | er:N,P | rgg:N,R");
    seed_opt = cmd->add_option("--graph-seed", seed, "seed for er/rgg generators");
  }
  Network resolve() const {
    return resolve_graph(file, gen, seed_opt->count() > 0, seed);
  }
};

struct ModelArgs {
  GraphArgs graph;
  std::string trans, rec, initial = "0";
  int fit_order = 10;
  uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  FitOptions fit_opts;

  void attach(CLI::App* cmd, bool seed_required) {
    graph.attach(cmd);
    cmd->add_option("--trans", trans,
                    "transmission law: exp:R | erlang:K,R | hyperexp:W:R | "
                    "hypererlang:W:K:R | lognormal:M,V | ph:FILE")
        ->required();
    cmd->add_option("--rec", rec, "recovery law, same grammar")->required();
    cmd->add_option("--fit-order", fit_order, "phase count for fitted laws")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--initial", initial, "comma-separated initially infected nodes");
    seed_opt = cmd->add_option("--seed", seed, "master seed");
    if (seed_required) seed_opt->required();
    cmd->add_option("--em-samples", fit_opts.em_sample_count,
                    "sample count for fitted laws")
        ->check(CLI::PositiveNumber);
  }
  GenesisModel resolve() const {
    const bool have_seed = seed_opt->count() > 0;
    Network net = graph.resolve();
    PhaseType t = resolve_law(trans, "transmission", fit_order, have_seed, seed, 1, fit_opts);
    PhaseType r = resolve_law(rec, "recovery", fit_order, have_seed, seed, 2, fit_opts);
    std::vector<int> seeds;
    for (const std::string& piece : split(initial, ','))
      seeds.push_back(parse_int(piece, "--initial"));
    return make_model(std::move(net), std::move(t), std::move(r), std::move(seeds));
  }
};

int run_cli(int argc, char** argv) {
  CLI::App app{"GeNeSIS spreading-model toolkit: stability bounds, exact rates, "
               "simulation, phase-type fits, parameter sweeps"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // fit-ph
  struct {
    std::string target, out;
    int order = 10;
    uint64_t seed = 0;
    FitOptions fit_opts;
  } fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit-ph", "Fit a hyper-Erlang law to a target distribution");
  fit->add_option("--target", fit_args.target,
                  "lognormal:MEAN,VAR | exp:RATE | erlang:K,RATE | samples:FILE")
      ->required();
  fit->add_option("--order", fit_args.order, "total phase count")
      ->check(CLI::PositiveNumber);
  fit->add_option("--seed", fit_args.seed, "master seed")->required();
  fit->add_option("--out", fit_args.out, "output file (stdout when absent)");
  fit->add_option("--em-samples", fit_args.fit_opts.em_sample_count,
                  "EM sample count")
      ->check(CLI::PositiveNumber);
  fit->add_option("--max-em-iters", fit_args.fit_opts.max_em_iters,
                  "EM iteration cap")
      ->check(CLI::PositiveNumber);
  fit->add_option("--candidates", fit_args.fit_opts.candidate_count,
                  "structures refined by EM")
      ->check(CLI::PositiveNumber);
  fit->callback([&] {
    const std::vector<std::string> groups = split(fit_args.target, ':');
    FitTarget target;
    const std::string where = "--target '" + fit_args.target + "'";
    if (groups[0] == "lognormal" && groups.size() == 2) {
      const std::vector<std::string> args = split(groups[1], ',');
      if (args.size() != 2)
        throw std::invalid_argument(where + ": want lognormal:MEAN,VAR");
      target = lognormal_target(parse_num(args[0], where), parse_num(args[1], where));
    } else if (groups[0] == "exp" && groups.size() == 2) {
      target = exponential_target(parse_num(groups[1], where));
    } else if (groups[0] == "erlang" && groups.size() == 2) {
      const std::vector<std::string> args = split(groups[1], ',');
      if (args.size() != 2)
        throw std::invalid_argument(where + ": want erlang:K,RATE");
      target = erlang_target(parse_int(args[0], where), parse_num(args[1], where));
    } else if (groups[0] == "samples" && groups.size() >= 2) {
      std::string path = groups[1];
      for (size_t i = 2; i < groups.size(); ++i) path += ":" + groups[i];
      std::vector<double> samples;
      std::istringstream in(read_file(path));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        samples.push_back(parse_num(line, path));
      }
      target = sample_target(std::move(samples));
    } else {
      throw std::invalid_argument(where + ": unknown target kind");
    }
    const FitResult result =
        ph_fit(target, fit_args.order, fit_args.fit_opts, fit_args.seed);
    std::fprintf(stderr,
                 "structure %s  L1 %.6g  log-likelihood %.6g  iterations %d%s\n",
                 result.diagnostics.structure.c_str(), result.diagnostics.l1_error,
                 result.diagnostics.log_likelihood, result.diagnostics.em_iterations,
                 result.diagnostics.em_converged ? "" : "  (not converged)");
    emit(fit_args.out, to_json(result.fitted) + "\n");
  });

  // bound
  ModelArgs bound_args;
  CLI::App* bound = app.add_subcommand(
      "bound", "Certified exponential decay rate from the stability bound matrix");
  bound_args.attach(bound, false);
  bound->callback([&] {
    const GenesisModel model = bound_args.resolve();
    std::printf("%.17g\n", decay_rate_bound(model));
  });

  // exact
  ModelArgs exact_args;
  CLI::App* exact = app.add_subcommand(
      "exact", "Exact decay rate from the full chain (small models)");
  exact_args.attach(exact, false);
  exact->callback([&] {
    const GenesisModel model = exact_args.resolve();
    const StateSpace space(model.network, static_cast<int>(model.trans_order()),
                           static_cast<int>(model.rec_order()));
    std::printf("%.17g\nstates: %lld\n", exact_decay_rate(model),
                space.state_count());
  });

  // simulate
  ModelArgs sim_args;
  struct {
    double horizon = 0.0;
    int replicas = 0;
    int grid_points = 50;
    std::string out;
  } sim_extra;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Event-driven trajectories reduced to a prevalence series");
  sim_args.attach(simulate, true);
  simulate->add_option("--horizon", sim_extra.horizon, "simulated time span")
      ->required()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--replicas", sim_extra.replicas, "independent runs")
      ->required()
      ->check(CLI::Range(2, 1 << 30));
  simulate->add_option("--grid-points", sim_extra.grid_points,
                       "prevalence sampling points")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_extra.out, "output CSV (stdout when absent)");
  simulate->callback([&] {
    const GenesisModel model = sim_args.resolve();
    std::vector<double> grid;
    for (int k = 0; k <= sim_extra.grid_points; ++k)
      grid.push_back(sim_extra.horizon * k / sim_extra.grid_points);
    const PrevalenceSeries series = estimate_prevalence(
        model, sim_extra.horizon, sim_extra.replicas, grid, sim_args.seed);
    emit(sim_extra.out, series.to_csv());
  });

  // sweep
  struct {
    std::string config, out;
    GraphArgs graph;
    uint64_t seed = 0;
    int fit_order = 0, workers = -1;
    std::string mu_trans, mu_rec;
    bool no_timestamp = false;
    CLI::Option *seed_opt = nullptr, *fit_order_opt = nullptr, *workers_opt = nullptr;
  } sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Decay-rate bound over a grid of means and law menus");
  sweep->add_option("--config", sweep_args.config, "JSON sweep configuration")
      ->required();
  sweep_args.graph.attach(sweep);
  sweep_args.seed_opt = sweep->add_option("--seed", sweep_args.seed,
                                          "master seed (overrides config)");
  sweep_args.fit_order_opt =
      sweep->add_option("--fit-order", sweep_args.fit_order, "overrides config")
          ->check(CLI::PositiveNumber);
  sweep_args.workers_opt =
      sweep->add_option("--workers", sweep_args.workers,
                        "worker threads, 0 = available parallelism");
  sweep->add_option("--mu-trans", sweep_args.mu_trans,
                    "comma-separated transmission means (overrides config)");
  sweep->add_option("--mu-rec", sweep_args.mu_rec,
                    "comma-separated recovery means (overrides config)");
  sweep->add_flag("--no-timestamp", sweep_args.no_timestamp,
                  "suppress the timestamp header line");
  sweep->add_option("--out", sweep_args.out, "output CSV (stdout when absent)");
  sweep->callback([&] {
    const std::string text = read_file(sweep_args.config);
    SweepConfig config = sweep_config_from_json(text);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(0, e.what());
    }
    if (sweep_args.seed_opt->count())
      config.seed = sweep_args.seed;
    else if (!j.contains("seed"))
      throw std::invalid_argument("config has no seed; pass --seed");
    if (sweep_args.fit_order_opt->count()) config.fit_order = sweep_args.fit_order;
    if (sweep_args.workers_opt->count()) config.workers = sweep_args.workers;
    if (!sweep_args.mu_trans.empty())
      config.mu_trans_grid = parse_num_list(sweep_args.mu_trans, "--mu-trans");
    if (!sweep_args.mu_rec.empty())
      config.mu_rec_grid = parse_num_list(sweep_args.mu_rec, "--mu-rec");
    if (sweep_args.no_timestamp) config.timestamp = false;

    Network net = [&]() -> Network {
      if (!sweep_args.graph.file.empty() || !sweep_args.graph.gen.empty())
        return sweep_args.graph.resolve();
      if (!j.contains("graph"))
        throw std::invalid_argument("config has no graph; pass --graph or --gen");
      const nlohmann::json& g = j["graph"];
      if (g.contains("file")) return network_load(read_file(g["file"].get<std::string>()));
      if (g.contains("gen"))
        return resolve_graph("", g["gen"].get<std::string>(), g.contains("seed"),
                             g.value("seed", uint64_t{0}));
      throw std::invalid_argument("config graph wants a 'file' or 'gen' key");
    }();

    const SweepResult result = run_sweep(net, config);
    emit(sweep_args.out, result.to_csv(config.timestamp, net.canonical_edge_list()));
  });

  // render
  struct {
    std::string csv, panel_trans, panel_rec, out;
  } render_args;
  CLI::App* render = app.add_subcommand(
      "render", "Render one sweep panel as an SVG heatmap");
  render->add_option("--csv", render_args.csv, "sweep CSV")->required();
  render->add_option("--panel-trans", render_args.panel_trans,
                     "transmission panel label, e.g. exp or lognormal-v2")
      ->required();
  render->add_option("--panel-rec", render_args.panel_rec, "recovery panel label")
      ->required();
  render->add_option("--out", render_args.out, "output SVG")->required();
  render->callback([&] {
    const SweepResult result = sweep_from_csv(read_file(render_args.csv));
    write_file(render_args.out,
               render_heatmap(result, render_args.panel_trans, render_args.panel_rec));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const SizeCapError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const AuditError& e) {
    std::fprintf(stderr, "audit failure: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
