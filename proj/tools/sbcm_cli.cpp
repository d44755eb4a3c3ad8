// Command-line front end for the sigmoidal bounded-confidence model.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

#include "sbcm/analytic.hpp"
#include "sbcm/dynamics.hpp"
#include "sbcm/graph.hpp"
#include "sbcm/io.hpp"
#include "sbcm/parallel.hpp"
#include "sbcm/reduced.hpp"
#include "sbcm/spectral.hpp"
#include "sbcm/steady.hpp"
#include "sbcm/sweep.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace {

constexpr const char* kVersion = "sbcm 1.0.0 (csv format 1)";

struct GraphArgs {
  std::string topology = "karate";
  std::string edges;
  std::string zealots;

  void add(CLI::App* app) {
    app->add_option("--topology", topology,
                    "path:N | cliques:K:aligned | cliques:K:unaligned | karate")
        ->capture_default_str();
    app->add_option("--edges", edges, "edge file (overrides --topology)");
    app->add_option("--zealots", zealots, "zealot file used with --edges");
  }

  sbcm::Graph load() const {
    if (!edges.empty()) return sbcm::load_graph(edges, zealots);
    return sbcm::resolve_topology(topology).graph;
  }
};

sbcm::OpinionState initial_state(const sbcm::Graph& g, const std::string& init,
                                 std::uint64_t seed) {
  if (init == "zero") return g.uniform_state(0.0);
  if (init == "harmonic") return sbcm::harmonic_state(g);
  if (init == "random") return sbcm::multistart_samples(g, 1, seed).front();
  if (init.rfind("file:", 0) == 0) {
    std::istringstream in(sbcm::read_file(init.substr(5)));
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) {
      for (auto& part : sbcm::split_csv_line(tok))
        if (!part.empty()) vals.push_back(sbcm::parse_double(part));
    }
    if (static_cast<int>(vals.size()) != g.node_count())
      throw sbcm::ValidationError("initial state file has " + std::to_string(vals.size()) +
                                  " values, graph has " + std::to_string(g.node_count()) +
                                  " nodes");
    return g.pinned(Eigen::Map<Eigen::VectorXd>(vals.data(), g.node_count()));
  }
  throw sbcm::ValidationError("unknown --init '" + init + "' (zero|harmonic|random|file:PATH)");
}

// Writes to `path`, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  sbcm::write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sigmoidal bounded-confidence opinion dynamics on graphs with zealots"};
  app.require_subcommand(0, 1);
  bool show_version = false, show_schema = false;
  app.add_flag("--version", show_version, "print version and CSV format version");
  app.add_flag("--schema", show_schema, "print the sweep config schema and CSV layouts");

  double gamma = 1.0, delta = 1.0;
  auto add_params = [&](CLI::App* sub) {
    sub->add_option("--gamma", gamma, "sigmoid steepness")->capture_default_str();
    sub->add_option("--delta", delta, "squared confidence bound")->capture_default_str();
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate a trajectory");
  GraphArgs sim_graph;
  sim_graph.add(sim);
  add_params(sim);
  double horizon = 100.0;
  std::string init = "zero", out_path, method = "dopri5";
  std::uint64_t seed = 1;
  sbcm::StepControl ctl;
  sim->add_option("--horizon", horizon)->capture_default_str();
  sim->add_option("--init", init, "zero | harmonic | random | file:PATH")->capture_default_str();
  sim->add_option("--seed", seed)->capture_default_str();
  sim->add_option("--method", method, "dopri5 | rk4")->capture_default_str();
  sim->add_option("--step", ctl.fixed_step, "rk4 step")->capture_default_str();
  sim->add_option("--rtol", ctl.rtol)->capture_default_str();
  sim->add_option("--atol", ctl.atol)->capture_default_str();
  sim->add_option("--stop-tol", ctl.stop_tol, "early stop on max |velocity|; <= 0 disables")
      ->capture_default_str();
  sim->add_option("--output-interval", ctl.output_interval)->capture_default_str();
  sim->add_option("-o,--out", out_path, "trajectory CSV (default stdout)");

  // steady
  auto* st = app.add_subcommand("steady", "solve for a steady state and classify it");
  GraphArgs st_graph;
  st_graph.add(st);
  add_params(st);
  double tol = 1e-10;
  st->add_option("--init", init)->capture_default_str();
  st->add_option("--seed", seed)->capture_default_str();
  st->add_option("--tol", tol)->capture_default_str();
  bool prefer_stable = false;
  st->add_flag("--prefer-stable", prefer_stable,
               "if Newton finds a non-stable state, integrate from the start instead");
  st->add_option("-o,--out", out_path, "steady-state CSV (default stdout)");
  std::string spectrum_path;
  st->add_option("--spectrum", spectrum_path, "write the spectral report JSON here");

  // continue
  auto* cont = app.add_subcommand("continue", "continue the harmonic branch in gamma");
  GraphArgs cont_graph;
  cont_graph.add(cont);
  double gamma_max = 5.0;
  sbcm::ContinuationOptions copts;
  cont->add_option("--delta", delta)->capture_default_str();
  cont->add_option("--gamma-max", gamma_max)->capture_default_str();
  cont->add_option("--step", copts.step)->capture_default_str();
  cont->add_option("--min-step", copts.min_step)->capture_default_str();
  cont->add_option("-o,--out", out_path, "branch JSON (default stdout)");

  // enumerate
  auto* en = app.add_subcommand("enumerate", "multistart steady-state enumeration");
  GraphArgs en_graph;
  en_graph.add(en);
  add_params(en);
  int starts = 50;
  int workers = sbcm::default_worker_count();
  en->add_option("--starts", starts)->capture_default_str();
  en->add_option("--seed", seed)->capture_default_str();
  en->add_option("--workers", workers, "default from SBCM_WORKERS")->capture_default_str();
  en->add_option("-o,--out", out_path, "steady-state CSV (default stdout)");

  // analytic
  auto* an = app.add_subcommand("analytic", "closed-form path and balanced-exposure criteria");
  add_params(an);
  int path_n = 0;
  an->add_option("--path-n", path_n, "also report the top M_P eigenvalue on path_graph(N)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run a (gamma, delta) grid experiment");
  std::string config;
  sbcm::SweepSpec spec;
  std::string experiment, topology, family, classification, output;
  std::optional<double> gmin, gmax, dmin, dmax;
  std::optional<int> gpts, dpts, sw_workers, scan_points, sw_starts;
  std::optional<std::uint64_t> sw_seed;
  bool glog = false, glin = false, dlog = false, dlin = false;
  sw->add_option("--config", config, "JSON config; flags override it");
  sw->add_option("--experiment", experiment,
                 "family_counts | line_counts | continuation | enumerate | portrait");
  sw->add_option("--topology", topology);
  sw->add_option("--gamma-min", gmin);
  sw->add_option("--gamma-max", gmax);
  sw->add_option("--gamma-points", gpts);
  sw->add_flag("--gamma-log", glog);
  sw->add_flag("--gamma-linear", glin);
  sw->add_option("--delta-min", dmin);
  sw->add_option("--delta-max", dmax);
  sw->add_option("--delta-points", dpts);
  sw->add_flag("--delta-log", dlog);
  sw->add_flag("--delta-linear", dlin);
  sw->add_option("--family", family, "polarized | consensus");
  sw->add_option("--classification", classification, "reduced | full");
  sw->add_option("--scan-points", scan_points);
  sw->add_option("--starts", sw_starts);
  sw->add_option("--seed", sw_seed);
  sw->add_option("--workers", sw_workers, "default from SBCM_WORKERS");
  sw->add_option("-o,--out", output, "output directory");
  bool quiet = false;
  sw->add_flag("-q,--quiet", quiet, "no progress log");

  // portrait
  auto* po = app.add_subcommand("portrait", "phase portrait of the paired-clique reduction");
  add_params(po);
  std::string po_topology = "cliques:10:aligned";
  sbcm::GridSpec grid;
  sbcm::PortraitOptions popts;
  popts.workers = sbcm::default_worker_count();
  bool no_basins = false;
  po->add_option("--topology", po_topology)->capture_default_str();
  po->add_option("--nx", grid.nx)->capture_default_str();
  po->add_option("--ny", grid.ny)->capture_default_str();
  po->add_option("--x-min", grid.x_min)->capture_default_str();
  po->add_option("--x-max", grid.x_max)->capture_default_str();
  po->add_option("--y-min", grid.y_min)->capture_default_str();
  po->add_option("--y-max", grid.y_max)->capture_default_str();
  po->add_option("--starts-per-axis", popts.starts_per_axis)->capture_default_str();
  po->add_option("--horizon", popts.horizon)->capture_default_str();
  po->add_option("--workers", popts.workers)->capture_default_str();
  po->add_flag("--no-basins", no_basins);
  std::string po_out = "portrait";
  po->add_option("-o,--out", po_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (show_version) {
      std::cout << kVersion << '\n';
      return 0;
    }
    if (show_schema) {
      std::cout << sbcm::sweep_schema_json() << '\n';
      return 0;
    }
    const sbcm::ModelParams params{gamma, delta};

    if (*sim) {
      params.validate();
      if (method == "rk4")
        ctl.method = sbcm::StepMethod::rk4;
      else if (method != "dopri5")
        throw sbcm::ValidationError("--method must be dopri5 or rk4");
      auto g = sim_graph.load();
      auto traj = sbcm::integrate(g, initial_state(g, init, seed), params, horizon, ctl);
      std::ostringstream os;
      sbcm::write_trajectory_csv(os, traj);
      emit(out_path, os.str());
      std::cerr << "t_end=" << traj.times.back() << " steps=" << traj.steps
                << " stopped_early=" << (traj.stopped_early ? "true" : "false") << '\n';
    } else if (*st) {
      auto g = st_graph.load();
      sbcm::NewtonOptions nopts;
      nopts.tol = tol;
      nopts.prefer_stable = prefer_stable;
      auto rec = sbcm::find_steady_state(g, params, initial_state(g, init, seed), nopts);
      std::ostringstream os;
      sbcm::write_steady_csv_header(os, g.node_count());
      sbcm::write_steady_csv_row(os, rec);
      emit(out_path, os.str());
      const std::string js = sbcm::spectral_report_json(rec.spectrum) + "\n";
      if (!spectrum_path.empty())
        sbcm::write_file(spectrum_path, js);
      else
        std::cerr << js;
    } else if (*cont) {
      auto g = cont_graph.load();
      auto br = sbcm::continue_in_gamma(g, delta, gamma_max, copts);
      emit(out_path, sbcm::branch_json(br) + "\n");
      std::cerr << "terminated: " << sbcm::to_string(br.terminated_reason);
      if (br.critical_gamma) std::cerr << " critical_gamma=" << *br.critical_gamma;
      std::cerr << '\n';
    } else if (*en) {
      auto g = en_graph.load();
      sbcm::EnumerateOptions eopts;
      eopts.workers = workers;
      auto res = sbcm::enumerate_steady_states(g, params, starts, seed, eopts);
      std::ostringstream os;
      sbcm::write_steady_csv_header(os, g.node_count());
      for (const auto& r : res.records) sbcm::write_steady_csv_row(os, r);
      emit(out_path, os.str());
      std::cerr << res.records.size() << " distinct states, " << res.failed << " failed starts\n";
    } else if (*an) {
      params.validate();
      auto j = nlohmann::ordered_json::parse(sbcm::analytic_json(gamma, delta));
      if (path_n > 0) j["path_top_eigenvalue"] = sbcm::path_top_eigenvalue(path_n, gamma, delta);
      std::cout << j.dump(2) << '\n';
    } else if (*sw) {
      if (!config.empty()) spec = sbcm::sweep_spec_from_json(sbcm::read_file(config), spec);
      if (!experiment.empty()) spec.experiment = sbcm::experiment_from_string(experiment);
      if (!topology.empty()) spec.topology = topology;
      if (gmin) spec.gamma.min = *gmin;
      if (gmax) spec.gamma.max = *gmax;
      if (gpts) spec.gamma.points = *gpts;
      if (glog) spec.gamma.log = true;
      if (glin) spec.gamma.log = false;
      if (dmin) spec.delta.min = *dmin;
      if (dmax) spec.delta.max = *dmax;
      if (dpts) spec.delta.points = *dpts;
      if (dlog) spec.delta.log = true;
      if (dlin) spec.delta.log = false;
      if (!family.empty()) spec.family = sbcm::family_kind_from_string(family);
      if (!classification.empty()) spec.classification = classification;
      if (scan_points) spec.scan_points = *scan_points;
      if (sw_starts) spec.n_starts = *sw_starts;
      if (sw_seed) spec.seed = *sw_seed;
      if (sw_workers)
        spec.workers = *sw_workers;
      else if (config.empty())
        spec.workers = sbcm::default_worker_count();
      if (!output.empty()) spec.output_dir = output;
      auto summary = sbcm::run_sweep(spec, quiet ? nullptr : &std::cerr);
      for (const auto& f : summary.files) std::cout << f.string() << '\n';
    } else if (*po) {
      params.validate();
      auto topo = sbcm::resolve_topology(po_topology);
      if (!topo.cliques) throw sbcm::ValidationError("portrait needs a cliques:K:alignment topology");
      popts.basins = !no_basins;
      auto pp = sbcm::phase_portrait(*topo.cliques, params, grid, popts);
      sbcm::write_portrait(po_out, pp);
      std::cerr << pp.fixed_points.size() << " fixed points, " << pp.unresolved
                << " unresolved basin cells\n";
    } else {
      std::cout << app.help();
    }
  } catch (const sbcm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const sbcm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
