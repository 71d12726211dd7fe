// hetroute: batch analysis of heterogeneous routing games under the logit
// dynamics. Subcommands load a game file, run one analysis, and emit
// deterministic CSV/JSON artifacts (17 significant digits everywhere).
//
// Exit codes: 0 success, 2 input/validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hetroute/continuation.hpp"
#include "hetroute/equilibria.hpp"
#include "hetroute/errors.hpp"
#include "hetroute/game_io.hpp"
#include "hetroute/meanfield.hpp"
#include "hetroute/parallel.hpp"
#include "hetroute/potential.hpp"
#include "hetroute/report.hpp"
#include "hetroute/rng.hpp"
#include "hetroute/stability.hpp"

namespace fs = std::filesystem;
using namespace hetroute;

namespace {

struct CommonArgs {
  std::string game_path;
  std::string out_dir;
  int jobs = 0;  // 0: resolve from HETROUTE_JOBS / hardware
};

void require_positive_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ValidationError("eta must be positive and finite");
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir + "'");
  return p;
}

RouteFlow parse_z0(const std::string& spec, const Game& game, const RouteSet& routes) {
  if (spec == "uniform") return uniform_profile(game, routes);
  if (spec.rfind("vertex:", 0) == 0) {
    long k = 0;
    try {
      k = std::stol(spec.substr(7));
    } catch (...) {
      throw ValidationError("vertex index in '" + spec + "' is not an integer");
    }
    const long count = vertex_profile_count(routes);
    if (k < 0 || k >= count)
      throw ValidationError("vertex index out of range (have " + std::to_string(count) +
                            " vertex profiles)");
    return vertex_profile(game, routes, k);
  }
  if (spec.rfind("dirichlet:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(spec.substr(10));
    } catch (...) {
      throw ValidationError("dirichlet seed in '" + spec + "' is not an integer");
    }
    Rng rng(seed);
    return dirichlet_profile(game, routes, rng);
  }
  if (spec.rfind("file:", 0) == 0) {
    return RouteFlow{};  // resolved by the caller (needs the path)
  }
  throw ValidationError("unknown initial condition '" + spec +
                        "' (use uniform, vertex:<k>, dirichlet:<seed>, file:<path>)");
}

RouteFlow resolve_z0(const std::string& spec, const Game& game, const RouteSet& routes) {
  if (spec.rfind("file:", 0) == 0) return load_flow(spec.substr(5), game, routes);
  return parse_z0(spec, game, routes);
}

int run_routes(const CommonArgs& args) {
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  for (int p = 0; p < routes.n_populations(); ++p) {
    std::cout << "population " << loaded.game.populations[static_cast<std::size_t>(p)].id
              << ": " << routes.count(p) << " routes\n";
    for (int r = 0; r < routes.count(p); ++r)
      std::cout << "  " << r << ": " << routes.label(loaded.game, p, r) << "\n";
  }
  return 0;
}

int run_simulate(const CommonArgs& args, double eta, double horizon, double step,
                 bool adaptive, const std::string& z0_spec, int record_every) {
  require_positive_eta(eta);
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  const RouteFlow z0 = resolve_z0(z0_spec, loaded.game, routes);

  IntegrateOptions opts;
  opts.step = step;
  opts.adaptive = adaptive;
  opts.record_every = record_every;
  const Trajectory traj = integrate(loaded.game, routes, z0, eta, horizon, opts);

  const fs::path out = ensure_out_dir(args.out_dir);
  {
    std::ostringstream csv;
    write_trajectory_csv(csv, loaded.game, routes, traj);
    write_file((out / "trajectory.csv").string(), csv.str());
  }
  write_file((out / "trajectory_meta.json").string(), trajectory_meta_json(traj));
  if (routes.shared_across_populations()) {
    std::ostringstream csv;
    write_aggregate_csv(csv, routes, traj);
    write_file((out / "aggregate.csv").string(), csv.str());
  }
  {
    JsonWriter w;
    w.begin_object();
    w.key("converged").value(traj.converged);
    w.key("final_residual").value(traj.final_residual);
    w.key("final_z").begin_object();
    for (int p = 0; p < routes.n_populations(); ++p) {
      w.key(loaded.game.populations[static_cast<std::size_t>(p)].id).begin_array();
      for (int r = 0; r < routes.count(p); ++r)
        w.value(traj.states.back().z[static_cast<std::size_t>(routes.offset(p) + r)]);
      w.end_array();
    }
    w.end_object();
    w.end_object();
    write_file((out / "summary.json").string(), w.str() + "\n");
  }
  std::cout << "simulate: " << traj.states.size() << " states, converged="
            << (traj.converged ? "true" : "false")
            << ", final residual " << fmt17(traj.final_residual) << "\n";
  return 0;
}

int run_fixed_points(const CommonArgs& args, double eta, int starts, std::uint64_t seed) {
  require_positive_eta(eta);
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  const FixedPointSearch search =
      find_all_fixed_points(loaded.game, routes, eta, starts, seed, {}, args.jobs);

  std::vector<WardropReport> wardrop;
  for (const auto& rec : search.records)
    wardrop.push_back(check_wardrop(loaded.game, routes, rec.z));

  const fs::path out = ensure_out_dir(args.out_dir);
  write_file((out / "fixed_points.json").string(),
             fixed_points_json(loaded.game, routes, search.records, wardrop));
  std::cout << "fixed-points: " << search.records.size() << " found ("
            << search.failures << " starts unconverged)\n";
  return 0;
}

int run_sweep(const CommonArgs& args, double eta_max, double eta_min, int points,
              const std::string& coord_spec, int starts, std::uint64_t seed) {
  require_positive_eta(eta_max);
  if (!(eta_min > 0.0)) throw ValidationError("eta-min must be positive");
  constexpr double kEtaFloor = 0.005;
  if (eta_min < kEtaFloor) {
    std::cerr << "warning: eta-min " << fmt17(eta_min) << " is below the supported floor "
              << fmt17(kEtaFloor) << " (exponent range); clamping\n";
    eta_min = kEtaFloor;
  }
  if (!(eta_max > eta_min)) throw ValidationError("eta-max must exceed eta-min");

  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  SweepOptions opts;
  opts.n_starts = starts;
  opts.seed = seed;
  opts.jobs = args.jobs;

  const SweepResult result = sweep(loaded.game, routes, log_grid(eta_max, eta_min, points), opts);
  const auto events = detect_bifurcations(loaded.game, routes, result, 1e-3, opts);
  const auto limits = limit_equilibria(loaded.game, routes, result, eta_min);
  const Coordinate coord =
      coord_spec.empty()
          ? parse_coordinate(loaded.game, routes, "f:" + loaded.game.network.links.front().id)
          : parse_coordinate(loaded.game, routes, coord_spec);
  const auto diagram = bifurcation_diagram(loaded.game, routes, result, coord);

  const fs::path out = ensure_out_dir(args.out_dir);
  write_file((out / "branches.json").string(), branches_json(loaded.game, routes, result));
  write_file((out / "events.json").string(), events_json(events));
  write_file((out / "limits.json").string(), limits_json(loaded.game, routes, limits));
  {
    std::ostringstream csv;
    write_diagram_csv(csv, diagram, coord.name);
    write_file((out / "diagram.csv").string(), csv.str());
  }
  std::cout << "sweep: " << result.branches.size() << " branches, " << events.size()
            << " bifurcation events, " << limits.size() << " limit points\n";
  return 0;
}

int run_certify(const CommonArgs& args, double eta, bool threshold, int samples,
                std::uint64_t seed, int pairs, double horizon) {
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  const fs::path out = ensure_out_dir(args.out_dir);

  if (threshold) {
    ThresholdOptions topts;
    topts.n_dirichlet = samples;
    topts.seed = seed;
    topts.jobs = args.jobs;
    const ThresholdEstimate est = estimate_eta_threshold(loaded.game, routes, topts);
    write_file((out / "threshold.json").string(), threshold_json(est));
    std::cout << "certify: threshold estimate eta_hat=" << fmt17(est.eta_hat)
              << " (sampled=true)\n";
    return 0;
  }

  require_positive_eta(eta);
  const ContractionCertificate cert =
      contraction_margin(loaded.game, routes, eta, samples, seed, args.jobs);
  write_file((out / "certificate.json").string(), certificate_json(loaded.game, routes, cert));
  std::cout << "certify: margin c=" << fmt17(cert.margin) << " valid="
            << (cert.valid ? "true" : "false") << "\n";

  if (pairs > 0) {
    if (!cert.valid)
      throw NumericalError("contraction inequality requested but the certificate is invalid");
    const ContractionCheck check = verify_contraction_inequality(
        loaded.game, routes, eta, pairs, horizon, cert, Rng::derive(seed, 1));
    JsonWriter w;
    w.begin_object();
    w.key("pairs").value(pairs);
    w.key("horizon").value(horizon);
    w.key("ok").value(check.ok);
    w.key("worst_ratio").value(check.worst_ratio);
    w.key("worst_time").value(check.worst_time);
    w.key("worst_pair").value(check.worst_pair);
    w.end_object();
    write_file((out / "inequality.json").string(), w.str() + "\n");
    if (!check.ok)
      throw NumericalError("pairwise contraction inequality violated (worst ratio " +
                           fmt17(check.worst_ratio) + ")");
    std::cout << "certify: inequality held on " << pairs << " pairs (worst ratio "
              << fmt17(check.worst_ratio) << ")\n";
  }
  return 0;
}

int run_wardrop(const CommonArgs& args, const std::string& flow_path, double tol) {
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  const RouteFlow z = load_flow(flow_path, loaded.game, routes);
  const WardropReport wardrop = check_wardrop(loaded.game, routes, z, tol);
  const StrictReport strict = check_strict(loaded.game, routes, z, tol);
  const std::string json = wardrop_json(loaded.game, routes, wardrop, strict);
  std::cout << json;
  if (!args.out_dir.empty()) {
    const fs::path out = ensure_out_dir(args.out_dir);
    write_file((out / "wardrop.json").string(), json);
  }
  return 0;
}

int run_potential(const CommonArgs& args, double eta, double horizon,
                  const std::string& z0_spec, std::uint64_t seed) {
  require_positive_eta(eta);
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  const SymmetryReport sym = check_symmetry(loaded.game, routes, 64, seed);

  JsonWriter w;
  w.begin_object();
  w.key("symmetry");
  {
    // inline the symmetry report object
    w.begin_object();
    w.key("symmetric").value(sym.symmetric);
    w.key("worst_violation").value(sym.worst_violation);
    if (sym.worst_pop_p >= 0) {
      w.key("population_p")
          .value(loaded.game.populations[static_cast<std::size_t>(sym.worst_pop_p)].id);
      w.key("population_q")
          .value(loaded.game.populations[static_cast<std::size_t>(sym.worst_pop_q)].id);
      w.key("route_i").value(sym.worst_route_i);
      w.key("route_j").value(sym.worst_route_j);
    }
    w.end_object();
  }

  std::optional<TollGameSpec> spec = loaded.toll;
  if (!spec) spec = derive_toll_spec(loaded.game);
  if (sym.symmetric && spec) {
    const RouteFlow z0 = resolve_z0(z0_spec, loaded.game, routes);
    const Trajectory traj = integrate(loaded.game, routes, z0, eta, horizon, {});
    const LyapunovReport lya =
        lyapunov_monitor(loaded.game, spec, routes, traj, eta);
    const PotentialValue final_v =
        perturbed_potential(loaded.game, *spec, routes, traj.states.back(), eta);
    w.key("lyapunov").begin_object();
    w.key("eta").value(eta);
    w.key("non_increasing").value(lya.non_increasing);
    w.key("max_increase").value(lya.max_increase);
    w.key("at_time").value(lya.at_time);
    w.key("slack").value(lya.slack);
    w.end_object();
    w.key("potential_at_final").begin_object();
    w.key("V").value(final_v.value);
    w.key("beckmann").value(final_v.beckmann);
    w.key("toll_term").value(final_v.toll_term);
    w.key("entropy").value(final_v.entropy);
    w.key("V_eta").value(final_v.perturbed);
    w.end_object();
  } else {
    w.key("lyapunov").null();
  }
  w.end_object();
  const std::string json = w.str() + "\n";
  std::cout << json;
  if (!args.out_dir.empty()) {
    const fs::path out = ensure_out_dir(args.out_dir);
    write_file((out / "potential.json").string(), json);
  }
  return 0;
}

int run_agents(const CommonArgs& args, double eta, long n, std::uint64_t seed, double horizon,
               double dt, const std::string& z0_spec, bool compare) {
  require_positive_eta(eta);
  if (n < 1) throw ValidationError("agent count must be >= 1");
  const LoadedGame loaded = load_game(args.game_path);
  const RouteSet routes = enumerate_routes(loaded.game);
  const RouteFlow z0 = resolve_z0(z0_spec, loaded.game, routes);

  std::vector<long> agents(static_cast<std::size_t>(loaded.game.n_populations()), n);
  AgentSimOptions aopts;
  aopts.sample_dt = dt;
  const Trajectory emp =
      simulate_agents(loaded.game, routes, eta, agents, z0, horizon, seed, aopts);

  const fs::path out = ensure_out_dir(args.out_dir);
  {
    std::ostringstream csv;
    write_trajectory_csv(csv, loaded.game, routes, emp);
    write_file((out / "agents.csv").string(), csv.str());
  }
  write_file((out / "agents_meta.json").string(), trajectory_meta_json(emp));

  if (compare) {
    IntegrateOptions iopts;
    iopts.step = dt;
    iopts.stationarity_tol = 0.0;  // keep the full grid
    const Trajectory ode = integrate(loaded.game, routes, z0, eta, horizon, iopts);
    const CompareReport report = compare_to_ode(emp, ode);
    write_file((out / "compare.json").string(), compare_json(report));
    std::cout << "agents: sup-distance to ODE " << fmt17(report.sup_distance) << "\n";
  } else {
    std::cout << "agents: " << emp.states.size() << " sampled states\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetroute: logit-dynamics analysis of heterogeneous routing games"};
  app.require_subcommand(1);

  CommonArgs common;
  double eta = 0.0, eta_max = 1.0, eta_min = 0.01, horizon = 50.0, step = 0.01, dt = 0.01;
  double tol = 1e-8;
  int points = 60, starts = 64, samples = 512, pairs = 0, record_every = 1;
  long n_agents = 0;
  std::uint64_t seed = 0;
  bool adaptive = false, threshold = false, compare = false;
  std::string z0_spec = "uniform", coord, flow_path;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("game", common.game_path, "game file (JSON)")->required();
    if (needs_out)
      cmd->add_option("--out", common.out_dir, "output directory")->default_val("out");
    else
      cmd->add_option("--out", common.out_dir, "output directory (optional)");
    cmd->add_option("--jobs", common.jobs,
                    "worker threads (default: HETROUTE_JOBS or all cores)");
  };

  CLI::App* routes_cmd = app.add_subcommand("routes", "print the route enumeration order");
  add_common(routes_cmd, false);

  CLI::App* sim = app.add_subcommand("simulate", "integrate the logit dynamics");
  add_common(sim, true);
  sim->add_option("--eta", eta, "noise level")->required();
  sim->add_option("--t", horizon, "horizon")->default_val(50.0);
  sim->add_option("--step", step, "RK4 step")->default_val(0.01);
  sim->add_flag("--adaptive", adaptive, "step-doubling adaptive stepping");
  sim->add_option("--z0", z0_spec, "uniform | vertex:<k> | dirichlet:<seed> | file:<path>");
  sim->add_option("--record-every", record_every, "record every k-th step")->default_val(1);

  CLI::App* fp = app.add_subcommand("fixed-points", "multi-start fixed-point search");
  add_common(fp, true);
  fp->add_option("--eta", eta, "noise level")->required();
  fp->add_option("--starts", starts, "random interior starts")->default_val(64);
  fp->add_option("--seed", seed, "start sampling seed")->default_val(0);

  CLI::App* sw = app.add_subcommand("sweep", "continuation sweep with bifurcation detection");
  add_common(sw, true);
  sw->add_option("--eta-max", eta_max, "top of the grid")->default_val(1.0);
  sw->add_option("--eta-min", eta_min, "bottom of the grid (floor 0.005)")->default_val(0.01);
  sw->add_option("--points", points, "grid points (log-spaced)")->default_val(60);
  sw->add_option("--coord", coord, "diagram coordinate f:<link> or z:<pop>:<route>");
  sw->add_option("--starts", starts, "multi-start size per grid point")->default_val(64);
  sw->add_option("--seed", seed, "multi-start seed")->default_val(0);

  CLI::App* cert = app.add_subcommand("certify", "l1 contraction certificate");
  add_common(cert, true);
  cert->add_option("--eta", eta, "noise level (omit with --threshold)");
  cert->add_flag("--threshold", threshold, "bisect the contraction threshold over eta");
  cert->add_option("--samples", samples, "Dirichlet sample size")->default_val(512);
  cert->add_option("--seed", seed, "sampling seed")->default_val(0);
  cert->add_option("--pairs", pairs, "verify the trajectory-pair inequality on this many pairs");
  cert->add_option("--t", horizon, "horizon for the pairwise check")->default_val(10.0);

  CLI::App* ward = app.add_subcommand("wardrop", "Wardrop/strict equilibrium check of a flow file");
  add_common(ward, false);
  ward->add_option("--flow", flow_path, "flow file {pop: {route index: flow}}")->required();
  ward->add_option("--tol", tol, "cost tolerance")->default_val(1e-8);

  CLI::App* pot = app.add_subcommand("potential", "symmetry check and Lyapunov monitoring");
  add_common(pot, false);
  pot->add_option("--eta", eta, "noise level for the monitored trajectory")->default_val(0.5);
  pot->add_option("--t", horizon, "horizon of the monitored trajectory")->default_val(20.0);
  pot->add_option("--z0", z0_spec, "initial condition specifier");
  pot->add_option("--seed", seed, "symmetry sampling seed")->default_val(0);

  CLI::App* ag = app.add_subcommand("agents", "finite-N noisy-best-response simulation");
  add_common(ag, true);
  ag->add_option("--eta", eta, "noise level")->required();
  ag->add_option("--n", n_agents, "agents per population")->required();
  ag->add_option("--seed", seed, "simulation seed")->default_val(0);
  ag->add_option("--t", horizon, "horizon")->default_val(10.0);
  ag->add_option("--dt", dt, "output sampling step")->default_val(0.01);
  ag->add_option("--z0", z0_spec, "initial condition specifier");
  ag->add_flag("--compare", compare, "also integrate the ODE and report the sup distance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (routes_cmd->parsed()) return run_routes(common);
    if (sim->parsed())
      return run_simulate(common, eta, horizon, step, adaptive, z0_spec, record_every);
    if (fp->parsed()) return run_fixed_points(common, eta, starts, seed);
    if (sw->parsed()) return run_sweep(common, eta_max, eta_min, points, coord, starts, seed);
    if (cert->parsed()) {
      if (!threshold && !(eta > 0.0))
        throw ValidationError("certify needs --eta or --threshold");
      return run_certify(common, eta, threshold, samples, seed, pairs, horizon);
    }
    if (ward->parsed()) return run_wardrop(common, flow_path, tol);
    if (pot->parsed()) return run_potential(common, eta, horizon, z0_spec, seed);
    if (ag->parsed()) return run_agents(common, eta, n_agents, seed, horizon, dt, z0_spec, compare);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
