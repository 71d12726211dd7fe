// Acceptance suite: each criterion is pinned to its stated tolerance and
// runtime budget and prints exactly one [PASS]/[FAIL] line. Run all of
// them (no arguments) or a subset (criterion numbers as arguments).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hetroute/continuation.hpp"
#include "hetroute/equilibria.hpp"
#include "hetroute/game_io.hpp"
#include "hetroute/meanfield.hpp"
#include "hetroute/potential.hpp"
#include "hetroute/rng.hpp"
#include "hetroute/stability.hpp"
#include "helpers.hpp"

using namespace hetroute;
using namespace hetroute::test;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

// ---------------------------------------------------------------- criterion 1

Check criterion_1() {
  Check c;
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const std::vector<RouteFlow> profiles{konishi_eq1(), konishi_eq2(), konishi_eq3()};
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const WardropReport w = check_wardrop(loaded.game, routes, profiles[i]);
    c.require(w.is_equilibrium && w.worst_gap < 1e-9,
              "profile " + std::to_string(i + 1) + " gap " + std::to_string(w.worst_gap));
    const bool strict = check_strict(loaded.game, routes, profiles[i]).is_strict;
    if (i < 2)
      c.require(strict, "profile " + std::to_string(i + 1) + " should be strict");
    else
      c.require(!strict, "profile 3 should not be strict");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 2

Check criterion_2() {
  Check c;
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const auto found = enumerate_strict_candidates(loaded.game, routes);
  c.require(found.size() == 2, "found " + std::to_string(found.size()) + " strict equilibria");
  if (found.size() == 2) {
    const double d0 = std::min(l1_distance(found[0].z, konishi_eq1()),
                               l1_distance(found[0].z, konishi_eq2()));
    const double d1 = std::min(l1_distance(found[1].z, konishi_eq1()),
                               l1_distance(found[1].z, konishi_eq2()));
    c.require(d0 == 0.0 && d1 == 0.0, "vertices do not match the paper profiles exactly");
    c.require(l1_distance(found[0].z, found[1].z) > 0.0, "both matched the same profile");
  }
  return c;
}

// ------------------------------------------------------- criteria 3 and 4

const SweepResult& acceptance_sweep() {
  static const SweepResult result = [] {
    const LoadedGame loaded = load_konishi();
    const RouteSet routes = enumerate_routes(loaded.game);
    return sweep(loaded.game, routes, log_grid(1.0, 0.005, 60), {});
  }();
  return result;
}

Check criterion_3() {
  Check c;
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const SweepResult& result = acceptance_sweep();
  const auto events = detect_bifurcations(loaded.game, routes, result, 1e-3, {});
  c.require(events.size() == 1, "expected 1 event, got " + std::to_string(events.size()));
  if (events.size() != 1) return c;

  const double mid = 0.5 * (events[0].eta_lo + events[0].eta_hi);
  c.require(mid >= 0.28 && mid <= 0.34, "bracket midpoint " + std::to_string(mid));
  c.note("eta* bracket [" + std::to_string(events[0].eta_lo) + ", " +
         std::to_string(events[0].eta_hi) + "]");

  for (double eta : result.grid) {
    int stable = 0, unstable = 0, live = 0;
    for (const auto& b : result.branches) {
      const BranchPoint* pt = b.at(eta);
      if (!pt) continue;
      ++live;
      if (pt->record.stability == StabilityClass::Stable) ++stable;
      if (pt->record.stability == StabilityClass::Unstable) ++unstable;
    }
    if (eta > events[0].eta_hi)
      c.require(live == 1 && stable == 1,
                "above the bracket: " + std::to_string(live) + " branches at eta " +
                    std::to_string(eta));
    if (eta < events[0].eta_lo)
      c.require(live == 3 && stable == 2 && unstable == 1,
                "below the bracket: (" + std::to_string(stable) + " stable, " +
                    std::to_string(unstable) + " unstable) at eta " + std::to_string(eta));
  }
  return c;
}

Check criterion_4() {
  Check c;
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const auto limits = limit_equilibria(loaded.game, routes, acceptance_sweep(), 0.005, 1e-3);
  c.require(limits.size() == 3, "expected 3 limit points, got " + std::to_string(limits.size()));
  if (limits.size() != 3) return c;

  const std::vector<RouteFlow> targets{konishi_eq1(), konishi_eq2(), konishi_eq3()};
  std::set<int> matched;
  for (const auto& lim : limits) {
    double best = 1e9;
    int arg = -1;
    for (int i = 0; i < 3; ++i) {
      const double d = l1_distance(lim.z, targets[i]);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    c.require(best <= 0.05, "limit point is " + std::to_string(best) + " away in l1");
    c.require(matched.insert(arg).second, "two limit points matched the same profile");
    if (arg <= 1)
      c.require(lim.stability == StabilityClass::Stable,
                "strict-equilibrium endpoint is not on a stable branch");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 5

Check criterion_5() {
  Check c;
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const ContractionCertificate cert = contraction_margin(loaded.game, routes, 1e6, 512, 0);
  c.require(cert.valid && cert.margin >= 0.99, "margin " + std::to_string(cert.margin));

  const ContractionCheck check =
      verify_contraction_inequality(loaded.game, routes, 1e6, 20, 10.0, cert, 42);
  c.require(check.ok, "pairwise inequality violated at t=" + std::to_string(check.worst_time));

  const auto fp =
      find_fixed_point(loaded.game, routes, 1e6, vertex_profile(loaded.game, routes, 5));
  c.require(fp.record.has_value(), "no fixed point at eta=1e6");
  if (fp.record)
    c.require(l1_distance(fp.record->z, uniform_profile(loaded.game, routes)) <= 1e-3,
              "fixed point too far from uniform");
  return c;
}

// ---------------------------------------------------------------- criterion 6

Check criterion_6() {
  Check c;
  const double rtol = 1e-5, h = 1e-6;

  auto fd_check = [&](const Game& game, const RouteSet& routes, const RouteFlow& z,
                      double eta) {
    const int n = routes.total();
    Eigen::MatrixXd fdz(n, n);
    for (int j = 0; j < n; ++j) {
      RouteFlow plus = z, minus = z;
      plus.z[j] += h;
      minus.z[j] -= h;
      const RouteFlow gp = logit_map(game, routes, plus, eta);
      const RouteFlow gm = logit_map(game, routes, minus, eta);
      for (int i = 0; i < n; ++i) fdz(i, j) = (gp.z[i] - gm.z[i]) / (2.0 * h);
    }
    const Eigen::MatrixXd ja = jacobian_z(game, routes, z, eta);
    const double scale_z = std::max(1.0, ja.cwiseAbs().maxCoeff());
    if ((ja - fdz).cwiseAbs().maxCoeff() > rtol * scale_z) return false;

    const RouteFlow gp = logit_map(game, routes, z, eta + h);
    const RouteFlow gm = logit_map(game, routes, z, eta - h);
    const Eigen::VectorXd ea = jacobian_eta(game, routes, z, eta);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs((gp.z[i] - gm.z[i]) / (2.0 * h) - ea(i)));
    const double scale_e = std::max(1.0, ea.cwiseAbs().maxCoeff());
    return worst <= rtol * scale_e;
  };

  int points = 0, failures = 0;
  {
    const LoadedGame loaded = load_konishi();
    const RouteSet routes = enumerate_routes(loaded.game);
    Rng rng(600);
    for (int k = 0; k < 25; ++k, ++points) {
      const RouteFlow z = dirichlet_profile(loaded.game, routes, rng);
      const double eta = std::exp(std::log(0.05) + rng.uniform() * std::log(100.0 / 0.05));
      if (!fd_check(loaded.game, routes, z, eta)) ++failures;
    }
  }
  Rng rng(601);
  for (int g = 0; g < 5; ++g) {
    const Game game = random_game(rng.next_u64(), 2, 2 + g % 3);
    const RouteSet routes = enumerate_routes(game);
    for (int k = 0; k < 5; ++k, ++points) {
      const RouteFlow z = dirichlet_profile(game, routes, rng);
      const double eta = std::exp(std::log(0.05) + rng.uniform() * std::log(100.0 / 0.05));
      if (!fd_check(game, routes, z, eta)) ++failures;
    }
  }
  c.require(failures == 0, std::to_string(failures) + " of " + std::to_string(points) +
                               " points exceeded the tolerance");
  c.note(std::to_string(points) + " points checked");
  return c;
}

// ---------------------------------------------------------------- criterion 7

Check criterion_7() {
  Check c;
  Rng rng(700);
  int states = 0, sum_failures = 0, shift_failures = 0;
  const LoadedGame konishi = load_konishi();
  const RouteSet kroutes = enumerate_routes(konishi.game);

  while (states < 1000) {
    const bool use_konishi = states % 4 == 0;
    const Game game = use_konishi
                          ? konishi.game
                          : random_game(rng.next_u64(), 1 + static_cast<int>(rng.uniform_int(3)),
                                        2 + static_cast<int>(rng.uniform_int(3)));
    const RouteSet routes = use_konishi ? kroutes : enumerate_routes(game);
    for (int k = 0; k < 10 && states < 1000; ++k, ++states) {
      const RouteFlow z = dirichlet_profile(game, routes, rng);
      const double eta = std::exp(rng.uniform() * 12.0 - 6.0);
      const RouteFlow g = logit_map(game, routes, z, eta);
      for (int p = 0; p < routes.n_populations(); ++p) {
        double sum = 0.0;
        for (double v : g.pop(routes, p)) sum += v;
        if (std::abs(sum - game.populations[p].throughput) > 1e-9) ++sum_failures;
      }

      // bitwise shift identity on dyadic cost vectors
      const int m = 2 + static_cast<int>(rng.uniform_int(4));
      std::vector<double> costs(m), shifted(m), wa(m), wb(m);
      const double shift = std::ldexp(static_cast<double>(1 + rng.uniform_int(1 << 10)), -4);
      for (int i = 0; i < m; ++i) {
        costs[i] = std::ldexp(static_cast<double>(rng.uniform_int(1 << 20)), -14);
        shifted[i] = costs[i] + shift;
      }
      logit_weights(costs, eta, 1.5, wa);
      logit_weights(shifted, eta, 1.5, wb);
      for (int i = 0; i < m; ++i)
        if (wa[i] != wb[i]) ++shift_failures;
    }
  }
  c.require(sum_failures == 0, std::to_string(sum_failures) + " sum violations");
  c.require(shift_failures == 0, std::to_string(shift_failures) + " shift violations");
  c.note("1000 states");
  return c;
}

// ---------------------------------------------------------------- criterion 8

Check criterion_8() {
  Check c;
  const LoadedGame toll = load_game(examples_dir() + "/toll2.json");
  const RouteSet routes = enumerate_routes(toll.game);

  c.require(check_symmetry(toll.game, routes).symmetric, "toll game failed the symmetry check");

  Rng rng(800);
  for (double eta : {0.2, 1.0, 5.0}) {
    for (int k = 0; k < 10; ++k) {
      const RouteFlow z0 = dirichlet_profile(toll.game, routes, rng);
      const Trajectory traj = integrate(toll.game, routes, z0, eta, 30.0);
      const LyapunovReport rep = lyapunov_monitor(toll.game, toll.toll, routes, traj, eta);
      c.require(rep.non_increasing, "V_eta increased by " + std::to_string(rep.max_increase) +
                                        " at eta " + std::to_string(eta));
    }
  }

  for (double eta : {0.2, 1.0, 5.0}) {
    const RouteFlow zmin = minimize_perturbed_potential(toll.game, *toll.toll, routes, eta);
    const auto fp =
        find_fixed_point(toll.game, routes, eta, uniform_profile(toll.game, routes));
    c.require(fp.record.has_value(), "no fixed point for the toll game");
    if (fp.record)
      c.require(l1_distance(zmin, fp.record->z) <= 1e-6,
                "minimizer/fixed-point gap " + std::to_string(l1_distance(zmin, fp.record->z)) +
                    " at eta " + std::to_string(eta));
  }

  const LoadedGame konishi = load_konishi();
  const RouteSet kroutes = enumerate_routes(konishi.game);
  c.require(!check_symmetry(konishi.game, kroutes).symmetric,
            "the konishi game must fail the symmetry check");
  return c;
}

// ---------------------------------------------------------------- criterion 9

Check criterion_9() {
  Check c;
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const double eta = 0.5, horizon = 10.0;
  const RouteFlow z0 = uniform_profile(loaded.game, routes);
  IntegrateOptions iopts;
  iopts.stationarity_tol = 0.0;
  const Trajectory ode = integrate(loaded.game, routes, z0, eta, horizon, iopts);

  const std::vector<long> levels{100, 400, 1600};
  std::vector<double> medians;
  for (long N : levels) {
    std::vector<double> sups;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Trajectory emp =
          simulate_agents(loaded.game, routes, eta, std::vector<long>{N, N, N}, z0, horizon,
                          Rng::derive(900 + N, seed));
      sups.push_back(compare_to_ode(emp, ode).sup_distance);
    }
    std::sort(sups.begin(), sups.end());
    medians.push_back(0.5 * (sups[9] + sups[10]));
  }
  for (std::size_t i = 1; i < medians.size(); ++i)
    c.require(medians[i] < medians[i - 1], "median sup-distance did not decrease");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = std::log(static_cast<double>(levels[i]));
    const double y = std::log(medians[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(levels.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  c.require(slope >= -0.7 && slope <= -0.3, "log-log slope " + std::to_string(slope));
  c.note("slope " + std::to_string(slope));
  return c;
}

// --------------------------------------------------------------- criterion 10

Check criterion_10() {
  Check c;
  const LoadedGame loaded = load_game(examples_dir() + "/parallel_affine.json");
  const RouteSet routes = enumerate_routes(loaded.game);
  const SweepResult result = sweep(loaded.game, routes, log_grid(10.0, 0.01, 60), {});
  c.require(result.branches.size() == 1,
            std::to_string(result.branches.size()) + " branches (expected 1)");
  if (result.branches.size() == 1) {
    const Branch& b = result.branches.front();
    c.require(b.points.size() == result.grid.size(), "branch did not survive the whole grid");
    for (const auto& pt : b.points)
      c.require(pt.record.stability == StabilityClass::Stable,
                "branch not stable at eta " + std::to_string(pt.eta));
    const WardropReport w = check_wardrop(loaded.game, routes, b.points.back().record.z);
    c.require(w.worst_gap < 1e-3, "endpoint gap " + std::to_string(w.worst_gap));
  }
  return c;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Check()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Example-1 equilibria verify as Wardrop/strict", 1.0, criterion_1},
      {2, "strict-equilibrium enumeration", 5.0, criterion_2},
      {3, "pitchfork bifurcation near eta* = 0.31", 300.0, criterion_3},
      {4, "limit equilibria at eta = 0.005", 300.0, criterion_4},
      {5, "large-noise contraction certificate", 30.0, criterion_5},
      {6, "analytic jacobians vs finite differences", 30.0, criterion_6},
      {7, "simplex and softmax-shift invariance", 10.0, criterion_7},
      {8, "potential-game Lyapunov and minimizer", 60.0, criterion_8},
      {9, "mean-field concentration in N", 120.0, criterion_9},
      {10, "homogeneous baseline sweep", 60.0, criterion_10},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() && !selected.count(criterion.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.note(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criterion.budget_seconds) {
      check.ok = false;
      check.note("over the " + std::to_string(criterion.budget_seconds) + "s budget");
    }
    if (!check.ok) ++failures;
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", check.ok ? "PASS" : "FAIL",
                criterion.number, criterion.name, elapsed, check.detail.empty() ? "" : " -- ",
                check.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
