#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "hetroute/errors.hpp"
#include "hetroute/game_io.hpp"
#include "helpers.hpp"

using namespace hetroute;
using namespace hetroute::test;

TEST_CASE("konishi game loads with the Fig-1 structure") {
  const LoadedGame loaded = load_konishi();
  const Game& game = loaded.game;
  CHECK(game.network.nodes.size() == 4);
  CHECK(game.network.links.size() == 6);
  CHECK(game.populations.size() == 3);
  CHECK(game.populations[0].throughput == doctest::Approx(1.2));
  CHECK(game.populations[1].throughput == doctest::Approx(1.0));
  CHECK(game.populations[2].throughput == doctest::Approx(1.0));
  CHECK_FALSE(loaded.toll.has_value());

  // spot-check the delay table: tau^2_2 = 20 f, tau^3_3 = 21 + f
  const int e2 = game.network.link_index("e2");
  const int e3 = game.network.link_index("e3");
  CHECK(game.populations[1].delays[e2](2.0) == doctest::Approx(40.0));
  CHECK(game.populations[1].delays[e2].derivative(2.0) == doctest::Approx(20.0));
  CHECK(game.populations[2].delays[e3](1.0) == doctest::Approx(22.0));
}

TEST_CASE("single-link game is valid") {
  const char* text = R"({
    "nodes": ["o", "d"],
    "links": [{"id": "e", "tail": "o", "head": "d"}],
    "populations": [{"id": "p", "origin": "o", "destination": "d", "throughput": 1,
                     "delays": {"e": {"type": "constant", "params": [5]}}}]
  })";
  const LoadedGame loaded = parse_game(text);
  CHECK(loaded.game.populations.size() == 1);
  const RouteSet routes = enumerate_routes(loaded.game);
  CHECK(routes.count(0) == 1);
  CHECK(routes.route(0, 0).size() == 1);
}

TEST_CASE("unreachable destination is a validation error") {
  const char* text = R"({
    "nodes": ["o", "d", "x"],
    "links": [{"id": "e", "tail": "o", "head": "d"}],
    "populations": [{"id": "p", "origin": "o", "destination": "x", "throughput": 1,
                     "delays": {"e": {"type": "constant", "params": [5]}}}]
  })";
  CHECK_THROWS_AS(parse_game(text), ValidationError);
}

TEST_CASE("loader reports context for malformed input") {
  CHECK_THROWS_AS(parse_game("{ nope"), ParseError);
  CHECK_THROWS_AS(parse_game(R"({"nodes": ["o"], "links": []})"), ParseError);  // missing populations
  // negative throughput names the invariant
  const char* neg = R"({
    "nodes": ["o", "d"],
    "links": [{"id": "e", "tail": "o", "head": "d"}],
    "populations": [{"id": "p", "origin": "o", "destination": "d", "throughput": -1,
                     "delays": {"e": {"type": "constant", "params": [5]}}}]
  })";
  CHECK_THROWS_WITH_AS(parse_game(neg), doctest::Contains("throughput"), ValidationError);
  // unknown node
  const char* badnode = R"({
    "nodes": ["o", "d"],
    "links": [{"id": "e", "tail": "o", "head": "z"}],
    "populations": [{"id": "p", "origin": "o", "destination": "d", "throughput": 1,
                     "delays": {"e": {"type": "constant", "params": [5]}}}]
  })";
  CHECK_THROWS_WITH_AS(parse_game(badnode), doctest::Contains("unknown"), ValidationError);
  // delay map not covering a link
  const char* uncovered = R"({
    "nodes": ["o", "d"],
    "links": [{"id": "e", "tail": "o", "head": "d"}, {"id": "f", "tail": "o", "head": "d"}],
    "populations": [{"id": "p", "origin": "o", "destination": "d", "throughput": 1,
                     "delays": {"e": {"type": "constant", "params": [5]}}}]
  })";
  CHECK_THROWS_AS(parse_game(uncovered), ValidationError);
  // negative delay coefficient violates monotonicity
  const char* decreasing = R"({
    "nodes": ["o", "d"],
    "links": [{"id": "e", "tail": "o", "head": "d"}],
    "populations": [{"id": "p", "origin": "o", "destination": "d", "throughput": 1,
                     "delays": {"e": {"type": "affine", "params": [5, -1]}}}]
  })";
  CHECK_THROWS_AS(parse_game(decreasing), ValidationError);
}

TEST_CASE("route enumeration on the konishi network is the paper's order") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  for (int p = 0; p < 3; ++p) {
    REQUIRE(routes.count(p) == 4);
    CHECK(routes.label(loaded.game, p, 0) == "e1,e2");
    CHECK(routes.label(loaded.game, p, 1) == "e1,e3");
    CHECK(routes.label(loaded.game, p, 2) == "e4,e5");
    CHECK(routes.label(loaded.game, p, 3) == "e4,e6");
  }
  CHECK(routes.total() == 12);
  CHECK(routes.shared_across_populations());
}

TEST_CASE("two parallel links give two routes") {
  const Game game = parallel_game({DelayFunction::constant(1), DelayFunction::constant(2)});
  const RouteSet routes = enumerate_routes(game);
  CHECK(routes.count(0) == 2);
}

TEST_CASE("route cap is an explicit error naming the population") {
  const LoadedGame loaded = load_konishi();
  CHECK_THROWS_WITH_AS(enumerate_routes(loaded.game, 2), doctest::Contains("p1"),
                       ValidationError);
}

namespace {

// brute-force simple-path counter over the same graph representation
int count_paths(const Network& net, const std::string& node, const std::string& dest,
                std::set<std::string>& visited) {
  if (node == dest) return 1;
  int total = 0;
  for (const auto& link : net.links) {
    if (link.tail != node || visited.count(link.head)) continue;
    visited.insert(link.head);
    total += count_paths(net, link.head, dest, visited);
    visited.erase(link.head);
  }
  return total;
}

}  // namespace

TEST_CASE("enumeration count matches exhaustive search on corridor DAGs") {
  // k parallel two-link corridors: product structure, k simple paths each
  for (int k = 1; k <= 4; ++k) {
    Network net;
    net.nodes = {"o", "d"};
    for (int i = 0; i < k; ++i) {
      const std::string mid = "m" + std::to_string(i);
      net.nodes.push_back(mid);
      net.links.push_back({"in" + std::to_string(i), "o", mid});
      net.links.push_back({"out" + std::to_string(i), mid, "d"});
    }
    Population pop;
    pop.id = "p";
    pop.origin = "o";
    pop.destination = "d";
    pop.throughput = 1.0;
    pop.delays.assign(net.links.size(), DelayFunction::constant(1));
    Game game{net, {pop}};

    const RouteSet routes = enumerate_routes(game);
    std::set<std::string> visited{"o"};
    CHECK(routes.count(0) == k);
    CHECK(routes.count(0) == count_paths(net, "o", "d", visited));
  }
  // richer DAG (<= 8 nodes): o->a->b->d with skips and a konishi-style fan
  {
    const LoadedGame loaded = load_konishi();
    std::set<std::string> visited{"o"};
    const int brute = count_paths(loaded.game.network, "o", "d", visited);
    CHECK(enumerate_routes(loaded.game).count(0) == brute);
  }
}

TEST_CASE("link flow at equilibrium 1 matches the hand evaluation") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const LinkFlow f = link_flow(routes, konishi_eq1());
  const std::vector<double> expected{1.2, 1.2, 0.0, 2.0, 1.0, 1.0};
  for (std::size_t e = 0; e < expected.size(); ++e)
    CHECK(f[e] == doctest::Approx(expected[e]).epsilon(1e-14));
}

TEST_CASE("zero throughput gives the zero link flow") {
  Game game = parallel_game({DelayFunction::affine(1, 1), DelayFunction::affine(2, 1)}, 0.0);
  const RouteSet routes = enumerate_routes(game);
  RouteFlow z{{0.0, 0.0}};
  for (double fe : link_flow(routes, z)) CHECK(fe == 0.0);
}

TEST_CASE("single population on a single route loads its links only") {
  const char* text = R"({
    "nodes": ["o", "m", "d"],
    "links": [{"id": "a", "tail": "o", "head": "m"}, {"id": "b", "tail": "m", "head": "d"},
              {"id": "c", "tail": "o", "head": "d"}],
    "populations": [{"id": "p", "origin": "o", "destination": "m", "throughput": 3,
                     "delays": {"a": {"type": "constant", "params": [1]},
                                "b": {"type": "constant", "params": [1]},
                                "c": {"type": "constant", "params": [1]}}}]
  })";
  const LoadedGame loaded = parse_game(text);
  const RouteSet routes = enumerate_routes(loaded.game);
  REQUIRE(routes.count(0) == 1);
  RouteFlow z{{3.0}};
  const LinkFlow f = link_flow(routes, z);
  CHECK(f[loaded.game.network.link_index("a")] == doctest::Approx(3.0));
  CHECK(f[loaded.game.network.link_index("b")] == 0.0);
  CHECK(f[loaded.game.network.link_index("c")] == 0.0);
}

TEST_CASE("route costs at equilibrium 1 match the Fig-1 delay table") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const auto costs = route_costs(loaded.game, routes, konishi_eq1());
  const std::vector<double> expected{
      40.4, 120.2, 121.0, 41.0,   // population 1
      44.2, 120.2, 43.0, 121.0,   // population 2
      120.2, 41.2, 121.0, 41.0};  // population 3
  REQUIRE(costs.size() == expected.size());
  for (std::size_t i = 0; i < costs.size(); ++i)
    CHECK(costs[i] == doctest::Approx(expected[i]).epsilon(1e-13));
}

TEST_CASE("constant delays make costs independent of the flow") {
  const Game game =
      parallel_game({DelayFunction::constant(5), DelayFunction::constant(7)}, 2.0);
  const RouteSet routes = enumerate_routes(game);
  const auto c1 = route_costs(game, routes, RouteFlow{{2.0, 0.0}});
  const auto c2 = route_costs(game, routes, RouteFlow{{0.5, 1.5}});
  CHECK(c1 == c2);
}

TEST_CASE("link flow is linear in the route flow") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const RouteFlow a = dirichlet_profile(loaded.game, routes, rng);
    const RouteFlow b = dirichlet_profile(loaded.game, routes, rng);
    const double alpha = rng.uniform();
    RouteFlow mix;
    mix.z.resize(a.z.size());
    for (std::size_t i = 0; i < a.z.size(); ++i)
      mix.z[i] = alpha * a.z[i] + (1.0 - alpha) * b.z[i];
    const LinkFlow fa = link_flow(routes, a), fb = link_flow(routes, b);
    const LinkFlow fm = link_flow(routes, mix);
    for (std::size_t e = 0; e < fm.size(); ++e) {
      CHECK(fm[e] >= 0.0);
      CHECK(fm[e] == doctest::Approx(alpha * fa[e] + (1.0 - alpha) * fb[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("delays are monotone under component-wise larger link flows") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const LinkFlow f = link_flow(routes, dirichlet_profile(loaded.game, routes, rng));
    LinkFlow g = f;
    for (auto& ge : g) ge += rng.uniform();  // g >= f component-wise
    for (const auto& pop : loaded.game.populations) {
      for (std::size_t e = 0; e < f.size(); ++e)
        CHECK(pop.delays[e](g[e]) >= pop.delays[e](f[e]));
    }
  }
}

TEST_CASE("flow files round-trip the three equilibria") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  const RouteFlow eq1 = load_flow(examples_dir() + "/flows/konishi_eq1.json", loaded.game, routes);
  CHECK(l1_distance(eq1, konishi_eq1()) == 0.0);
  const RouteFlow eq3 = load_flow(examples_dir() + "/flows/konishi_eq3.json", loaded.game, routes);
  CHECK(l1_distance(eq3, konishi_eq3()) <= 1e-15);
}

TEST_CASE("admissibility tolerates 1e-12-scale round-off only") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  RouteFlow z = uniform_profile(loaded.game, routes);
  CHECK(is_admissible(loaded.game, routes, z));
  z.z[0] += 5e-13;  // inside 1e-12 * max(1, v_p)
  CHECK(is_admissible(loaded.game, routes, z));
  z.z[0] += 1e-8;
  CHECK_FALSE(is_admissible(loaded.game, routes, z));
  CHECK_THROWS_AS(require_admissible(loaded.game, routes, z), ValidationError);
}
