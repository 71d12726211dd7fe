#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "hetroute/report.hpp"
#include "helpers.hpp"

using namespace hetroute;
using namespace hetroute::test;

TEST_CASE("fmt17 renders doubles round-trip exactly") {
  Rng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = (rng.uniform() - 0.5) * std::exp(40.0 * (rng.uniform() - 0.5));
    const std::string s = fmt17(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(fmt17(0.5) == "0.5");
  CHECK(fmt17(0.1) == "0.10000000000000001");
  CHECK(fmt17(1e6) == "1000000");
}

TEST_CASE("the JSON writer emits deterministic, parseable documents") {
  JsonWriter w;
  w.begin_object();
  w.key("name").value("hello \"quoted\"\n");
  w.key("x").value(0.1);
  w.key("flag").value(true);
  w.key("items").begin_array().value(1).value(2.5).null().end_array();
  w.key("nested").begin_object().key("k").value(3L).end_object();
  w.end_object();
  CHECK(w.str() ==
        "{\"name\":\"hello \\\"quoted\\\"\\n\",\"x\":0.10000000000000001,"
        "\"flag\":true,\"items\":[1,2.5,null],\"nested\":{\"k\":3}}");
  // non-finite doubles degrade to null instead of breaking the document
  JsonWriter w2;
  w2.begin_array();
  w2.value(std::numeric_limits<double>::infinity());
  w2.end_array();
  CHECK(w2.str() == "[null]");
}

TEST_CASE("trajectory CSV uses the documented schema") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  Trajectory traj;
  traj.eta = 0.5;
  traj.times = {0.0, 0.5};
  traj.states = {uniform_profile(loaded.game, routes), konishi_eq1()};

  std::ostringstream os;
  write_trajectory_csv(os, loaded.game, routes, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,pop,route,flow");
  std::getline(is, line);
  CHECK(line == "0,p1,0,0.29999999999999999");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2 * 12);

  // agent provenance adds seed and N columns
  traj.seed = 9;
  traj.agents = {10, 10, 10};
  std::ostringstream os2;
  write_trajectory_csv(os2, loaded.game, routes, traj);
  std::istringstream is2(os2.str());
  std::getline(is2, line);
  CHECK(line == "t,pop,route,flow,seed,N");
}

TEST_CASE("aggregate CSV sums populations per route") {
  const LoadedGame loaded = load_konishi();
  const RouteSet routes = enumerate_routes(loaded.game);
  Trajectory traj;
  traj.times = {0.0};
  traj.states = {uniform_profile(loaded.game, routes)};
  std::ostringstream os;
  write_aggregate_csv(os, routes, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,route,flow");
  std::getline(is, line);
  CHECK(line == "0,0,0.80000000000000004");  // (1.2 + 1 + 1)/4
}

TEST_CASE("diagram CSV header and row format") {
  std::vector<DiagramRow> rows{{0.5, 1, StabilityClass::Stable, 1.25}};
  std::ostringstream os;
  write_diagram_csv(os, rows, "f:e1");
  CHECK(os.str() == "eta,branch,stability,coord_name,value\n0.5,1,stable,f:e1,1.25\n");
}
