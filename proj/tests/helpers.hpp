#ifndef HETROUTE_TESTS_HELPERS_HPP
#define HETROUTE_TESTS_HELPERS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "hetroute/equilibria.hpp"
#include "hetroute/game_io.hpp"
#include "hetroute/rng.hpp"

namespace hetroute::test {

inline std::string examples_dir() { return HETROUTE_EXAMPLES_DIR; }

inline LoadedGame load_konishi() { return load_game(examples_dir() + "/konishi.json"); }

// Fig-1 equilibrium profiles in enumeration order (r1,r2,r3,r4) per
// population, exactly as transcribed in the flow files.
inline RouteFlow konishi_eq1() {
  return RouteFlow{{1.2, 0, 0, 0, /**/ 0, 0, 1, 0, /**/ 0, 0, 0, 1}};
}
inline RouteFlow konishi_eq2() {
  return RouteFlow{{0, 0, 0, 1.2, /**/ 1, 0, 0, 0, /**/ 0, 1, 0, 0}};
}
inline RouteFlow konishi_eq3() {
  const double a = 10.0 / 21.0, b = 11.0 / 21.0;
  return RouteFlow{{0.6, 0, 0, 0.6, /**/ a, 0, b, 0, /**/ 0, b, 0, a}};
}

// Single-population game on parallel links with the given delays.
inline Game parallel_game(const std::vector<DelayFunction>& delays, double v = 1.0) {
  Network net;
  net.nodes = {"o", "d"};
  for (std::size_t i = 0; i < delays.size(); ++i)
    net.links.push_back({"L" + std::to_string(i), "o", "d"});
  Population pop{"p", "o", "d", v, delays};
  Game game{net, {pop}};
  game.validate();
  return game;
}

// Random heterogeneous game: `corridors` parallel links o->d, `n_pops`
// populations with random affine delays and throughputs. Deterministic in
// the seed.
inline Game random_game(std::uint64_t seed, int n_pops = 2, int corridors = 3) {
  Rng rng(seed);
  Network net;
  net.nodes = {"o", "d"};
  for (int i = 0; i < corridors; ++i)
    net.links.push_back({"L" + std::to_string(i), "o", "d"});
  Game game;
  game.network = net;
  for (int p = 0; p < n_pops; ++p) {
    Population pop;
    pop.id = "p" + std::to_string(p);
    pop.origin = "o";
    pop.destination = "d";
    pop.throughput = 0.5 + 1.5 * rng.uniform();
    for (int e = 0; e < corridors; ++e)
      pop.delays.push_back(
          DelayFunction::affine(1.0 + 29.0 * rng.uniform(), 0.5 + 19.5 * rng.uniform()));
    game.populations.push_back(std::move(pop));
  }
  game.validate();
  return game;
}

// Independent scalar softmax oracle (long double, textbook formula with an
// explicit shift); used to cross-check logit_map.
inline std::vector<double> softmax_oracle(const std::vector<double>& costs, double eta,
                                          double v) {
  long double cmin = costs[0];
  for (double c : costs) cmin = std::min<long double>(cmin, c);
  long double sum = 0.0L;
  std::vector<long double> w(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-((long double)costs[i] - cmin) / (long double)eta);
    sum += w[i];
  }
  std::vector<double> out(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i)
    out[i] = static_cast<double>((long double)v * w[i] / sum);
  return out;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace hetroute::test

#endif
