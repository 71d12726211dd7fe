#include "hetroute/game.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "hetroute/errors.hpp"

namespace hetroute {

int Network::link_index(std::string_view id) const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

bool Network::has_node(std::string_view id) const {
  return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

double Game::total_throughput() const {
  double v = 0.0;
  for (const auto& p : populations) v += p.throughput;
  return v;
}

namespace {

bool reachable(const Network& net, const std::string& from, const std::string& to) {
  std::set<std::string> seen{from};
  std::queue<std::string> frontier;
  frontier.push(from);
  while (!frontier.empty()) {
    std::string node = frontier.front();
    frontier.pop();
    if (node == to) return true;
    for (const auto& link : net.links) {
      if (link.tail == node && seen.insert(link.head).second) frontier.push(link.head);
    }
  }
  return false;
}

}  // namespace

void Game::validate() const {
  if (network.nodes.empty()) throw ValidationError("network has no nodes");
  if (network.links.empty()) throw ValidationError("network has no links");
  {
    std::set<std::string> ids(network.nodes.begin(), network.nodes.end());
    if (ids.size() != network.nodes.size())
      throw ValidationError("duplicate node identifier");
  }
  std::set<std::string> link_ids;
  for (const auto& link : network.links) {
    if (!link_ids.insert(link.id).second)
      throw ValidationError("duplicate link id '" + link.id + "'");
    if (!network.has_node(link.tail))
      throw ValidationError("link '" + link.id + "' references unknown tail node '" + link.tail + "'");
    if (!network.has_node(link.head))
      throw ValidationError("link '" + link.id + "' references unknown head node '" + link.head + "'");
  }
  if (populations.empty()) throw ValidationError("game has no populations");
  std::set<std::string> pop_ids;
  for (const auto& pop : populations) {
    if (!pop_ids.insert(pop.id).second)
      throw ValidationError("duplicate population id '" + pop.id + "'");
    if (!network.has_node(pop.origin))
      throw ValidationError("population '" + pop.id + "' has unknown origin '" + pop.origin + "'");
    if (!network.has_node(pop.destination))
      throw ValidationError("population '" + pop.id + "' has unknown destination '" + pop.destination + "'");
    if (!(pop.throughput >= 0.0) || !std::isfinite(pop.throughput))
      throw ValidationError("population '" + pop.id + "' has negative or non-finite throughput");
    if (pop.delays.size() != network.links.size())
      throw ValidationError("population '" + pop.id + "' delay map does not cover every link");
    if (!reachable(network, pop.origin, pop.destination))
      throw ValidationError("population '" + pop.id + "' destination '" + pop.destination +
                            "' is unreachable from origin '" + pop.origin + "'");
  }
}

Game expand_toll_game(const Network& network, std::vector<Population> populations,
                      const TollGameSpec& spec) {
  if (spec.base_delays.size() != network.links.size())
    throw ValidationError("toll spec base_delays does not cover every link");
  if (spec.tolls.size() != network.links.size())
    throw ValidationError("toll spec tolls does not cover every link");
  if (spec.sensitivities.size() != populations.size())
    throw ValidationError("toll spec sensitivities does not cover every population");
  for (double w : spec.tolls)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("toll is negative or non-finite");
  for (double a : spec.sensitivities)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw ValidationError("toll sensitivity is negative or non-finite");

  for (std::size_t p = 0; p < populations.size(); ++p) {
    auto& pop = populations[p];
    pop.delays.clear();
    pop.delays.reserve(network.links.size());
    for (std::size_t e = 0; e < network.links.size(); ++e) {
      pop.delays.push_back(
          spec.base_delays[e].plus_constant(spec.sensitivities[p] * spec.tolls[e]));
    }
  }
  Game game{network, std::move(populations)};
  game.validate();
  return game;
}

std::optional<TollGameSpec> derive_toll_spec(const Game& game) {
  const auto& first = game.populations.front().delays;
  for (const auto& pop : game.populations) {
    if (pop.delays != first) return std::nullopt;
  }
  TollGameSpec spec;
  spec.base_delays = first;
  spec.tolls.assign(game.network.links.size(), 0.0);
  spec.sensitivities.assign(game.populations.size(), 0.0);
  return spec;
}

}  // namespace hetroute
