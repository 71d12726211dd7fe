#ifndef HETROUTE_GAME_HPP
#define HETROUTE_GAME_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetroute/delay.hpp"

namespace hetroute {

/// Directed link of the multigraph. Parallel links (same tail/head) are
/// permitted; ids are unique.
struct Link {
  std::string id;
  std::string tail;
  std::string head;
};

/// Directed multigraph.
struct Network {
  std::vector<std::string> nodes;
  std::vector<Link> links;

  /// Index of a link id, or -1.
  int link_index(std::string_view id) const;
  bool has_node(std::string_view id) const;
  int n_links() const { return static_cast<int>(links.size()); }
};

/// One user population: an origin-destination pair, a throughput, and a
/// delay function per link of the network (indexed like Network::links).
struct Population {
  std::string id;
  std::string origin;
  std::string destination;
  double throughput = 0.0;
  std::vector<DelayFunction> delays;
};

struct Game {
  Network network;
  std::vector<Population> populations;

  int n_populations() const { return static_cast<int>(populations.size()); }
  double total_throughput() const;

  /// Checks all structural invariants; throws ValidationError naming the
  /// first violated one. Reachability of each destination is included.
  void validate() const;
};

/// Toll-sensitivity structure: population-independent base delays, constant
/// per-link tolls and per-population money/time trade-offs. Expands to a
/// Game with composed delays tau_e + alpha_p * omega_e.
struct TollGameSpec {
  std::vector<DelayFunction> base_delays;  // per link
  std::vector<double> tolls;               // per link, >= 0
  std::vector<double> sensitivities;       // per population, >= 0
};

/// Builds the expanded Game for a toll spec. `populations` carry id/OD/
/// throughput; their delay vectors are overwritten.
Game expand_toll_game(const Network& network,
                      std::vector<Population> populations,
                      const TollGameSpec& spec);

/// Recovers a zero-toll spec when every population has identical delays
/// (homogeneous games, or populations differing only in the OD pair).
std::optional<TollGameSpec> derive_toll_spec(const Game& game);

}  // namespace hetroute

#endif
