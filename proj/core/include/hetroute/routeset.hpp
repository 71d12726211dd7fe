#ifndef HETROUTE_ROUTESET_HPP
#define HETROUTE_ROUTESET_HPP

#include <string>
#include <vector>

#include "hetroute/game.hpp"

namespace hetroute {

/// Complete simple-path route sets per population, in deterministic
/// lexicographic order of the link-id sequences, plus 0/1 link-route
/// incidence. All flat vectors over routes use the layout offset(p)+r.
class RouteSet {
 public:
  RouteSet() = default;
  RouteSet(const Game& game, std::vector<std::vector<std::vector<int>>> routes);

  int n_populations() const { return static_cast<int>(routes_.size()); }
  int count(int pop) const { return static_cast<int>(routes_[pop].size()); }
  int offset(int pop) const { return offsets_[pop]; }
  int total() const { return total_; }
  int n_links() const { return n_links_; }

  /// Link indices along route r of population pop.
  const std::vector<int>& route(int pop, int r) const { return routes_[pop][r]; }
  const std::vector<std::vector<int>>& routes(int pop) const { return routes_[pop]; }

  /// Incidence A^p_{er}: 1 iff link e lies on route r of population pop.
  bool on_route(int pop, int r, int link) const {
    return incidence_[pop][r][link] != 0;
  }

  /// Human-readable route label "e1,e2" used by reports.
  std::string label(const Game& game, int pop, int r) const;

  /// True when every population has an identical list of link sequences
  /// (aggregate route flow w = sum_p z^p is then meaningful).
  bool shared_across_populations() const;

 private:
  std::vector<std::vector<std::vector<int>>> routes_;  // [pop][r] -> links
  std::vector<std::vector<std::vector<unsigned char>>> incidence_;
  std::vector<int> offsets_;
  int total_ = 0;
  int n_links_ = 0;
};

/// Enumerates all simple origin-destination paths of every population by
/// depth-first search, sorted lexicographically by link-id sequence.
/// Throws ValidationError when a population exceeds `cap` routes.
RouteSet enumerate_routes(const Game& game, int cap = 10000);

}  // namespace hetroute

#endif
