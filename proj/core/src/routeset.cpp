#include "hetroute/routeset.hpp"

#include <algorithm>
#include <set>

#include "hetroute/errors.hpp"

namespace hetroute {

RouteSet::RouteSet(const Game& game, std::vector<std::vector<std::vector<int>>> routes)
    : routes_(std::move(routes)), n_links_(game.network.n_links()) {
  offsets_.resize(routes_.size() + 1, 0);
  incidence_.resize(routes_.size());
  for (std::size_t p = 0; p < routes_.size(); ++p) {
    offsets_[p] = total_;
    total_ += static_cast<int>(routes_[p].size());
    incidence_[p].resize(routes_[p].size());
    for (std::size_t r = 0; r < routes_[p].size(); ++r) {
      incidence_[p][r].assign(static_cast<std::size_t>(n_links_), 0);
      for (int e : routes_[p][r]) incidence_[p][r][static_cast<std::size_t>(e)] = 1;
    }
  }
  offsets_[routes_.size()] = total_;
}

std::string RouteSet::label(const Game& game, int pop, int r) const {
  std::string out;
  for (int e : routes_[pop][r]) {
    if (!out.empty()) out += ',';
    out += game.network.links[static_cast<std::size_t>(e)].id;
  }
  return out;
}

bool RouteSet::shared_across_populations() const {
  for (std::size_t p = 1; p < routes_.size(); ++p) {
    if (routes_[p] != routes_[0]) return false;
  }
  return true;
}

namespace {

// DFS over simple paths; neighbours visited in link order, final sort by
// link-id sequence pins the deterministic route order.
void extend(const Network& net, const std::string& node, const std::string& dest,
            std::set<std::string>& visited, std::vector<int>& stack,
            std::vector<std::vector<int>>& out, int cap, const std::string& pop_id) {
  if (node == dest) {
    out.push_back(stack);
    if (static_cast<int>(out.size()) > cap)
      throw ValidationError("population '" + pop_id + "' exceeds the route cap of " +
                            std::to_string(cap) + " simple paths");
    return;
  }
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    const Link& link = net.links[e];
    if (link.tail != node || visited.count(link.head)) continue;
    visited.insert(link.head);
    stack.push_back(static_cast<int>(e));
    extend(net, link.head, dest, visited, stack, out, cap, pop_id);
    stack.pop_back();
    visited.erase(link.head);
  }
}

}  // namespace

RouteSet enumerate_routes(const Game& game, int cap) {
  game.validate();
  std::vector<std::vector<std::vector<int>>> all;
  all.reserve(game.populations.size());
  for (const auto& pop : game.populations) {
    std::vector<std::vector<int>> found;
    std::set<std::string> visited{pop.origin};
    std::vector<int> stack;
    extend(game.network, pop.origin, pop.destination, visited, stack, found, cap, pop.id);
    if (found.empty())
      throw ValidationError("population '" + pop.id + "' has no route");
    std::sort(found.begin(), found.end(), [&](const auto& a, const auto& b) {
      auto ida = [&](int e) -> const std::string& { return game.network.links[e].id; };
      return std::lexicographical_compare(
          a.begin(), a.end(), b.begin(), b.end(),
          [&](int x, int y) { return ida(x) < ida(y); });
    });
    all.push_back(std::move(found));
  }
  return RouteSet(game, std::move(all));
}

}  // namespace hetroute
