#ifndef HETROUTE_GAME_IO_HPP
#define HETROUTE_GAME_IO_HPP

#include <optional>
#include <string>

#include "hetroute/flow.hpp"
#include "hetroute/game.hpp"

namespace hetroute {

/// A game loaded from disk. Toll-mode files keep their TollGameSpec next
/// to the expanded Game so potential-game analyses can use the split form.
struct LoadedGame {
  Game game;
  std::optional<TollGameSpec> toll;
};

/// Loads and validates a UTF-8 JSON game file.
///
/// Standard schema: {nodes, links:[{id,tail,head}], populations:[{id,
/// origin, destination, throughput, delays:{link: {type, params}}}]}.
/// Toll schema adds "mode":"toll" with base_delays, tolls, sensitivities
/// instead of per-population delays.
///
/// Throws ParseError (malformed JSON / missing fields, with context) or
/// ValidationError (violated model invariant).
LoadedGame load_game(const std::string& path);

/// Parses a game from an in-memory JSON document (same schema/errors).
LoadedGame parse_game(const std::string& text, const std::string& origin = "<memory>");

/// Loads a flow file {pop id: {route index: flow}} against the route
/// enumeration order; missing routes are zero. Validates admissibility.
RouteFlow load_flow(const std::string& path, const Game& game, const RouteSet& routes);

}  // namespace hetroute

#endif
