#include "hetroute/game_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetroute/errors.hpp"

namespace hetroute {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
  throw ParseError(origin + ": " + where + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& origin,
                   const std::string& where) {
  if (!obj.is_object()) fail(origin, where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(origin, where, "missing key '" + key + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_string()) fail(origin, where, "expected a string");
  return v.get<std::string>();
}

double as_number(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_number()) fail(origin, where, "expected a number");
  return v.get<double>();
}

DelayFunction parse_delay(const json& v, const std::string& origin, const std::string& where) {
  const std::string type = as_string(member(v, "type", origin, where), origin, where + ".type");
  const json& params = member(v, "params", origin, where);
  if (!params.is_array()) fail(origin, where + ".params", "expected an array of numbers");
  std::vector<double> p;
  for (std::size_t i = 0; i < params.size(); ++i)
    p.push_back(as_number(params[i], origin, where + ".params[" + std::to_string(i) + "]"));
  try {
    if (type == "constant") {
      if (p.size() != 1) fail(origin, where, "constant delay takes 1 parameter");
      return DelayFunction::constant(p[0]);
    }
    if (type == "affine") {
      if (p.size() != 2) fail(origin, where, "affine delay takes 2 parameters (a, b)");
      return DelayFunction::affine(p[0], p[1]);
    }
    if (type == "linear") {
      if (p.size() != 1) fail(origin, where, "linear delay takes 1 parameter (slope)");
      return DelayFunction::linear(p[0]);
    }
    if (type == "poly") return DelayFunction::poly(std::move(p));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  fail(origin, where + ".type", "unknown delay type '" + type + "'");
}

std::vector<DelayFunction> parse_delay_map(const json& map, const Network& net,
                                           const std::string& origin, const std::string& where) {
  if (!map.is_object()) fail(origin, where, "expected an object keyed by link id");
  std::vector<DelayFunction> delays(net.links.size());
  std::vector<bool> seen(net.links.size(), false);
  for (auto it = map.begin(); it != map.end(); ++it) {
    const int e = net.link_index(it.key());
    if (e < 0)
      throw ValidationError(where + ": delay for unknown link '" + it.key() + "'");
    delays[static_cast<std::size_t>(e)] = parse_delay(it.value(), origin, where + "." + it.key());
    seen[static_cast<std::size_t>(e)] = true;
  }
  for (std::size_t e = 0; e < seen.size(); ++e) {
    if (!seen[e])
      throw ValidationError(where + ": no delay for link '" + net.links[e].id + "'");
  }
  return delays;
}

LoadedGame parse_document(const json& doc, const std::string& origin) {
  LoadedGame out;
  Network net;

  const json& nodes = member(doc, "nodes", origin, "$");
  if (!nodes.is_array()) fail(origin, "$.nodes", "expected an array of strings");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    net.nodes.push_back(as_string(nodes[i], origin, "$.nodes[" + std::to_string(i) + "]"));

  const json& links = member(doc, "links", origin, "$");
  if (!links.is_array()) fail(origin, "$.links", "expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string where = "$.links[" + std::to_string(i) + "]";
    const json& l = links[i];
    net.links.push_back({as_string(member(l, "id", origin, where), origin, where + ".id"),
                         as_string(member(l, "tail", origin, where), origin, where + ".tail"),
                         as_string(member(l, "head", origin, where), origin, where + ".head")});
  }

  const bool toll_mode =
      doc.contains("mode") && as_string(doc["mode"], origin, "$.mode") == "toll";

  const json& pops = member(doc, "populations", origin, "$");
  if (!pops.is_array()) fail(origin, "$.populations", "expected an array");
  std::vector<Population> populations;
  for (std::size_t i = 0; i < pops.size(); ++i) {
    const std::string where = "$.populations[" + std::to_string(i) + "]";
    const json& p = pops[i];
    Population pop;
    pop.id = as_string(member(p, "id", origin, where), origin, where + ".id");
    pop.origin = as_string(member(p, "origin", origin, where), origin, where + ".origin");
    pop.destination =
        as_string(member(p, "destination", origin, where), origin, where + ".destination");
    pop.throughput =
        as_number(member(p, "throughput", origin, where), origin, where + ".throughput");
    if (!toll_mode)
      pop.delays = parse_delay_map(member(p, "delays", origin, where), net, origin,
                                   where + ".delays");
    populations.push_back(std::move(pop));
  }

  if (toll_mode) {
    TollGameSpec spec;
    spec.base_delays =
        parse_delay_map(member(doc, "base_delays", origin, "$"), net, origin, "$.base_delays");
    spec.tolls.assign(net.links.size(), 0.0);
    const json& tolls = member(doc, "tolls", origin, "$");
    if (!tolls.is_object()) fail(origin, "$.tolls", "expected an object keyed by link id");
    for (auto it = tolls.begin(); it != tolls.end(); ++it) {
      const int e = net.link_index(it.key());
      if (e < 0) throw ValidationError("$.tolls: toll on unknown link '" + it.key() + "'");
      spec.tolls[static_cast<std::size_t>(e)] =
          as_number(it.value(), origin, "$.tolls." + it.key());
    }
    const json& sens = member(doc, "sensitivities", origin, "$");
    if (!sens.is_object()) fail(origin, "$.sensitivities", "expected an object keyed by population id");
    spec.sensitivities.assign(populations.size(), 0.0);
    std::vector<bool> seen(populations.size(), false);
    for (auto it = sens.begin(); it != sens.end(); ++it) {
      int idx = -1;
      for (std::size_t p = 0; p < populations.size(); ++p)
        if (populations[p].id == it.key()) idx = static_cast<int>(p);
      if (idx < 0)
        throw ValidationError("$.sensitivities: unknown population '" + it.key() + "'");
      spec.sensitivities[static_cast<std::size_t>(idx)] =
          as_number(it.value(), origin, "$.sensitivities." + it.key());
      seen[static_cast<std::size_t>(idx)] = true;
    }
    for (std::size_t p = 0; p < seen.size(); ++p) {
      if (!seen[p])
        throw ValidationError("$.sensitivities: no sensitivity for population '" +
                              populations[p].id + "'");
    }
    out.game = expand_toll_game(net, std::move(populations), spec);
    out.toll = std::move(spec);
  } else {
    out.game = Game{std::move(net), std::move(populations)};
    out.game.validate();
  }
  return out;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // recover a line number from the byte offset for the error message
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
      if (text[i] == '\n') ++line;
    throw ParseError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

LoadedGame parse_game(const std::string& text, const std::string& origin) {
  return parse_document(parse_json_text(text, origin), origin);
}

LoadedGame load_game(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_game(buffer.str(), path);
}

RouteFlow load_flow(const std::string& path, const Game& game, const RouteSet& routes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const json doc = parse_json_text(buffer.str(), path);
  if (!doc.is_object()) throw ParseError(path + ": expected an object keyed by population id");

  RouteFlow z;
  z.z.assign(static_cast<std::size_t>(routes.total()), 0.0);
  std::vector<bool> seen(game.populations.size(), false);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    int p = -1;
    for (std::size_t i = 0; i < game.populations.size(); ++i)
      if (game.populations[i].id == it.key()) p = static_cast<int>(i);
    if (p < 0) throw ValidationError(path + ": unknown population '" + it.key() + "'");
    seen[static_cast<std::size_t>(p)] = true;
    if (!it.value().is_object())
      throw ParseError(path + ": population '" + it.key() + "' must map route index to flow");
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      int r = -1;
      try {
        r = std::stoi(jt.key());
      } catch (...) {
        throw ParseError(path + ": route index '" + jt.key() + "' is not an integer");
      }
      if (r < 0 || r >= routes.count(p))
        throw ValidationError(path + ": population '" + it.key() + "' has no route index " +
                              jt.key() + " (" + std::to_string(routes.count(p)) + " routes)");
      z.z[static_cast<std::size_t>(routes.offset(p) + r)] =
          as_number(jt.value(), path, "$." + it.key() + "." + jt.key());
    }
  }
  for (std::size_t p = 0; p < seen.size(); ++p) {
    if (!seen[p] && game.populations[p].throughput > 0.0)
      throw ValidationError(path + ": no flows for population '" + game.populations[p].id + "'");
  }
  require_admissible(game, routes, z);
  return z;
}

}  // namespace hetroute
