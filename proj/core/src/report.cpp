#include "hetroute/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hetroute/errors.hpp"

namespace hetroute {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void JsonWriter::separate() {
  if (!stack_.empty() && has_item_.back() && !expecting_value_) out_ += ',';
  if (!stack_.empty() && !expecting_value_) has_item_.back() = true;
  expecting_value_ = false;
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ += '{';
  stack_.push_back('{');
  has_item_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  stack_.pop_back();
  has_item_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ += '[';
  stack_.push_back('[');
  has_item_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  stack_.pop_back();
  has_item_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
  separate();
  out_ += '"';
  out_ += json_escape(name);
  out_ += "\":";
  expecting_value_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separate();
  if (std::isfinite(v))
    out_ += fmt17(v);
  else
    out_ += "null";  // JSON has no inf/nan
  return *this;
}

JsonWriter& JsonWriter::value(long v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separate();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  separate();
  out_ += '"';
  out_ += json_escape(v);
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::null() {
  separate();
  out_ += "null";
  return *this;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Game& game, const RouteSet& routes,
                          const Trajectory& traj) {
  const bool agents = !traj.agents.empty();
  os << (agents ? "t,pop,route,flow,seed,N\n" : "t,pop,route,flow\n");
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (int p = 0; p < routes.n_populations(); ++p) {
      const auto& pop_id = game.populations[static_cast<std::size_t>(p)].id;
      for (int r = 0; r < routes.count(p); ++r) {
        os << fmt17(traj.times[k]) << ',' << pop_id << ',' << r << ','
           << fmt17(traj.states[k].z[static_cast<std::size_t>(routes.offset(p) + r)]);
        if (agents)
          os << ',' << traj.seed << ',' << traj.agents[static_cast<std::size_t>(p)];
        os << '\n';
      }
    }
  }
}

void write_aggregate_csv(std::ostream& os, const RouteSet& routes, const Trajectory& traj) {
  if (!routes.shared_across_populations())
    throw ValidationError("aggregate flow needs a route set shared by all populations");
  os << "t,route,flow\n";
  const int k_routes = routes.count(0);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (int r = 0; r < k_routes; ++r) {
      double w = 0.0;
      for (int p = 0; p < routes.n_populations(); ++p)
        w += traj.states[k].z[static_cast<std::size_t>(routes.offset(p) + r)];
      os << fmt17(traj.times[k]) << ',' << r << ',' << fmt17(w) << '\n';
    }
  }
}

std::string trajectory_meta_json(const Trajectory& traj) {
  JsonWriter w;
  w.begin_object();
  w.key("method").value(traj.method);
  w.key("step").value(traj.step);
  w.key("eta").value(traj.eta);
  w.key("states").value(static_cast<long>(traj.states.size()));
  w.key("t_final").value(traj.times.empty() ? 0.0 : traj.times.back());
  w.key("converged").value(traj.converged);
  w.key("final_residual").value(traj.final_residual);
  if (traj.seed >= 0) {
    w.key("seed").value(traj.seed);
    w.key("N").begin_array();
    for (long n : traj.agents) w.value(n);
    w.end_array();
  }
  w.end_object();
  return w.str() + "\n";
}

namespace {

void write_flow_by_population(JsonWriter& w, const Game& game, const RouteSet& routes,
                              const RouteFlow& z) {
  w.begin_object();
  for (int p = 0; p < routes.n_populations(); ++p) {
    w.key(game.populations[static_cast<std::size_t>(p)].id).begin_array();
    for (int r = 0; r < routes.count(p); ++r)
      w.value(z.z[static_cast<std::size_t>(routes.offset(p) + r)]);
    w.end_array();
  }
  w.end_object();
}

}  // namespace

std::string fixed_points_json(const Game& game, const RouteSet& routes,
                              const std::vector<FixedPointRecord>& records,
                              const std::vector<WardropReport>& wardrop) {
  JsonWriter w;
  w.begin_array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    w.begin_object();
    w.key("eta").value(rec.eta);
    w.key("z");
    write_flow_by_population(w, game, routes, rec.z);
    w.key("residual").value(rec.residual);
    w.key("eigenvalues").begin_array();
    for (const auto& ev : rec.eigenvalues) {
      w.begin_object();
      w.key("re").value(ev.real());
      w.key("im").value(ev.imag());
      w.end_object();
    }
    w.end_array();
    w.key("stability").value(stability_name(rec.stability));
    w.key("wardrop_gap").value(i < wardrop.size() ? wardrop[i].worst_gap : 0.0);
    w.end_object();
  }
  w.end_array();
  return w.str() + "\n";
}

std::string certificate_json(const Game& game, const RouteSet& routes,
                             const ContractionCertificate& cert) {
  JsonWriter w;
  w.begin_object();
  w.key("eta").value(cert.eta);
  w.key("margin_c").value(cert.margin);
  w.key("valid").value(cert.valid);
  w.key("sample_size").value(cert.sample_size);
  w.key("seed").value(static_cast<long>(cert.seed));
  w.key("worst_point");
  write_flow_by_population(w, game, routes, cert.worst_point);
  w.end_object();
  return w.str() + "\n";
}

std::string threshold_json(const ThresholdEstimate& est) {
  JsonWriter w;
  w.begin_object();
  w.key("eta_hat").value(est.eta_hat);
  w.key("sampled").value(est.sampled);
  w.key("one_sided").value(est.one_sided);
  w.key("valid_at_lo").value(est.valid_at_lo);
  w.key("valid_at_hi").value(est.valid_at_hi);
  w.key("bracket").begin_array().value(est.bracket_lo).value(est.bracket_hi).end_array();
  w.key("crossings").begin_array();
  for (double c : est.crossings) w.value(c);
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string events_json(const std::vector<BifurcationEvent>& events) {
  JsonWriter w;
  w.begin_array();
  for (const auto& ev : events) {
    w.begin_object();
    w.key("eta_lo").value(ev.eta_lo);
    w.key("eta_hi").value(ev.eta_hi);
    w.key("type").value(bifurcation_name(ev.type));
    w.key("branches").begin_array();
    for (int id : ev.branch_ids) w.value(id);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  return w.str() + "\n";
}

std::string branches_json(const Game& game, const RouteSet& routes,
                          const SweepResult& sweep) {
  JsonWriter w;
  w.begin_object();
  w.key("grid").begin_array();
  for (double eta : sweep.grid) w.value(eta);
  w.end_array();
  w.key("branches").begin_array();
  for (const auto& b : sweep.branches) {
    w.begin_object();
    w.key("id").value(b.id);
    w.key("origin").value(b.origin);
    w.key("eta_first").value(b.first_eta());
    w.key("eta_last").value(b.last_eta());
    w.key("points").value(static_cast<long>(b.points.size()));
    w.key("final_stability").value(stability_name(b.points.back().record.stability));
    if (b.termination.empty())
      w.key("terminated").null();
    else
      w.key("terminated").value(b.termination);
    w.key("final_z");
    write_flow_by_population(w, game, routes, b.points.back().record.z);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string limits_json(const Game& game, const RouteSet& routes,
                        const std::vector<LimitEquilibrium>& limits) {
  JsonWriter w;
  w.begin_array();
  for (const auto& lim : limits) {
    w.begin_object();
    w.key("branch").value(lim.branch_id);
    w.key("stability").value(stability_name(lim.stability));
    w.key("wardrop_gap").value(lim.wardrop.worst_gap);
    w.key("wardrop").value(lim.wardrop.is_equilibrium);
    w.key("unresolved").value(lim.unresolved);
    w.key("z");
    write_flow_by_population(w, game, routes, lim.z);
    w.end_object();
  }
  w.end_array();
  return w.str() + "\n";
}

void write_diagram_csv(std::ostream& os, const std::vector<DiagramRow>& rows,
                       const std::string& coord_name) {
  os << "eta,branch,stability,coord_name,value\n";
  for (const auto& row : rows) {
    os << fmt17(row.eta) << ',' << row.branch << ',' << stability_name(row.stability) << ','
       << coord_name << ',' << fmt17(row.value) << '\n';
  }
}

std::string wardrop_json(const Game& game, const RouteSet& routes,
                         const WardropReport& wardrop, const StrictReport& strict) {
  JsonWriter w;
  w.begin_object();
  w.key("wardrop").value(wardrop.is_equilibrium);
  w.key("worst_gap").value(wardrop.worst_gap);
  w.key("tolerance").value(wardrop.tolerance);
  if (wardrop.worst_population >= 0) {
    w.key("worst_population")
        .value(game.populations[static_cast<std::size_t>(wardrop.worst_population)].id);
    w.key("worst_route").value(wardrop.worst_route);
  }
  w.key("per_population").begin_array();
  for (std::size_t p = 0; p < wardrop.gap.size(); ++p) {
    w.begin_object();
    w.key("id").value(game.populations[p].id);
    w.key("min_cost").value(wardrop.min_cost[p]);
    w.key("gap").value(wardrop.gap[p]);
    w.key("strict_margin").value(strict.margins[p]);
    w.end_object();
  }
  w.end_array();
  w.key("strict").value(strict.is_strict);
  w.end_object();
  return w.str() + "\n";
}

std::string symmetry_json(const Game& game, const RouteSet& routes,
                          const SymmetryReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("symmetric").value(report.symmetric);
  w.key("worst_violation").value(report.worst_violation);
  if (report.worst_pop_p >= 0) {
    w.key("worst_pair").begin_object();
    w.key("population_p").value(game.populations[static_cast<std::size_t>(report.worst_pop_p)].id);
    w.key("population_q").value(game.populations[static_cast<std::size_t>(report.worst_pop_q)].id);
    w.key("route_i").value(report.worst_route_i);
    w.key("route_j").value(report.worst_route_j);
    w.end_object();
  }
  w.end_object();
  return w.str() + "\n";
}

std::string compare_json(const CompareReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("sup_distance").value(report.sup_distance);
  w.key("times").begin_array();
  for (double t : report.times) w.value(t);
  w.end_array();
  w.key("distances").begin_array();
  for (double d : report.distances) w.value(d);
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw NumericalError("failed writing '" + path + "'");
}

}  // namespace hetroute
