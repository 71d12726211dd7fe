#ifndef HETROUTE_REPORT_HPP
#define HETROUTE_REPORT_HPP

#include <ostream>
#include <string>
#include <vector>

#include "hetroute/continuation.hpp"
#include "hetroute/equilibria.hpp"
#include "hetroute/meanfield.hpp"
#include "hetroute/potential.hpp"

namespace hetroute {

/// Doubles rendered with 17 significant digits: round-trip exact and
/// byte-stable across runs.
std::string fmt17(double x);

/// Minimal deterministic JSON writer. Keys keep insertion order; numbers
/// go through fmt17. nlohmann/json stays on the parsing side only, so the
/// emitted bytes are fully under our control.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(long v);
  JsonWriter& value(int v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);
  JsonWriter& null();
  std::string str() const { return out_; }

 private:
  void separate();
  std::string out_;
  std::vector<char> stack_;     // '{' or '['
  std::vector<bool> has_item_;
  bool expecting_value_ = false;
};

std::string json_escape(const std::string& s);

// trajectory exports -------------------------------------------------------

/// CSV `t,pop,route,flow`; agent trajectories gain `seed,N` columns.
void write_trajectory_csv(std::ostream& os, const Game& game, const RouteSet& routes,
                          const Trajectory& traj);

/// CSV `t,route,flow` of the aggregate w = sum_p z^p (requires a shared
/// route set).
void write_aggregate_csv(std::ostream& os, const RouteSet& routes,
                         const Trajectory& traj);

/// Integrator metadata sidecar.
std::string trajectory_meta_json(const Trajectory& traj);

// analysis exports ----------------------------------------------------------

std::string fixed_points_json(const Game& game, const RouteSet& routes,
                              const std::vector<FixedPointRecord>& records,
                              const std::vector<WardropReport>& wardrop);

std::string certificate_json(const Game& game, const RouteSet& routes,
                             const ContractionCertificate& cert);

std::string threshold_json(const ThresholdEstimate& est);

std::string events_json(const std::vector<BifurcationEvent>& events);

std::string branches_json(const Game& game, const RouteSet& routes,
                          const SweepResult& sweep);

std::string limits_json(const Game& game, const RouteSet& routes,
                        const std::vector<LimitEquilibrium>& limits);

void write_diagram_csv(std::ostream& os, const std::vector<DiagramRow>& rows,
                       const std::string& coord_name);

std::string wardrop_json(const Game& game, const RouteSet& routes,
                         const WardropReport& wardrop, const StrictReport& strict);

std::string symmetry_json(const Game& game, const RouteSet& routes,
                          const SymmetryReport& report);

std::string compare_json(const CompareReport& report);

/// Atomically-ish writes a file (throws NumericalError on I/O failure).
void write_file(const std::string& path, const std::string& content);

}  // namespace hetroute

#endif
