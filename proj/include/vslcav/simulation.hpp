#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vslcav/scenario.hpp"

namespace vslcav {

/// Controller and gps2vsl internals logged for a CAV at one tick.
struct CavSample {
  Gps2VslMode mode = Gps2VslMode::Idle;
  std::optional<std::string> relevant_gantry;
  std::optional<double> v_gr;
  bool vsl_valid = false;
  bool engaged = true;
  double user_set_point = 0.0;
  SetpointSource source = SetpointSource::User;
  double selected = 0.0;  // mux output
  double setpoint = 0.0;  // ramp output
  RadarReading<double> radar;
  double u_nom = 0.0;
  std::optional<double> u_safe;
  ActiveController active = ActiveController::Nominal;
  std::optional<double> staleness;
};

/// State at the start of a tick and the command applied during it.
struct Sample {
  double t = 0.0;
  double position = 0.0;
  double mile_marker = 0.0;
  double v = 0.0;
  double a = 0.0;
  double u_cmd = 0.0;
  std::optional<CavSample> cav;
};

struct VehicleTrace {
  std::string name;
  VehicleKind kind = VehicleKind::Scripted;
  double length_m = 4.6;
  std::vector<Sample> samples;
};

struct TraceEvent {
  double t = 0.0;
  std::string vehicle;  // empty for feed-side events
  std::string kind;
  std::string detail;
};

struct SimulationTrace {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.05;
  std::vector<VehicleTrace> vehicles;  // scenario order, front to back
  std::vector<TraceEvent> events;
  std::optional<double> min_spacing_m;  // smallest bumper gap between neighbours
  bool collision = false;
  double wall_time_s = 0.0;

  const VehicleTrace* find(const std::string& name) const;
  std::size_t ticks() const { return vehicles.empty() ? 0 : vehicles.front().samples.size(); }
};

enum class Transport { InProcess, Socket };

const char* to_string(Transport transport);

struct RunOptions {
  Transport transport = Transport::InProcess;
};

/// Raised when the integration produces a non-finite state.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-step closed-loop run. Deterministic for a given scenario and seed in
/// in-process mode.
SimulationTrace run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Long-format tick trace, one row per (tick, vehicle).
void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
SimulationTrace read_trace_csv(std::istream& in);
void write_events_csv(const SimulationTrace& trace, std::ostream& out);

}  // namespace vslcav
