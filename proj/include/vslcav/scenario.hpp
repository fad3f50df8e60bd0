#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vslcav/corridor.hpp"
#include "vslcav/feed.hpp"
#include "vslcav/gps2vsl.hpp"
#include "vslcav/setpoint.hpp"
#include "vslcav/vehicle.hpp"

namespace vslcav {

enum class VehicleKind { Scripted, Pilot, Cav };

const char* to_string(VehicleKind kind);

/// Interval in which the driver has taken over; the vehicle applies
/// `manual_accel` and the mux passes the measured speed through.
struct DisengagedWindow {
  double start = 0.0;
  double end = 0.0;
  double manual_accel = 0.0;
};

struct CavConfig {
  double user_set_point_mps = mph_to_mps(kMaxPostedMph);
  ControllerParams<double> controller;
  double ramp_up_rate = 1.5;
  double ramp_down_rate = 2.0;
  double lag_s = 0.4;
  RadarModel radar;
  Gps2VslConfig gps2vsl;
  std::vector<DisengagedWindow> disengaged;

  bool engaged_at(double t) const;
};

struct VehicleSpec {
  std::string name;
  VehicleKind kind = VehicleKind::Scripted;
  double initial_mile_marker = 0.0;
  double initial_speed = 0.0;
  double length_m = 4.6;
  LeadTrajectory profile;  // Scripted
  PilotDriverModel pilot;  // Pilot
  CavConfig cav;           // Cav
};

struct GpsConfig {
  double rate_hz = 1.0;
  double noise_m = 0.0;
};

/// Roadway interval for per-segment statistics, lo < hi (mile markers).
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Segment&) const = default;
};

struct Scenario {
  explicit Scenario(CorridorGeometry geometry) : corridor(std::move(geometry)) {}

  CorridorGeometry corridor;
  std::string name = "unnamed";
  std::string description;
  FeedConfig feed;
  FaultProfile fault;
  GpsConfig gps;
  std::vector<GantryUpdate> vsl_schedule;
  std::vector<VehicleSpec> vehicles;  // front (downstream) to back
  double duration_s = 60.0;
  double dt_s = 0.05;
  std::uint64_t seed = 0;
  double runtime_budget_s = 60.0;
  std::optional<double> stop_after_mile_marker;
  std::vector<Segment> segments;
  double max_lead_decel = 2.0;
};

struct Diagnostic {
  int line = 0;    // 1-based, 0 when unknown
  int column = 0;  // 1-based, 0 when unknown
  std::string field;
  std::string message;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string source, std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<Diagnostic> diagnostics_;
};

/// Parses and validates; throws ScenarioError listing every problem found.
Scenario parse_scenario(const std::string& text, const std::string& source_name = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Semantic checks on an assembled scenario; empty when valid.
std::vector<Diagnostic> validate_scenario(const Scenario& s);

/// `key=value` override (e.g. "controller.k_p=0.6", "dt=0.025"); CAV keys
/// apply to every CAV. Throws ConfigError on unknown keys or values that
/// break a parameter invariant.
void apply_override(Scenario& s, const std::string& assignment);

/// Existing file path, or the bundled scenario of that name.
std::string resolve_scenario_path(const std::string& name_or_path);
std::vector<std::string> bundled_scenarios();

}  // namespace vslcav
