#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vslcav/metrics.hpp"

namespace vslcav {

struct VehicleReport {
  std::string name;
  VehicleKind kind = VehicleKind::Scripted;
  std::vector<SegmentStats> segments;
  std::vector<RiseFallEvent> events;
};

/// Everything `run` writes to run_summary.json and `report` reads back.
struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t ticks = 0;
  bool collision = false;
  std::optional<double> min_spacing_m;
  std::vector<Segment> segments;
  std::vector<VehicleReport> vehicles;
};

/// Segment statistics for every vehicle that covers all segments (others get
/// none) and rise/fall events for every CAV.
RunSummary summarize_run(const SimulationTrace& trace, const std::vector<Segment>& segments);

std::string summary_to_json(const RunSummary& summary);
/// Throws MetricsError on malformed input.
RunSummary summary_from_json(const std::string& text);

/// Vehicle reported in a column: the first CAV if any, else the first pilot,
/// else the first vehicle.
const VehicleReport* primary_vehicle(const RunSummary& summary);

struct ComparisonRow {
  Segment segment;
  std::optional<SegmentStats> pilot;
  std::optional<SegmentStats> ego;
  std::optional<double> std_reduction_pct;
  std::optional<double> cv_reduction_pct;
};

/// Pairs pilot and ego segment statistics. Either side may be missing; a
/// segment list mismatch throws MetricsError.
std::vector<ComparisonRow> compare(const VehicleReport* pilot, const VehicleReport* ego);

/// Table layout "mm | Pilot (NMSE/Mean) | Ego (NMSE/Mean)" plus reductions.
std::string render_comparison(const std::vector<ComparisonRow>& rows);
/// Event table with count/min/max/mean per kind.
std::string render_events(const std::vector<RiseFallEvent>& events);

/// Plot-ready columns: mile marker and speed for every vehicle.
void write_speed_profile_csv(const SimulationTrace& trace, std::ostream& out);
/// Time series of the CAV's setpoint chain and controller state.
void write_controller_state_csv(const SimulationTrace& trace, std::ostream& out);
/// Matplotlib script reading the two files above.
std::string plot_script();

}  // namespace vslcav
