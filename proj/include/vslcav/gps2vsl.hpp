#pragma once

#include <memory>
#include <optional>
#include <string>

#include "vslcav/corridor.hpp"
#include "vslcav/feed.hpp"

namespace vslcav {

enum class Gps2VslMode { Idle, Active };

const char* to_string(Gps2VslMode mode);

struct Gps2VslConfig {
  double threshold_mi = 0.15;
  double lookup_period_s = 5.0;
  double max_staleness_s = 60.0;
};

/// Gantry identification and posted-speed lookup state.
///
/// Idle: no relevant gantry and no setpoint. Active: a relevant gantry g_r is
/// latched at its approach threshold and held until the next threshold is
/// crossed or the vehicle leaves the corridor.
struct Gps2VslState {
  Gps2VslMode mode = Gps2VslMode::Idle;
  std::optional<std::string> relevant_gantry;
  std::optional<double> posted_speed_mps;  // v_gr
  std::optional<double> last_lookup_at;

  std::optional<double> last_fix_time;
  std::optional<double> last_mile_marker;  // previous valid in-corridor fix
  bool gantry_changed = false;             // event trigger for the next lookup

  std::shared_ptr<const VslSnapshot> held;  // freshest snapshot received
  bool last_fetch_failed = false;
  std::uint64_t lookups = 0;

  /// Age of the held snapshot; empty if none has arrived.
  std::optional<double> staleness(double now) const;
  /// Active with a v_gr backed by a snapshot younger than max_staleness_s.
  bool vsl_valid(double now, const Gps2VslConfig& config) const;
};

struct GantryStep {
  Gps2VslState state;
  std::optional<std::string> relevant_gantry;
  bool changed = false;
  bool skipped = false;  // invalid fix ignored
};

/// One fix through the Idle/Active set-and-hold machine.
///
/// A threshold is crossed when (distance to gantry - threshold) changes sign
/// between consecutive fixes, or the first eligible fix already sits inside
/// the threshold zone. While Active, g_r only advances downstream.
GantryStep step_gantry_id(Gps2VslState state, const GpsFix& fix, const CorridorGeometry& geom,
                          const Gps2VslConfig& config = {});

struct LookupStep {
  Gps2VslState state;
  std::optional<double> posted_speed_mps;
  bool lookup_issued = false;
};

/// Issues a lookup when g_r changed or the lookup period elapsed, and folds
/// any arrived fetch results into the state. Never blocks: v_gr always comes
/// from the freshest snapshot received so far. Idle states pass through.
LookupStep lookup_posted_speed(Gps2VslState state, SnapshotSource& source, double now,
                               const Gps2VslConfig& config = {});

}  // namespace vslcav
