#include "vslcav/gps2vsl.hpp"

#include <cmath>

namespace vslcav {
namespace {

constexpr double kEps = 1e-9;

bool fix_is_valid(const GpsFix& fix, const Gps2VslState& state) {
  if (!std::isfinite(fix.lat) || !std::isfinite(fix.lon) || !std::isfinite(fix.heading_deg) ||
      !std::isfinite(fix.timestamp))
    return false;
  if (fix.heading_deg < 0.0 || fix.heading_deg >= 360.0) return false;
  if (state.last_fix_time && fix.timestamp < *state.last_fix_time) return false;
  return true;
}

// Most downstream gantry whose approach threshold is at or behind `mm`.
const Gantry* threshold_reached(const CorridorGeometry& geom, double mm, double threshold) {
  const Gantry* found = nullptr;
  for (const auto& g : geom.gantries()) {
    if (g.mile_marker >= mm - threshold - kEps) found = &g;
  }
  return found;
}

void resolve(Gps2VslState& s) {
  if (!s.relevant_gantry || !s.held) return;
  if (const VslRow* row = s.held->find(*s.relevant_gantry))
    s.posted_speed_mps = mph_to_mps(row->posted_speed_mph);
}

void fold(Gps2VslState& s, const std::vector<FetchResult>& results) {
  for (const auto& r : results) {
    if (r.ok()) {
      if (!s.held || r.snapshot->generated_at >= s.held->generated_at) s.held = r.snapshot;
      s.last_fetch_failed = false;
    } else {
      s.last_fetch_failed = true;
    }
    if (s.mode == Gps2VslMode::Active) resolve(s);
  }
}

void go_idle(Gps2VslState& s) {
  s.mode = Gps2VslMode::Idle;
  s.relevant_gantry.reset();
  s.posted_speed_mps.reset();
  s.gantry_changed = false;
}

}  // namespace

const char* to_string(Gps2VslMode mode) { return mode == Gps2VslMode::Active ? "Active" : "Idle"; }

std::optional<double> Gps2VslState::staleness(double now) const {
  if (!held) return std::nullopt;
  return now - held->generated_at;
}

bool Gps2VslState::vsl_valid(double now, const Gps2VslConfig& config) const {
  if (mode != Gps2VslMode::Active || !posted_speed_mps) return false;
  const auto age = staleness(now);
  return age && *age < config.max_staleness_s;
}

GantryStep step_gantry_id(Gps2VslState s, const GpsFix& fix, const CorridorGeometry& geom,
                          const Gps2VslConfig& config) {
  if (!fix_is_valid(fix, s)) {
    auto g = s.relevant_gantry;
    return {std::move(s), std::move(g), false, true};
  }
  s.last_fix_time = fix.timestamp;

  if (!point_in_corridor(fix, geom) || !heading_matches(fix, geom)) {
    const bool was_active = s.mode == Gps2VslMode::Active;
    go_idle(s);
    s.last_mile_marker.reset();
    return {std::move(s), std::nullopt, was_active, false};
  }

  const double mm = geom.mile_marker_at({fix.lat, fix.lon});
  const auto prev = s.last_mile_marker;
  s.last_mile_marker = mm;

  const Gantry* target = nullptr;
  if (s.mode == Gps2VslMode::Idle) {
    const auto ahead = geom.next_gantry_ahead(mm);
    if (ahead && ahead->distance_mi <= config.threshold_mi + kEps) {
      target = geom.find_gantry(ahead->gantry.id);
    } else if (prev) {
      // Skipped over a threshold point between fixes.
      for (const auto& g : geom.gantries()) {
        const double t = g.mile_marker + config.threshold_mi;
        if (mm <= t + kEps && t < *prev) target = &g;
      }
    }
  } else {
    const Gantry* reached = threshold_reached(geom, mm, config.threshold_mi);
    const Gantry* held = geom.find_gantry(*s.relevant_gantry);
    if (reached && held && reached->mile_marker < held->mile_marker) target = reached;
  }

  bool changed = false;
  if (target) {
    s.mode = Gps2VslMode::Active;
    s.relevant_gantry = target->id;
    s.gantry_changed = true;
    changed = true;
  }
  auto g = s.relevant_gantry;
  return {std::move(s), std::move(g), changed, false};
}

LookupStep lookup_posted_speed(Gps2VslState s, SnapshotSource& source, double now,
                               const Gps2VslConfig& config) {
  fold(s, source.poll(now));
  if (s.mode != Gps2VslMode::Active) return {std::move(s), std::nullopt, false};

  bool issued = false;
  const bool periodic = !s.last_lookup_at || now - *s.last_lookup_at >= config.lookup_period_s - kEps;
  if (s.gantry_changed || periodic) {
    if (!source.in_flight()) source.request(now);
    s.last_lookup_at = now;
    s.gantry_changed = false;
    ++s.lookups;
    issued = true;
    fold(s, source.poll(now));
  }
  auto v = s.posted_speed_mps;
  return {std::move(s), v, issued};
}

}  // namespace vslcav
