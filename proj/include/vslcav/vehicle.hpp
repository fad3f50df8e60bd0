#pragma once

#include <optional>
#include <random>
#include <vector>

#include "vslcav/controllers.hpp"

namespace vslcav {

/// Longitudinal state. Position is metres along the road in the direction
/// of travel (mile marker decreases as position increases).
struct VehicleState {
  double position = 0.0;
  double v = 0.0;
  double a = 0.0;
};

/// Double integrator behind a first-order actuation lag:
///   a <- a + (u - a) dt / lag;  v <- max(0, v + a dt);  x <- x + v dt.
/// lag <= 0 applies the command directly. Throws PreconditionError if dt <= 0.
VehicleState step_dynamics(VehicleState state, double u_cmd, double dt, double lag_s = 0.4);

struct RadarModel {
  double max_range_m = 120.0;
  double vehicle_length_m = 4.6;
  double spacing_noise_m = 0.0;  // zero-mean Gaussian sigma, off by default
  double speed_noise_mps = 0.0;
};

/// Valid iff the bumper gap is positive and the centre distance is within range.
RadarReading<double> radar_measure(const VehicleState& ego, const VehicleState& lead,
                                   const RadarModel& model, std::mt19937_64* rng = nullptr);

/// Piecewise lead speed profile over time.
struct LeadSegment {
  enum class Kind { Constant, Ramp, Wave };
  Kind kind = Kind::Constant;
  double duration_s = 0.0;  // <= 0 on the last segment means "forever"
  double speed = 0.0;       // Constant: speed; Ramp: target speed; Wave: mean
  double amplitude = 0.0;   // Wave
  double period_s = 60.0;   // Wave
};

class LeadTrajectory {
 public:
  LeadTrajectory() = default;
  LeadTrajectory(double initial_speed, std::vector<LeadSegment> segments);

  double speed_at(double t) const;
  /// Largest deceleration magnitude anywhere on the profile.
  double max_deceleration() const;
  double min_speed() const;
  /// Largest speed jump between consecutive segments.
  double max_discontinuity() const;
  double initial_speed() const { return initial_speed_; }
  const std::vector<LeadSegment>& segments() const { return segments_; }

 private:
  double initial_speed_ = 0.0;
  std::vector<LeadSegment> segments_;
  std::vector<double> starts_;
  std::vector<double> start_speeds_;
  std::vector<double> end_speeds_;
};

/// Intelligent-driver-style car following used for the human pilot. Desired
/// speed is the maximum limit; reduced VSL postings are ignored.
struct PilotDriverModel {
  double desired_speed = mph_to_mps(kMaxPostedMph);
  double time_headway_s = 1.5;
  double min_gap_m = 2.0;
  double max_accel = 1.0;
  double comfortable_decel = 1.5;
  double max_decel = 9.0;
  double exponent = 4.0;

  void validate() const;
};

/// Gap and closing information the pilot perceives; empty on a free road.
struct LeadPerception {
  double gap_m = 0.0;  // bumper-to-bumper
  double lead_speed = 0.0;
};

double pilot_acceleration(double v, const std::optional<LeadPerception>& lead, const PilotDriverModel& m);

/// Applies the pilot's acceleration without actuation lag.
VehicleState step_pilot(VehicleState state, const std::optional<LeadPerception>& lead,
                        const PilotDriverModel& model, double dt);

}  // namespace vslcav
