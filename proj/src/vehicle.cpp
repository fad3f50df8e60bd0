#include "vslcav/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vslcav {

VehicleState step_dynamics(VehicleState s, double u_cmd, double dt, double lag_s) {
  if (!(dt > 0)) throw PreconditionError("step_dynamics: dt must be positive");
  s.a = lag_s > 0 ? s.a + (u_cmd - s.a) * dt / lag_s : u_cmd;
  s.v = std::max(0.0, s.v + s.a * dt);
  s.position += s.v * dt;
  return s;
}

RadarReading<double> radar_measure(const VehicleState& ego, const VehicleState& lead,
                                   const RadarModel& model, std::mt19937_64* rng) {
  const double gap = lead.position - ego.position;
  RadarReading<double> r;
  r.spacing = gap - model.vehicle_length_m;
  r.lead_speed = lead.v;
  r.valid = r.spacing > 0.0 && gap <= model.max_range_m;
  if (r.valid && rng) {
    if (model.spacing_noise_m > 0)
      r.spacing += std::normal_distribution<double>(0.0, model.spacing_noise_m)(*rng);
    if (model.speed_noise_mps > 0)
      r.lead_speed += std::normal_distribution<double>(0.0, model.speed_noise_mps)(*rng);
  }
  return r;
}

LeadTrajectory::LeadTrajectory(double initial_speed, std::vector<LeadSegment> segments)
    : initial_speed_(initial_speed), segments_(std::move(segments)) {
  double t = 0.0;
  double v = initial_speed_;
  for (const auto& seg : segments_) {
    starts_.push_back(t);
    double start_v = v;
    double end_v = v;
    switch (seg.kind) {
      case LeadSegment::Kind::Constant:
        start_v = end_v = seg.speed;
        break;
      case LeadSegment::Kind::Ramp:
        end_v = seg.speed;
        break;
      case LeadSegment::Kind::Wave:
        start_v = seg.speed;
        end_v = seg.speed + seg.amplitude * std::sin(2.0 * std::numbers::pi * seg.duration_s / seg.period_s);
        break;
    }
    start_speeds_.push_back(start_v);
    end_speeds_.push_back(end_v);
    v = end_v;
    t += std::max(0.0, seg.duration_s);
  }
}

double LeadTrajectory::speed_at(double t) const {
  if (segments_.empty()) return initial_speed_;
  std::size_t i = 0;
  while (i + 1 < segments_.size() && t >= starts_[i + 1]) ++i;
  const LeadSegment& seg = segments_[i];
  double tau = t - starts_[i];
  const bool open_ended = i + 1 == segments_.size() && seg.duration_s <= 0;
  if (!open_ended) tau = std::min(tau, seg.duration_s);
  switch (seg.kind) {
    case LeadSegment::Kind::Constant:
      return seg.speed;
    case LeadSegment::Kind::Ramp: {
      if (open_ended) return seg.speed;
      const double f = seg.duration_s > 0 ? tau / seg.duration_s : 1.0;
      return start_speeds_[i] + f * (seg.speed - start_speeds_[i]);
    }
    case LeadSegment::Kind::Wave:
      return seg.speed + seg.amplitude * std::sin(2.0 * std::numbers::pi * tau / seg.period_s);
  }
  return seg.speed;
}

double LeadTrajectory::max_deceleration() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    if (seg.kind == LeadSegment::Kind::Ramp && seg.duration_s > 0)
      worst = std::max(worst, (start_speeds_[i] - seg.speed) / seg.duration_s);
    if (seg.kind == LeadSegment::Kind::Wave)
      worst = std::max(worst, 2.0 * std::numbers::pi * seg.amplitude / seg.period_s);
  }
  return worst;
}

double LeadTrajectory::min_speed() const {
  double lo = initial_speed_;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    switch (seg.kind) {
      case LeadSegment::Kind::Constant: lo = std::min(lo, seg.speed); break;
      case LeadSegment::Kind::Ramp: lo = std::min({lo, start_speeds_[i], seg.speed}); break;
      case LeadSegment::Kind::Wave: lo = std::min(lo, seg.speed - std::abs(seg.amplitude)); break;
    }
  }
  return lo;
}

double LeadTrajectory::max_discontinuity() const {
  double worst = 0.0;
  double prev_end = initial_speed_;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    worst = std::max(worst, std::abs(start_speeds_[i] - prev_end));
    prev_end = end_speeds_[i];
  }
  return worst;
}

void PilotDriverModel::validate() const {
  if (!(desired_speed > 0) || !(time_headway_s > 0) || !(min_gap_m > 0) || !(max_accel > 0) ||
      !(comfortable_decel > 0) || !(max_decel > 0) || !(exponent > 0))
    throw ConfigError("pilot model parameters must be positive");
}

double pilot_acceleration(double v, const std::optional<LeadPerception>& lead, const PilotDriverModel& m) {
  double a = m.max_accel * (1.0 - std::pow(v / m.desired_speed, m.exponent));
  if (lead) {
    if (lead->gap_m <= 0.0) return -m.max_decel;
    const double closing = v - lead->lead_speed;
    const double desired_gap =
        m.min_gap_m +
        std::max(0.0, v * m.time_headway_s + v * closing / (2.0 * std::sqrt(m.max_accel * m.comfortable_decel)));
    const double ratio = desired_gap / lead->gap_m;
    a -= m.max_accel * ratio * ratio;
  }
  return std::max(a, -m.max_decel);
}

VehicleState step_pilot(VehicleState s, const std::optional<LeadPerception>& lead,
                        const PilotDriverModel& model, double dt) {
  if (!(dt > 0)) throw PreconditionError("step_pilot: dt must be positive");
  s.a = pilot_acceleration(s.v, lead, model);
  if (s.v + s.a * dt < 0.0) s.a = -s.v / dt;
  s.v = std::max(0.0, s.v + s.a * dt);
  s.position += s.v * dt;
  return s;
}

}  // namespace vslcav
