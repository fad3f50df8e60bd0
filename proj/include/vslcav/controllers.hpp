#pragma once

#include <algorithm>
#include <optional>

#include "vslcav/units.hpp"

namespace vslcav {

/// Gains and actuation limits for the longitudinal controllers.
template <typename Scalar = double>
struct ControllerParams {
  Scalar k_p{0.8};     // 1/s
  Scalar k_cbf{0.1};   // dimensionless
  Scalar t_min{2.0};   // s, minimum time gap
  Scalar s_min{15.0};  // m, minimum standstill spacing
  Scalar u_min{-3.5};  // m/s^2
  Scalar u_max{2.0};   // m/s^2

  void validate() const {
    if (!(k_p > Scalar(0))) throw ConfigError("k_p must be positive");
    if (!(k_cbf > Scalar(0))) throw ConfigError("k_cbf must be positive");
    if (!(t_min > Scalar(0))) throw ConfigError("t_min must be positive");
    if (!(s_min > Scalar(0))) throw ConfigError("s_min must be positive");
    if (!(u_min < Scalar(0) && Scalar(0) < u_max)) throw ConfigError("need u_min < 0 < u_max");
  }
};

template <typename Scalar = double>
struct RadarReading {
  Scalar spacing{0};     // s, bumper-to-bumper, m
  Scalar lead_speed{0};  // v_l, m/s
  bool valid = false;
};

enum class ActiveController { Nominal, SafetyFilter };

inline const char* to_string(ActiveController a) {
  return a == ActiveController::SafetyFilter ? "SafetyFilter" : "Nominal";
}

template <typename Scalar = double>
struct ControlCommand {
  Scalar u_cmd{0};
  ActiveController active = ActiveController::Nominal;
  Scalar u_nom{0};
  std::optional<Scalar> u_safe;
};

/// Proportional speed tracking, k_p (v_gr - v). Unsaturated.
template <typename Scalar>
Scalar u_nominal(Scalar v, Scalar v_gr, const ControllerParams<Scalar>& p) {
  return p.k_p * (v_gr - v);
}

/// Barrier value h = s - (t_min v + s_min); the safe set is h >= 0.
template <typename Scalar>
Scalar barrier(Scalar spacing, Scalar v, const ControllerParams<Scalar>& p) {
  return spacing - (p.t_min * v + p.s_min);
}

/// CBF safety command (k_cbf / t_min) h + (v_l - v) / t_min, absent without
/// a valid lead.
template <typename Scalar>
std::optional<Scalar> u_safe(const RadarReading<Scalar>& r, Scalar v, const ControllerParams<Scalar>& p) {
  if (!r.valid) return std::nullopt;
  return (p.k_cbf / p.t_min) * barrier(r.spacing, v, p) + (r.lead_speed - v) / p.t_min;
}

/// Min-union of the nominal and safety commands, then saturation. Ties go to
/// the nominal controller.
template <typename Scalar>
ControlCommand<Scalar> arbitrate(Scalar u_nom, std::optional<Scalar> u_sf, const ControllerParams<Scalar>& p) {
  ControlCommand<Scalar> cmd;
  cmd.u_nom = u_nom;
  cmd.u_safe = u_sf;
  Scalar u = u_nom;
  if (u_sf && *u_sf < u_nom) {
    u = *u_sf;
    cmd.active = ActiveController::SafetyFilter;
  }
  cmd.u_cmd = std::clamp(u, p.u_min, p.u_max);
  return cmd;
}

}  // namespace vslcav
