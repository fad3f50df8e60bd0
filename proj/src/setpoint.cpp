#include "vslcav/setpoint.hpp"

#include <algorithm>

#include "vslcav/units.hpp"

namespace vslcav {

const char* to_string(SetpointSource source) {
  switch (source) {
    case SetpointSource::MeasuredVel: return "MeasuredVel";
    case SetpointSource::Vsl: return "Vsl";
    case SetpointSource::User: return "User";
  }
  return "?";
}

MuxOutput mux(const MuxInputs& in) {
  if (!in.engaged) return {in.measured_velocity, SetpointSource::MeasuredVel};
  if (in.vsl_valid) return {in.vsl_set_point, SetpointSource::Vsl};
  return {in.user_set_point, SetpointSource::User};
}

void RampState::validate() const {
  if (!(up_rate > 0) || !(down_rate > 0)) throw ConfigError("ramp rates must be positive");
}

RampStep ramp(RampState state, double target, double dt) {
  if (!(dt > 0)) throw PreconditionError("ramp: dt must be positive");
  const double lo = state.current_output - state.down_rate * dt;
  const double hi = state.current_output + state.up_rate * dt;
  state.current_output = std::clamp(target, lo, hi);
  return {state, state.current_output};
}

}  // namespace vslcav
