#pragma once

namespace vslcav {

enum class SetpointSource { MeasuredVel, Vsl, User };

const char* to_string(SetpointSource source);

struct MuxInputs {
  bool engaged = false;    // control allowed
  bool vsl_valid = false;  // gps2vsl Active with a fresh v_gr
  double user_set_point = 0.0;
  double vsl_set_point = 0.0;
  double measured_velocity = 0.0;
};

struct MuxOutput {
  double selected = 0.0;
  SetpointSource source = SetpointSource::MeasuredVel;
};

/// Two-switch selection: measured speed while disengaged, otherwise the VSL
/// setpoint inside the corridor and the driver's setpoint everywhere else.
MuxOutput mux(const MuxInputs& in);

/// Time-based rate limiter on the mux output. Rates are m/s per second.
struct RampState {
  double current_output = 0.0;
  double up_rate = 1.5;
  double down_rate = 2.0;

  void validate() const;
};

struct RampStep {
  RampState state;
  double output = 0.0;
};

/// output = clamp(target, current - down_rate*dt, current + up_rate*dt).
/// Throws PreconditionError if dt <= 0.
RampStep ramp(RampState state, double target, double dt);

}  // namespace vslcav
