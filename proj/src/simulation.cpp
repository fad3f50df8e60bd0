#include "vslcav/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "vslcav/feed_http.hpp"

namespace vslcav {
namespace {

constexpr double kTimeEps = 1e-9;

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

// Centerline position, extrapolated along the end segments outside the
// mapped range so vehicles approaching the corridor still get fixes.
GeoPoint geo_at(const CorridorGeometry& geom, double mm) {
  if (mm <= geom.upstream_mile_marker() && mm >= geom.downstream_mile_marker()) return geom.position_at(mm);
  const auto& cl = geom.centerline();
  const std::size_t i = mm > geom.upstream_mile_marker() ? 0 : cl.size() - 2;
  const Eigen::Vector2d a = geom.to_local(cl[i].position);
  const Eigen::Vector2d b = geom.to_local(cl[i + 1].position);
  const double frac = (cl[i].mile_marker - mm) / (cl[i].mile_marker - cl[i + 1].mile_marker);
  return geom.to_geo(a + frac * (b - a));
}

// Forwards to the feed client and records fetch outcomes as trace events.
class LoggingSource : public SnapshotSource {
 public:
  LoggingSource(std::unique_ptr<FeedClient> client, std::string vehicle, std::vector<TraceEvent>& events)
      : client_(std::move(client)), vehicle_(std::move(vehicle)), events_(events) {}

  void request(double now) override {
    client_->request(now);
    events_.push_back({now, vehicle_, "fetch_request", ""});
  }
  std::vector<FetchResult> poll(double now) override {
    auto results = client_->poll(now);
    for (const auto& r : results) {
      events_.push_back({now, vehicle_, r.ok() ? "fetch_ok" : "fetch_failed",
                         r.ok() ? "generated_at=" + fmt("%.3f", r.snapshot->generated_at)
                                : std::string(to_string(*r.failure))});
    }
    return results;
  }
  bool in_flight() const override { return client_->in_flight(); }

 private:
  std::unique_ptr<FeedClient> client_;
  std::string vehicle_;
  std::vector<TraceEvent>& events_;
};

struct CavRuntime {
  Gps2VslState gps2vsl;
  RampState ramp;
  std::unique_ptr<LoggingSource> source;
  bool was_engaged = true;
  std::optional<double> last_v_gr;
};

void check_finite(const VehicleState& s, const std::string& name, double t) {
  if (!std::isfinite(s.position) || !std::isfinite(s.v) || !std::isfinite(s.a))
    throw SimulationError("non-finite state for vehicle " + name + " at t=" + fmt("%.3f", t));
}

}  // namespace

const VehicleTrace* SimulationTrace::find(const std::string& name) const {
  for (const auto& v : vehicles) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const char* to_string(Transport transport) {
  return transport == Transport::Socket ? "socket" : "in-process";
}

SimulationTrace run_scenario(const Scenario& sc, const RunOptions& options) {
  if (const auto problems = validate_scenario(sc); !problems.empty())
    throw ScenarioError(sc.name, problems);

  const auto wall_start = std::chrono::steady_clock::now();
  const CorridorGeometry& geom = sc.corridor;
  const double origin_mm = geom.upstream_mile_marker();
  const double dt = sc.dt_s;
  const std::size_t n = sc.vehicles.size();

  SimulationTrace trace;
  trace.scenario = sc.name;
  trace.seed = sc.seed;
  trace.dt = dt;

  FeedService service(geom.gantries(), sc.feed);
  std::unique_ptr<FeedHttpServer> server;
  std::shared_ptr<SnapshotTransport> transport;
  if (options.transport == Transport::Socket) {
    server = std::make_unique<FeedHttpServer>(service, wall_clock_seconds);
    const int port = server->start("127.0.0.1", 0);
    transport = std::make_shared<HttpTransport>("127.0.0.1", port, sc.fault.timeout_s);
  } else {
    transport = std::make_shared<InProcessTransport>(service);
  }

  std::mt19937_64 rng(sc.seed);
  std::vector<VehicleState> states(n);
  std::vector<std::optional<CavRuntime>> cavs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& spec = sc.vehicles[i];
    states[i].position = miles_to_meters(origin_mm - spec.initial_mile_marker);
    states[i].v = spec.initial_speed;
    trace.vehicles.push_back({spec.name, spec.kind, spec.length_m, {}});
    if (spec.kind == VehicleKind::Cav) {
      CavRuntime rt;
      rt.ramp = RampState{spec.initial_speed, spec.cav.ramp_up_rate, spec.cav.ramp_down_rate};
      rt.source = std::make_unique<LoggingSource>(
          std::make_unique<FeedClient>(transport, sc.fault, sc.seed * 0x9E3779B97F4A7C15ULL + i + 1),
          spec.name, trace.events);
      rt.was_engaged = spec.cav.engaged_at(0.0);
      cavs[i] = std::move(rt);
    }
  }

  const auto mm_of = [&](const VehicleState& s) { return origin_mm - meters_to_miles(s.position); };
  const long gps_every = std::max(1L, std::lround(1.0 / (sc.gps.rate_hz * dt)));
  const long last_tick = static_cast<long>(std::floor(sc.duration_s / dt + kTimeEps));
  std::size_t next_update = 0;
  std::vector<bool> collided(n, false);
  std::vector<double> commands(n, 0.0);

  for (long k = 0; k <= last_tick; ++k) {
    const double t = static_cast<double>(k) * dt;

    while (next_update < sc.vsl_schedule.size() && sc.vsl_schedule[next_update].effective_at <= t + kTimeEps) {
      const auto& u = sc.vsl_schedule[next_update++];
      service.mirror(u);
      trace.events.push_back({t, "", "update_mirrored", u.gantry_id + "=" + fmt("%.0f", u.posted_speed_mph)});
    }
    if (service.tick(t)) trace.events.push_back({t, "", "snapshot_built", fmt("%.3f", service.snapshot()->generated_at)});

    for (std::size_t i = 0; i < n; ++i) {
      const auto& spec = sc.vehicles[i];
      const VehicleState& s = states[i];
      Sample row;
      row.t = t;
      row.position = s.position;
      row.mile_marker = mm_of(s);
      row.v = s.v;
      row.a = s.a;

      if (i > 0) {
        const double gap = states[i - 1].position - s.position - sc.vehicles[i - 1].length_m;
        if (!trace.min_spacing_m || gap < *trace.min_spacing_m) trace.min_spacing_m = gap;
        if (gap <= 0.0 && !collided[i]) {
          collided[i] = true;
          trace.collision = true;
          trace.events.push_back({t, spec.name, "collision", "with " + sc.vehicles[i - 1].name});
        }
      }

      switch (spec.kind) {
        case VehicleKind::Scripted:
          commands[i] = 0.0;
          break;
        case VehicleKind::Pilot: {
          std::optional<LeadPerception> lead;
          if (i > 0)
            lead = LeadPerception{states[i - 1].position - s.position - sc.vehicles[i - 1].length_m, states[i - 1].v};
          commands[i] = pilot_acceleration(s.v, lead, spec.pilot);
          break;
        }
        case VehicleKind::Cav: {
          CavRuntime& rt = *cavs[i];
          const CavConfig& cfg = spec.cav;
          const auto prev_gantry = rt.gps2vsl.relevant_gantry;
          const auto prev_mode = rt.gps2vsl.mode;

          if (k % gps_every == 0) {
            GeoPoint p = geo_at(geom, row.mile_marker);
            if (sc.gps.noise_m > 0) {
              std::normal_distribution<double> noise(0.0, sc.gps.noise_m);
              Eigen::Vector2d local = geom.to_local(p);
              local.x() += noise(rng);
              local.y() += noise(rng);
              p = geom.to_geo(local);
            }
            const GpsFix fix{p.lat, p.lon, geom.heading_at(row.mile_marker), s.v, t};
            rt.gps2vsl = step_gantry_id(std::move(rt.gps2vsl), fix, geom, cfg.gps2vsl).state;
          }
          rt.gps2vsl = lookup_posted_speed(std::move(rt.gps2vsl), *rt.source, t, cfg.gps2vsl).state;

          const Gps2VslState& g = rt.gps2vsl;
          if (g.mode != prev_mode) trace.events.push_back({t, spec.name, "mode", to_string(g.mode)});
          if (g.relevant_gantry && g.relevant_gantry != prev_gantry)
            trace.events.push_back({t, spec.name, "gantry", *g.relevant_gantry});
          if (g.posted_speed_mps != rt.last_v_gr && g.posted_speed_mps)
            trace.events.push_back({t, spec.name, "v_gr", fmt("%.4f", *g.posted_speed_mps)});
          rt.last_v_gr = g.posted_speed_mps;

          CavSample c;
          c.mode = g.mode;
          c.relevant_gantry = g.relevant_gantry;
          c.v_gr = g.posted_speed_mps;
          c.vsl_valid = g.vsl_valid(t, cfg.gps2vsl);
          c.staleness = g.staleness(t);
          c.engaged = cfg.engaged_at(t);
          c.user_set_point = cfg.user_set_point_mps;
          if (c.engaged != rt.was_engaged)
            trace.events.push_back({t, spec.name, c.engaged ? "engaged" : "disengaged", ""});
          rt.was_engaged = c.engaged;

          const MuxOutput m = mux({c.engaged, c.vsl_valid, c.user_set_point, c.v_gr.value_or(0.0), s.v});
          c.source = m.source;
          c.selected = m.selected;
          const RampStep r = ramp(rt.ramp, m.selected, dt);
          rt.ramp = r.state;
          c.setpoint = r.output;

          if (i > 0) {
            RadarModel model = cfg.radar;
            model.vehicle_length_m = sc.vehicles[i - 1].length_m;
            const bool noisy = model.spacing_noise_m > 0 || model.speed_noise_mps > 0;
            c.radar = radar_measure(s, states[i - 1], model, noisy ? &rng : nullptr);
          }
          const auto cmd = arbitrate(u_nominal(s.v, c.setpoint, cfg.controller),
                                     u_safe(c.radar, s.v, cfg.controller), cfg.controller);
          c.u_nom = cmd.u_nom;
          c.u_safe = cmd.u_safe;
          c.active = cmd.active;

          if (c.engaged) {
            commands[i] = cmd.u_cmd;
          } else {
            commands[i] = 0.0;
            for (const auto& w : cfg.disengaged) {
              if (t >= w.start && t < w.end) commands[i] = w.manual_accel;
            }
          }
          row.cav = std::move(c);
          break;
        }
      }
      row.u_cmd = commands[i];
      trace.vehicles[i].samples.push_back(std::move(row));
    }

    if (k == last_tick) break;
    if (sc.stop_after_mile_marker && mm_of(states.back()) < *sc.stop_after_mile_marker) break;

    const double t_next = t + dt;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& spec = sc.vehicles[i];
      VehicleState& s = states[i];
      switch (spec.kind) {
        case VehicleKind::Scripted: {
          // Trapezoidal position update keeps the scripted profile exact for ramps.
          const double v_next = std::max(0.0, spec.profile.speed_at(t_next));
          s.a = (v_next - s.v) / dt;
          s.position += 0.5 * (s.v + v_next) * dt;
          s.v = v_next;
          break;
        }
        case VehicleKind::Pilot:
          s.a = commands[i];
          if (s.v + s.a * dt < 0.0) s.a = -s.v / dt;
          s.v = std::max(0.0, s.v + s.a * dt);
          s.position += s.v * dt;
          break;
        case VehicleKind::Cav:
          s = step_dynamics(s, commands[i], dt, spec.cav.lag_s);
          break;
      }
      check_finite(s, spec.name, t_next);
    }
  }

  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  if (server) server->stop();
  return trace;
}

}  // namespace vslcav
