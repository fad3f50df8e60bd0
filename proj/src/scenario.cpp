#include "vslcav/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace vslcav {
namespace {

namespace fs = std::filesystem;

class Reader {
 public:
  std::vector<Diagnostic> diags;

  void error(const YAML::Node& at, const std::string& field, const std::string& msg) {
    Diagnostic d;
    d.field = field;
    d.message = msg;
    if (at.IsDefined()) {
      const auto m = at.Mark();
      if (m.line >= 0) {
        d.line = m.line + 1;
        d.column = m.column + 1;
      }
    }
    diags.push_back(std::move(d));
  }

  // Required when `fallback` is empty.
  double number(const YAML::Node& parent, const std::string& key, const std::string& path,
                std::optional<double> fallback = std::nullopt) {
    const YAML::Node n = parent[key];
    const std::string field = path.empty() ? key : path + "." + key;
    if (!n.IsDefined() || n.IsNull()) {
      if (fallback) return *fallback;
      error(parent, field, "missing required field");
      return 0.0;
    }
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) {
        error(n, field, "must be finite");
        return 0.0;
      }
      return v;
    } catch (const YAML::Exception&) {
      error(n, field, "expected a number");
      return fallback.value_or(0.0);
    }
  }

  std::string text(const YAML::Node& parent, const std::string& key, const std::string& path,
                   std::optional<std::string> fallback = std::nullopt) {
    const YAML::Node n = parent[key];
    const std::string field = path.empty() ? key : path + "." + key;
    if (!n.IsDefined() || n.IsNull()) {
      if (fallback) return *fallback;
      error(parent, field, "missing required field");
      return {};
    }
    if (!n.IsScalar()) {
      error(n, field, "expected a string");
      return {};
    }
    return n.as<std::string>();
  }

  std::optional<bool> flag(const YAML::Node& parent, const std::string& key, const std::string& path) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined() || n.IsNull()) return std::nullopt;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      error(n, path + "." + key, "expected true or false");
      return std::nullopt;
    }
  }

  bool sequence(const YAML::Node& n, const std::string& field, bool required, const YAML::Node& parent) {
    if (!n.IsDefined() || n.IsNull()) {
      if (required) error(parent, field, "missing required field");
      return false;
    }
    if (!n.IsSequence()) {
      error(n, field, "expected a list");
      return false;
    }
    return true;
  }
};

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

std::vector<Gantry> read_gantries(Reader& r, const YAML::Node& corridor) {
  std::vector<Gantry> out;
  const YAML::Node list = corridor["gantries"];
  const YAML::Node range = corridor["gantry_range"];
  if (list.IsDefined() && r.sequence(list, "corridor.gantries", false, corridor)) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = idx("corridor.gantries", i);
      Gantry g;
      g.mile_marker = r.number(list[i], "mile_marker", p);
      char buf[32];
      std::snprintf(buf, sizeof buf, "G%06.2f", g.mile_marker);
      g.id = r.text(list[i], "id", p, std::string(buf));
      g.default_limit_mph = r.number(list[i], "default_limit_mph", p, kMaxPostedMph);
      out.push_back(g);
    }
  }
  if (range.IsDefined()) {
    const double first = r.number(range, "first", "corridor.gantry_range");
    const double last = r.number(range, "last", "corridor.gantry_range");
    const double spacing = r.number(range, "spacing", "corridor.gantry_range", 0.5);
    const double limit = r.number(range, "default_limit_mph", "corridor.gantry_range", kMaxPostedMph);
    if (spacing > 0 && first >= last) {
      auto gen = evenly_spaced_gantries(first, last, spacing, limit);
      out.insert(out.end(), gen.begin(), gen.end());
    } else {
      r.error(range, "corridor.gantry_range", "need first >= last and spacing > 0");
    }
  }
  if (out.empty()) r.error(corridor, "corridor.gantries", "corridor defines no gantries");
  return out;
}

std::optional<CorridorGeometry> read_corridor(Reader& r, const YAML::Node& root) {
  const YAML::Node c = root["corridor"];
  if (!c.IsDefined() || !c.IsMap()) {
    r.error(root, "corridor", "missing required section");
    return std::nullopt;
  }
  const std::size_t before = r.diags.size();
  auto gantries = read_gantries(r, c);
  HeadingInterval heading;
  if (const YAML::Node h = c["heading"]; h.IsDefined()) {
    heading.from_deg = r.number(h, "from", "corridor.heading");
    heading.to_deg = r.number(h, "to", "corridor.heading");
  }

  std::optional<CorridorGeometry> geom;
  const YAML::Node poly = c["polygon"];
  try {
    if (poly.IsDefined()) {
      std::vector<GeoPoint> polygon;
      std::vector<CenterlineKnot> knots;
      if (r.sequence(poly, "corridor.polygon", true, c)) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
          polygon.push_back({r.number(poly[i], "lat", idx("corridor.polygon", i)),
                             r.number(poly[i], "lon", idx("corridor.polygon", i))});
        }
      }
      const YAML::Node cl = c["centerline"];
      if (r.sequence(cl, "corridor.centerline", true, c)) {
        for (std::size_t i = 0; i < cl.size(); ++i) {
          const std::string p = idx("corridor.centerline", i);
          knots.push_back({r.number(cl[i], "mile_marker", p),
                           {r.number(cl[i], "lat", p), r.number(cl[i], "lon", p)}});
        }
      }
      if (r.diags.size() == before) geom.emplace(polygon, gantries, heading, knots);
    } else {
      const double start = r.number(c, "start_mile_marker", "corridor");
      const double end = r.number(c, "end_mile_marker", "corridor");
      const double half = r.number(c, "half_width_m", "corridor", 50.0);
      const double spacing = r.number(c, "knot_spacing_mi", "corridor", 2.0);
      GeoPoint origin{36.05, -86.60};
      if (const YAML::Node o = c["origin"]; o.IsDefined()) {
        origin.lat = r.number(o, "lat", "corridor.origin");
        origin.lon = r.number(o, "lon", "corridor.origin");
      }
      if (r.diags.size() == before)
        geom = CorridorGeometry::synthetic(gantries, start, end, origin, half, spacing, heading);
    }
  } catch (const ConfigError& e) {
    r.error(c, "corridor", e.what());
  }
  return geom;
}

LeadTrajectory read_profile(Reader& r, const YAML::Node& v, const std::string& path, double initial_speed) {
  std::vector<LeadSegment> segs;
  const YAML::Node prof = v["profile"];
  if (!prof.IsDefined()) return LeadTrajectory(initial_speed, {});
  if (!r.sequence(prof, path + ".profile", true, v)) return LeadTrajectory(initial_speed, {});
  for (std::size_t i = 0; i < prof.size(); ++i) {
    const YAML::Node n = prof[i];
    const std::string p = idx(path + ".profile", i);
    LeadSegment seg;
    seg.duration_s = r.number(n, "duration", p, i + 1 == prof.size() ? std::optional<double>(0.0) : std::nullopt);
    if (n["constant"].IsDefined()) {
      seg.kind = LeadSegment::Kind::Constant;
      seg.speed = r.number(n, "constant", p);
    } else if (n["ramp"].IsDefined()) {
      seg.kind = LeadSegment::Kind::Ramp;
      seg.speed = r.number(n, "ramp", p);
    } else if (n["wave"].IsDefined()) {
      seg.kind = LeadSegment::Kind::Wave;
      const YAML::Node w = n["wave"];
      seg.speed = r.number(w, "mean", p + ".wave");
      seg.amplitude = r.number(w, "amplitude", p + ".wave");
      seg.period_s = r.number(w, "period", p + ".wave");
      if (!(seg.period_s > 0)) r.error(w, p + ".wave.period", "must be positive");
    } else {
      r.error(n, p, "segment needs one of constant, ramp, wave");
    }
    segs.push_back(seg);
  }
  return LeadTrajectory(initial_speed, std::move(segs));
}

void read_cav(Reader& r, const YAML::Node& v, const std::string& path, CavConfig& cav) {
  if (v["user_set_point_mph"].IsDefined())
    cav.user_set_point_mps = mph_to_mps(r.number(v, "user_set_point_mph", path));
  else
    cav.user_set_point_mps = r.number(v, "user_set_point_mps", path, mph_to_mps(kMaxPostedMph));
  if (const YAML::Node c = v["controller"]; c.IsDefined()) {
    const std::string p = path + ".controller";
    auto& k = cav.controller;
    k.k_p = r.number(c, "k_p", p, k.k_p);
    k.k_cbf = r.number(c, "k_cbf", p, k.k_cbf);
    k.t_min = r.number(c, "t_min", p, k.t_min);
    k.s_min = r.number(c, "s_min", p, k.s_min);
    k.u_min = r.number(c, "u_min", p, k.u_min);
    k.u_max = r.number(c, "u_max", p, k.u_max);
  }
  if (const YAML::Node c = v["ramp"]; c.IsDefined()) {
    cav.ramp_up_rate = r.number(c, "up_rate", path + ".ramp", cav.ramp_up_rate);
    cav.ramp_down_rate = r.number(c, "down_rate", path + ".ramp", cav.ramp_down_rate);
  }
  if (const YAML::Node c = v["plant"]; c.IsDefined()) cav.lag_s = r.number(c, "lag_s", path + ".plant", cav.lag_s);
  if (const YAML::Node c = v["radar"]; c.IsDefined()) {
    const std::string p = path + ".radar";
    cav.radar.max_range_m = r.number(c, "max_range_m", p, cav.radar.max_range_m);
    cav.radar.spacing_noise_m = r.number(c, "spacing_noise_m", p, cav.radar.spacing_noise_m);
    cav.radar.speed_noise_mps = r.number(c, "speed_noise_mps", p, cav.radar.speed_noise_mps);
  }
  if (const YAML::Node c = v["gps2vsl"]; c.IsDefined()) {
    const std::string p = path + ".gps2vsl";
    cav.gps2vsl.threshold_mi = r.number(c, "threshold_mi", p, cav.gps2vsl.threshold_mi);
    cav.gps2vsl.lookup_period_s = r.number(c, "lookup_period_s", p, cav.gps2vsl.lookup_period_s);
    cav.gps2vsl.max_staleness_s = r.number(c, "max_staleness_s", p, cav.gps2vsl.max_staleness_s);
  }
  const YAML::Node dis = v["disengaged"];
  if (dis.IsDefined() && r.sequence(dis, path + ".disengaged", false, v)) {
    for (std::size_t i = 0; i < dis.size(); ++i) {
      const std::string p = idx(path + ".disengaged", i);
      cav.disengaged.push_back({r.number(dis[i], "start", p), r.number(dis[i], "end", p),
                                r.number(dis[i], "accel", p, 0.0)});
    }
  }
}

void read_vehicles(Reader& r, const YAML::Node& root, Scenario& s) {
  const YAML::Node list = root["vehicles"];
  if (!r.sequence(list, "vehicles", true, root)) return;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const YAML::Node v = list[i];
    const std::string p = idx("vehicles", i);
    VehicleSpec spec;
    spec.name = r.text(v, "name", p);
    const std::string kind = r.text(v, "kind", p);
    if (kind == "scripted") {
      spec.kind = VehicleKind::Scripted;
    } else if (kind == "pilot") {
      spec.kind = VehicleKind::Pilot;
    } else if (kind == "cav") {
      spec.kind = VehicleKind::Cav;
    } else if (!kind.empty()) {
      r.error(v["kind"], p + ".kind", "expected scripted, pilot or cav");
    }
    spec.initial_mile_marker = r.number(v, "mile_marker", p);
    spec.initial_speed = r.number(v, "speed", p);
    spec.length_m = r.number(v, "length_m", p, 4.6);
    if (spec.kind == VehicleKind::Scripted) spec.profile = read_profile(r, v, p, spec.initial_speed);
    if (spec.kind == VehicleKind::Pilot) {
      if (const YAML::Node m = v["model"]; m.IsDefined()) {
        auto& pm = spec.pilot;
        const std::string mp = p + ".model";
        pm.desired_speed = r.number(m, "desired_speed", mp, pm.desired_speed);
        pm.time_headway_s = r.number(m, "time_headway_s", mp, pm.time_headway_s);
        pm.min_gap_m = r.number(m, "min_gap_m", mp, pm.min_gap_m);
        pm.max_accel = r.number(m, "max_accel", mp, pm.max_accel);
        pm.comfortable_decel = r.number(m, "comfortable_decel", mp, pm.comfortable_decel);
        pm.max_decel = r.number(m, "max_decel", mp, pm.max_decel);
        pm.exponent = r.number(m, "exponent", mp, pm.exponent);
      }
    }
    if (spec.kind == VehicleKind::Cav) read_cav(r, v, p, spec.cav);
    s.vehicles.push_back(std::move(spec));
  }
}

void read_schedule(Reader& r, const YAML::Node& root, Scenario& s) {
  const YAML::Node list = root["vsl_schedule"];
  if (!list.IsDefined() || list.IsNull()) return;
  if (!r.sequence(list, "vsl_schedule", false, root)) return;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = idx("vsl_schedule", i);
    GantryUpdate u;
    u.gantry_id = r.text(list[i], "gantry", p);
    u.posted_speed_mph = r.number(list[i], "posted_mph", p);
    u.effective_at = r.number(list[i], "at", p);
    const Gantry* g = s.corridor.find_gantry(u.gantry_id);
    if (!g && !u.gantry_id.empty()) r.error(list[i]["gantry"], p + ".gantry", "unknown gantry '" + u.gantry_id + "'");
    const auto trig = r.flag(list[i], "triggered", p);
    u.triggered = trig ? *trig : (g && u.posted_speed_mph < g->default_limit_mph);
    s.vsl_schedule.push_back(u);
  }
  // Mirror order: by time, stable for equal times.
  std::stable_sort(s.vsl_schedule.begin(), s.vsl_schedule.end(),
                   [](const GantryUpdate& a, const GantryUpdate& b) { return a.effective_at < b.effective_at; });
}

void read_segments(Reader& r, const YAML::Node& root, Scenario& s) {
  const YAML::Node list = root["segments"];
  if (!list.IsDefined() || list.IsNull()) return;
  if (!r.sequence(list, "segments", false, root)) return;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const YAML::Node n = list[i];
    if (!n.IsSequence() || n.size() != 2) {
      r.error(n, idx("segments", i), "expected [lo, hi] mile markers");
      continue;
    }
    try {
      s.segments.push_back({n[0].as<double>(), n[1].as<double>()});
    } catch (const YAML::Exception&) {
      r.error(n, idx("segments", i), "expected numbers");
    }
  }
}

}  // namespace

const char* to_string(VehicleKind kind) {
  switch (kind) {
    case VehicleKind::Scripted: return "scripted";
    case VehicleKind::Pilot: return "pilot";
    case VehicleKind::Cav: return "cav";
  }
  return "?";
}

bool CavConfig::engaged_at(double t) const {
  return std::none_of(disengaged.begin(), disengaged.end(),
                      [t](const DisengagedWindow& w) { return t >= w.start && t < w.end; });
}

ScenarioError::ScenarioError(std::string source, std::vector<Diagnostic> diagnostics)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "scenario " << source << " is invalid:";
        for (const auto& d : diagnostics) {
          os << "\n  " << source;
          if (d.line > 0) os << ":" << d.line << ":" << d.column;
          os << ": " << d.field << ": " << d.message;
        }
        return os.str();
      }()),
      source_(std::move(source)),
      diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate_scenario(const Scenario& s) {
  std::vector<Diagnostic> out;
  auto bad = [&](std::string field, std::string msg) { out.push_back({0, 0, std::move(field), std::move(msg)}); };

  if (!(s.dt_s > 0)) bad("dt_s", "must be positive");
  if (!(s.duration_s > 0)) bad("duration_s", "must be positive");
  if (!(s.runtime_budget_s > 0)) bad("runtime_budget_s", "must be positive");
  if (!(s.feed.cadence_s > 0)) bad("feed.cadence_s", "must be positive");
  if (!(s.feed.window_s > 0)) bad("feed.window_s", "must be positive");
  if (!(s.gps.rate_hz > 0)) bad("gps.rate_hz", "must be positive");
  if (!(s.gps.noise_m >= 0)) bad("gps.noise_m", "must be non-negative");
  try {
    s.fault.validate();
  } catch (const ConfigError& e) {
    bad("feed.fault", e.what());
  }
  if (s.vehicles.empty()) bad("vehicles", "scenario needs at least one vehicle");

  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    const auto& v = s.vehicles[i];
    const std::string p = idx("vehicles", i);
    if (v.name.empty()) bad(p + ".name", "must not be empty");
    if (v.name.find_first_of(",\n") != std::string::npos) bad(p + ".name", "must not contain commas");
    for (std::size_t j = 0; j < i; ++j) {
      if (s.vehicles[j].name == v.name) bad(p + ".name", "duplicate vehicle name '" + v.name + "'");
    }
    if (!(v.initial_speed >= 0)) bad(p + ".speed", "must be non-negative");
    if (!(v.length_m > 0)) bad(p + ".length_m", "must be positive");
    if (v.initial_mile_marker > s.corridor.upstream_mile_marker() + 5.0 ||
        v.initial_mile_marker < s.corridor.downstream_mile_marker() - 5.0)
      bad(p + ".mile_marker", "more than 5 mi outside the corridor");
    if (i > 0) {
      const auto& ahead = s.vehicles[i - 1];
      const double gap_m = miles_to_meters(v.initial_mile_marker - ahead.initial_mile_marker) - ahead.length_m;
      if (!(gap_m > 0)) bad(p + ".mile_marker", "vehicles must be listed front to back with positive spacing");
    }
    switch (v.kind) {
      case VehicleKind::Scripted:
        if (v.profile.min_speed() < 0) bad(p + ".profile", "speeds must be non-negative");
        if (v.profile.max_deceleration() > s.max_lead_decel + 1e-9)
          bad(p + ".profile", "deceleration exceeds max_lead_decel");
        if (v.profile.max_discontinuity() > 1e-6) bad(p + ".profile", "speed jumps between segments");
        break;
      case VehicleKind::Pilot:
        try {
          v.pilot.validate();
        } catch (const ConfigError& e) {
          bad(p + ".model", e.what());
        }
        break;
      case VehicleKind::Cav:
        try {
          v.cav.controller.validate();
          RampState{0.0, v.cav.ramp_up_rate, v.cav.ramp_down_rate}.validate();
        } catch (const ConfigError& e) {
          bad(p, e.what());
        }
        if (!(v.cav.user_set_point_mps >= 0)) bad(p + ".user_set_point", "must be non-negative");
        if (!(v.cav.lag_s >= 0)) bad(p + ".plant.lag_s", "must be non-negative");
        if (!(v.cav.radar.max_range_m > 0)) bad(p + ".radar.max_range_m", "must be positive");
        if (!(v.cav.gps2vsl.threshold_mi > 0) || !(v.cav.gps2vsl.lookup_period_s > 0) ||
            !(v.cav.gps2vsl.max_staleness_s > 0))
          bad(p + ".gps2vsl", "threshold, lookup period and staleness must be positive");
        for (const auto& w : v.cav.disengaged) {
          if (!(w.end > w.start)) bad(p + ".disengaged", "window end must follow start");
        }
        break;
    }
  }

  UpdateStore store(s.corridor.gantries());
  for (std::size_t i = 0; i < s.vsl_schedule.size(); ++i) {
    try {
      store.mirror(s.vsl_schedule[i]);
    } catch (const FeedError& e) {
      bad(idx("vsl_schedule", i), e.what());
    }
  }
  for (std::size_t i = 0; i < s.segments.size(); ++i) {
    if (!(s.segments[i].lo < s.segments[i].hi)) bad(idx("segments", i), "need lo < hi");
  }
  return out;
}

Scenario parse_scenario(const std::string& text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(source_name, {{e.mark.line + 1, e.mark.column + 1, "<syntax>", e.msg}});
  }
  if (!root.IsMap()) throw ScenarioError(source_name, {{1, 1, "<root>", "expected a mapping"}});

  Reader r;
  auto corridor = read_corridor(r, root);
  if (!corridor) throw ScenarioError(source_name, r.diags);

  Scenario s(std::move(*corridor));
  s.name = r.text(root, "name", "");
  s.description = r.text(root, "description", "", std::string());
  s.duration_s = r.number(root, "duration_s", "");
  s.dt_s = r.number(root, "dt_s", "", 0.05);
  s.seed = static_cast<std::uint64_t>(r.number(root, "seed", "", 0.0));
  s.runtime_budget_s = r.number(root, "runtime_budget_s", "", 60.0);
  s.max_lead_decel = r.number(root, "max_lead_decel", "", 2.0);
  if (root["stop_after_mile_marker"].IsDefined())
    s.stop_after_mile_marker = r.number(root, "stop_after_mile_marker", "");

  if (const YAML::Node f = root["feed"]; f.IsDefined()) {
    s.feed.cadence_s = r.number(f, "cadence_s", "feed", s.feed.cadence_s);
    s.feed.window_s = r.number(f, "window_s", "feed", s.feed.window_s);
    if (const YAML::Node fp = f["fault"]; fp.IsDefined()) {
      s.fault.latency_s = r.number(fp, "latency_s", "feed.fault", 0.0);
      s.fault.jitter_s = r.number(fp, "jitter_s", "feed.fault", 0.0);
      s.fault.loss_probability = r.number(fp, "loss_probability", "feed.fault", 0.0);
      s.fault.timeout_s = r.number(fp, "timeout_s", "feed.fault", 2.0);
      const YAML::Node outs = fp["outages"];
      if (outs.IsDefined() && r.sequence(outs, "feed.fault.outages", false, fp)) {
        for (std::size_t i = 0; i < outs.size(); ++i) {
          const std::string p = idx("feed.fault.outages", i);
          s.fault.outages.push_back({r.number(outs[i], "start", p), r.number(outs[i], "end", p)});
        }
      }
    }
  }
  if (const YAML::Node g = root["gps"]; g.IsDefined()) {
    s.gps.rate_hz = r.number(g, "rate_hz", "gps", s.gps.rate_hz);
    s.gps.noise_m = r.number(g, "noise_m", "gps", s.gps.noise_m);
  }
  read_schedule(r, root, s);
  read_vehicles(r, root, s);
  read_segments(r, root, s);

  if (!r.diags.empty()) throw ScenarioError(source_name, r.diags);

  auto semantic = validate_scenario(s);
  if (!semantic.empty()) {
    // Point semantic errors at the section they concern.
    for (auto& d : semantic) {
      const std::string head = d.field.substr(0, d.field.find_first_of(".["));
      const YAML::Node n = root[head];
      if (n.IsDefined() && n.Mark().line >= 0) {
        d.line = n.Mark().line + 1;
        d.column = n.Mark().column + 1;
      }
      const auto open = d.field.find('[');
      if (open != std::string::npos && n.IsSequence()) {
        const auto i = std::stoul(d.field.substr(open + 1));
        if (i < n.size() && n[i].Mark().line >= 0) {
          d.line = n[i].Mark().line + 1;
          d.column = n[i].Mark().column + 1;
        }
      }
    }
    throw ScenarioError(source_name, semantic);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

void apply_override(Scenario& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
  } catch (const std::exception&) {
    throw ConfigError("override '" + key + "': '" + raw + "' is not a number");
  }

  auto for_cavs = [&](auto&& fn) {
    for (auto& v : s.vehicles) {
      if (v.kind == VehicleKind::Cav) fn(v.cav);
    }
  };

  if (key == "dt") s.dt_s = value;
  else if (key == "duration") s.duration_s = value;
  else if (key == "seed") s.seed = static_cast<std::uint64_t>(value);
  else if (key == "feed.cadence") s.feed.cadence_s = value;
  else if (key == "feed.window") s.feed.window_s = value;
  else if (key == "fault.latency") s.fault.latency_s = value;
  else if (key == "fault.jitter") s.fault.jitter_s = value;
  else if (key == "fault.loss") s.fault.loss_probability = value;
  else if (key == "fault.timeout") s.fault.timeout_s = value;
  else if (key == "gps.rate_hz") s.gps.rate_hz = value;
  else if (key == "gps.noise_m") s.gps.noise_m = value;
  else if (key == "controller.k_p") for_cavs([&](CavConfig& c) { c.controller.k_p = value; });
  else if (key == "controller.k_cbf") for_cavs([&](CavConfig& c) { c.controller.k_cbf = value; });
  else if (key == "controller.t_min") for_cavs([&](CavConfig& c) { c.controller.t_min = value; });
  else if (key == "controller.s_min") for_cavs([&](CavConfig& c) { c.controller.s_min = value; });
  else if (key == "controller.u_min") for_cavs([&](CavConfig& c) { c.controller.u_min = value; });
  else if (key == "controller.u_max") for_cavs([&](CavConfig& c) { c.controller.u_max = value; });
  else if (key == "ramp.up_rate") for_cavs([&](CavConfig& c) { c.ramp_up_rate = value; });
  else if (key == "ramp.down_rate") for_cavs([&](CavConfig& c) { c.ramp_down_rate = value; });
  else if (key == "plant.lag") for_cavs([&](CavConfig& c) { c.lag_s = value; });
  else if (key == "user_set_point_mph") for_cavs([&](CavConfig& c) { c.user_set_point_mps = mph_to_mps(value); });
  else if (key == "gps2vsl.threshold_mi") for_cavs([&](CavConfig& c) { c.gps2vsl.threshold_mi = value; });
  else if (key == "gps2vsl.lookup_period_s") for_cavs([&](CavConfig& c) { c.gps2vsl.lookup_period_s = value; });
  else if (key == "gps2vsl.max_staleness_s") for_cavs([&](CavConfig& c) { c.gps2vsl.max_staleness_s = value; });
  else throw ConfigError("unknown override key '" + key + "'");

  const auto problems = validate_scenario(s);
  if (!problems.empty())
    throw ConfigError("override '" + assignment + "' rejected: " + problems.front().field + ": " +
                      problems.front().message);
}

std::string resolve_scenario_path(const std::string& name_or_path) {
  if (fs::exists(name_or_path)) return name_or_path;
  for (const auto* ext : {".yaml", ".yml", ""}) {
    const fs::path p = fs::path(VSLCAV_SCENARIO_DIR) / (name_or_path + ext);
    if (fs::exists(p)) return p.string();
  }
  return name_or_path;
}

std::vector<std::string> bundled_scenarios() {
  std::vector<std::string> names;
  const fs::path dir(VSLCAV_SCENARIO_DIR);
  if (!fs::exists(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".yaml") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace vslcav
