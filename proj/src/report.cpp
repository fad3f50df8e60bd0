#include "vslcav/report.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace vslcav {
namespace {

using nlohmann::ordered_json;

std::string f3(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string f6(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

ordered_json opt_json(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); }

std::optional<double> opt_from(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

VehicleKind kind_from(const std::string& s) {
  if (s == "pilot") return VehicleKind::Pilot;
  if (s == "cav") return VehicleKind::Cav;
  if (s == "scripted") return VehicleKind::Scripted;
  throw MetricsError("unknown vehicle kind '" + s + "'");
}

}  // namespace

RunSummary summarize_run(const SimulationTrace& trace, const std::vector<Segment>& segments) {
  RunSummary out;
  out.scenario = trace.scenario;
  out.seed = trace.seed;
  out.dt = trace.dt;
  out.ticks = trace.ticks();
  out.collision = trace.collision;
  out.min_spacing_m = trace.min_spacing_m;
  out.segments = segments;
  for (const auto& v : trace.vehicles) {
    VehicleReport r;
    r.name = v.name;
    r.kind = v.kind;
    if (!segments.empty()) {
      try {
        r.segments = segment_stats(v, segments);
      } catch (const MetricsError&) {
        r.segments.clear();
      }
    }
    if (v.kind == VehicleKind::Cav) r.events = extract_rise_fall(v);
    out.vehicles.push_back(std::move(r));
  }
  return out;
}

std::string summary_to_json(const RunSummary& s) {
  ordered_json j;
  j["format"] = "vslcav-summary/1";
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["dt"] = s.dt;
  j["ticks"] = s.ticks;
  j["collision"] = s.collision;
  j["min_spacing_m"] = opt_json(s.min_spacing_m);
  j["segments"] = ordered_json::array();
  for (const auto& seg : s.segments) j["segments"].push_back({seg.lo, seg.hi});
  j["vehicles"] = ordered_json::array();
  for (const auto& v : s.vehicles) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["kind"] = to_string(v.kind);
    jv["segments"] = ordered_json::array();
    for (const auto& st : v.segments) {
      jv["segments"].push_back({{"lo", st.segment.lo},
                                {"hi", st.segment.hi},
                                {"mean", st.mean},
                                {"std", st.std},
                                {"nmse", st.nmse},
                                {"cv", st.cv},
                                {"samples", st.samples}});
    }
    jv["events"] = ordered_json::array();
    for (const auto& e : v.events) {
      jv["events"].push_back({{"kind", to_string(e.kind)},
                              {"t_start", e.t_start},
                              {"t_end", opt_json(e.t_end)},
                              {"from", e.from},
                              {"to", e.to},
                              {"delta_v", e.delta_v},
                              {"complete", e.complete},
                              {"incomplete_reason", e.incomplete_reason}});
    }
    j["vehicles"].push_back(std::move(jv));
  }
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    RunSummary s;
    s.scenario = j.value("scenario", "");
    s.seed = j.value("seed", std::uint64_t{0});
    s.dt = j.value("dt", 0.0);
    s.ticks = j.value("ticks", std::size_t{0});
    s.collision = j.value("collision", false);
    if (j.contains("min_spacing_m")) s.min_spacing_m = opt_from(j["min_spacing_m"]);
    for (const auto& seg : j.at("segments")) s.segments.push_back({seg.at(0).get<double>(), seg.at(1).get<double>()});
    for (const auto& jv : j.at("vehicles")) {
      VehicleReport v;
      v.name = jv.at("name").get<std::string>();
      v.kind = kind_from(jv.at("kind").get<std::string>());
      for (const auto& js : jv.value("segments", ordered_json::array())) {
        SegmentStats st;
        st.segment = {js.at("lo").get<double>(), js.at("hi").get<double>()};
        st.mean = js.at("mean").get<double>();
        st.std = js.at("std").get<double>();
        st.nmse = js.value("nmse", st.std);
        st.cv = js.value("cv", st.mean > 0 ? st.std / st.mean : 0.0);
        st.samples = js.value("samples", std::size_t{0});
        v.segments.push_back(st);
      }
      for (const auto& je : jv.value("events", ordered_json::array())) {
        RiseFallEvent e;
        e.kind = je.at("kind").get<std::string>() == "rise" ? StepKind::Rise : StepKind::Fall;
        e.t_start = je.at("t_start").get<double>();
        e.t_end = opt_from(je.at("t_end"));
        e.from = je.value("from", 0.0);
        e.to = je.value("to", 0.0);
        e.delta_v = je.at("delta_v").get<double>();
        e.complete = je.at("complete").get<bool>();
        e.incomplete_reason = je.value("incomplete_reason", "");
        v.events.push_back(e);
      }
      s.vehicles.push_back(std::move(v));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw MetricsError(std::string("summary: ") + e.what());
  }
}

const VehicleReport* primary_vehicle(const RunSummary& summary) {
  for (auto kind : {VehicleKind::Cav, VehicleKind::Pilot}) {
    for (const auto& v : summary.vehicles) {
      if (v.kind == kind) return &v;
    }
  }
  return summary.vehicles.empty() ? nullptr : &summary.vehicles.front();
}

std::vector<ComparisonRow> compare(const VehicleReport* pilot, const VehicleReport* ego) {
  if (pilot && pilot->segments.empty()) pilot = nullptr;
  if (ego && ego->segments.empty()) ego = nullptr;
  std::vector<ComparisonRow> rows;
  if (pilot && ego) {
    const auto reductions = variance_reduction(ego->segments, pilot->segments);
    for (std::size_t i = 0; i < reductions.size(); ++i) {
      ComparisonRow r;
      r.segment = ego->segments[i].segment;
      r.pilot = pilot->segments[i];
      r.ego = ego->segments[i];
      r.std_reduction_pct = reductions[i];
      r.cv_reduction_pct = cv_reduction(ego->segments[i], pilot->segments[i]);
      rows.push_back(r);
    }
    return rows;
  }
  const VehicleReport* only = pilot ? pilot : ego;
  if (!only) return rows;
  for (const auto& st : only->segments) {
    ComparisonRow r;
    r.segment = st.segment;
    (pilot ? r.pilot : r.ego) = st;
    rows.push_back(r);
  }
  return rows;
}

std::string render_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  auto cell = [](const std::optional<SegmentStats>& s) {
    return s ? "(" + f3(s->nmse) + "/" + f3(s->mean) + ")" : std::string("(absent)");
  };
  auto pct = [](const std::optional<double>& p) { return p ? f3(*p) + "%" : std::string("undefined"); };
  os << "| mm | Pilot (NMSE/Mean) | Ego (NMSE/Mean) | std reduction | cv reduction |\n";
  os << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    char mm[64];
    std::snprintf(mm, sizeof mm, "%.1f-%.1f", r.segment.lo, r.segment.hi);
    const bool both = r.pilot && r.ego;
    os << "| " << mm << " | " << cell(r.pilot) << " | " << cell(r.ego) << " | "
       << (both ? pct(r.std_reduction_pct) : "absent") << " | " << (both ? pct(r.cv_reduction_pct) : "absent")
       << " |\n";
  }
  return os.str();
}

std::string render_events(const std::vector<RiseFallEvent>& events) {
  std::ostringstream os;
  os << "| kind | events | complete | min [s] | max [s] | mean [s] | |dv| range [m/s] |\n";
  os << "|---|---|---|---|---|---|---|\n";
  auto o = [](const std::optional<double>& x) { return x ? f3(*x) : std::string("-"); };
  for (auto kind : {StepKind::Rise, StepKind::Fall}) {
    const auto s = summarize_events(events, kind);
    os << "| " << to_string(kind) << " | " << s.count << " | " << s.complete << " | " << o(s.min) << " | "
       << o(s.max) << " | " << o(s.mean) << " | "
       << (s.min_delta ? o(s.min_delta) + "-" + o(s.max_delta) : std::string("-")) << " |\n";
  }
  os << "\n| t_start | kind | from | to | duration [s] | status |\n|---|---|---|---|---|---|\n";
  for (const auto& e : events) {
    os << "| " << f3(e.t_start) << " | " << to_string(e.kind) << " | " << f3(e.from) << " | " << f3(e.to)
       << " | " << o(e.duration()) << " | " << (e.complete ? "complete" : e.incomplete_reason) << " |\n";
  }
  return os.str();
}

void write_speed_profile_csv(const SimulationTrace& trace, std::ostream& out) {
  out << "vehicle,kind,t,mile_marker,v\n";
  for (const auto& v : trace.vehicles) {
    for (const auto& s : v.samples)
      out << v.name << ',' << to_string(v.kind) << ',' << f6(s.t) << ',' << f6(s.mile_marker) << ',' << f6(s.v)
          << '\n';
  }
}

void write_controller_state_csv(const SimulationTrace& trace, std::ostream& out) {
  out << "vehicle,t,mile_marker,v,v_gr,selected,setpoint,source,active,u_nom,u_safe,u_cmd,g_r\n";
  for (const auto& v : trace.vehicles) {
    if (v.kind != VehicleKind::Cav) continue;
    for (const auto& s : v.samples) {
      const CavSample& c = *s.cav;
      out << v.name << ',' << f6(s.t) << ',' << f6(s.mile_marker) << ',' << f6(s.v) << ','
          << (c.v_gr ? f6(*c.v_gr) : "") << ',' << f6(c.selected) << ',' << f6(c.setpoint) << ','
          << to_string(c.source) << ',' << to_string(c.active) << ',' << f6(c.u_nom) << ','
          << (c.u_safe ? f6(*c.u_safe) : "") << ',' << f6(s.u_cmd) << ',' << c.relevant_gantry.value_or("")
          << '\n';
    }
  }
}

std::string plot_script() {
  return R"(#!/usr/bin/env python3
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

root = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
speed = pd.read_csv(root / "speed_profile.csv")
ctrl = pd.read_csv(root / "controller_state.csv")

fig, ax = plt.subplots(figsize=(9, 4))
for name, g in speed.groupby("vehicle"):
    ax.plot(g["mile_marker"], g["v"], label=name)
ax.invert_xaxis()
ax.set_xlabel("mile marker")
ax.set_ylabel("speed [m/s]")
ax.legend()
fig.tight_layout()
fig.savefig(root / "speed_by_mile_marker.png", dpi=150)

for name, g in ctrl.groupby("vehicle"):
    fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
    a1.plot(g["t"], g["v_gr"], label="v_gr")
    a1.plot(g["t"], g["setpoint"], label="ramped setpoint")
    a1.plot(g["t"], g["v"], label="v")
    a1.set_ylabel("speed [m/s]")
    a1.legend()
    a2.plot(g["t"], g["u_cmd"], label="u_cmd")
    a2.fill_between(g["t"], -4, 3, where=g["active"] == "SafetyFilter", alpha=0.2, label="safety filter")
    a2.set_ylabel("accel [m/s^2]")
    a2.set_xlabel("t [s]")
    a2.legend()
    fig.tight_layout()
    fig.savefig(root / f"controller_{name}.png", dpi=150)
)";
}

}  // namespace vslcav
