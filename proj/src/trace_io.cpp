#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "vslcav/simulation.hpp"

namespace vslcav {
namespace {

constexpr const char* kHeader =
    "t,vehicle,kind,position_m,mile_marker,v,a,u_cmd,mode,g_r,v_gr,vsl_valid,engaged,user_sp,"
    "source,selected,setpoint,radar_valid,s,v_l,u_nom,u_safe,active,staleness";

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  // Avoid "-0.000000" so equal traces stay byte-identical regardless of sign noise.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::string opt(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_d(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" + s + "'");
}

std::optional<double> to_opt(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return to_d(s, line);
}

VehicleKind kind_from(const std::string& s, std::size_t line) {
  if (s == "scripted") return VehicleKind::Scripted;
  if (s == "pilot") return VehicleKind::Pilot;
  if (s == "cav") return VehicleKind::Cav;
  throw std::runtime_error("trace line " + std::to_string(line) + ": unknown kind '" + s + "'");
}

SetpointSource source_from(const std::string& s) {
  if (s == "MeasuredVel") return SetpointSource::MeasuredVel;
  if (s == "Vsl") return SetpointSource::Vsl;
  return SetpointSource::User;
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  out << kHeader << '\n';
  const std::size_t ticks = trace.ticks();
  for (std::size_t k = 0; k < ticks; ++k) {
    for (const auto& veh : trace.vehicles) {
      const Sample& s = veh.samples[k];
      out << num(s.t) << ',' << veh.name << ',' << to_string(veh.kind) << ',' << num(s.position) << ','
          << num(s.mile_marker) << ',' << num(s.v) << ',' << num(s.a) << ',' << num(s.u_cmd) << ',';
      if (s.cav) {
        const CavSample& c = *s.cav;
        out << to_string(c.mode) << ',' << c.relevant_gantry.value_or("") << ',' << opt(c.v_gr) << ','
            << int(c.vsl_valid) << ',' << int(c.engaged) << ',' << num(c.user_set_point) << ','
            << to_string(c.source) << ',' << num(c.selected) << ',' << num(c.setpoint) << ','
            << int(c.radar.valid) << ',';
        if (c.radar.valid)
          out << num(c.radar.spacing) << ',' << num(c.radar.lead_speed);
        else
          out << ',';
        out << ',' << num(c.u_nom) << ',' << opt(c.u_safe) << ',' << to_string(c.active) << ','
            << opt(c.staleness);
      } else {
        out << ",,,,,,,,,,,,,,,";
      }
      out << '\n';
    }
  }
}

SimulationTrace read_trace_csv(std::istream& in) {
  SimulationTrace trace;
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("trace: unexpected header");
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 24) throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 24 fields");
    auto it = index.find(f[1]);
    if (it == index.end()) {
      it = index.emplace(f[1], trace.vehicles.size()).first;
      trace.vehicles.push_back({f[1], kind_from(f[2], lineno), 4.6, {}});
    }
    Sample s;
    s.t = to_d(f[0], lineno);
    s.position = to_d(f[3], lineno);
    s.mile_marker = to_d(f[4], lineno);
    s.v = to_d(f[5], lineno);
    s.a = to_d(f[6], lineno);
    s.u_cmd = to_d(f[7], lineno);
    if (!f[8].empty()) {
      CavSample c;
      c.mode = f[8] == "Active" ? Gps2VslMode::Active : Gps2VslMode::Idle;
      if (!f[9].empty()) c.relevant_gantry = f[9];
      c.v_gr = to_opt(f[10], lineno);
      c.vsl_valid = f[11] == "1";
      c.engaged = f[12] == "1";
      c.user_set_point = to_d(f[13], lineno);
      c.source = source_from(f[14]);
      c.selected = to_d(f[15], lineno);
      c.setpoint = to_d(f[16], lineno);
      c.radar.valid = f[17] == "1";
      if (c.radar.valid) {
        c.radar.spacing = to_d(f[18], lineno);
        c.radar.lead_speed = to_d(f[19], lineno);
      }
      c.u_nom = to_d(f[20], lineno);
      c.u_safe = to_opt(f[21], lineno);
      c.active = f[22] == "SafetyFilter" ? ActiveController::SafetyFilter : ActiveController::Nominal;
      c.staleness = to_opt(f[23], lineno);
      s.cav = std::move(c);
    }
    trace.vehicles[it->second].samples.push_back(std::move(s));
  }
  if (trace.vehicles.empty()) throw std::runtime_error("trace: no rows");
  const auto& first = trace.vehicles.front().samples;
  if (first.size() > 1) trace.dt = first[1].t - first[0].t;
  return trace;
}

void write_events_csv(const SimulationTrace& trace, std::ostream& out) {
  out << "t,vehicle,event,detail\n";
  for (const auto& e : trace.events) out << num(e.t) << ',' << e.vehicle << ',' << e.kind << ',' << e.detail << '\n';
}

}  // namespace vslcav
