// vslcav: run, validate and report on VSL-following CAV scenarios, and
// serve the VSL snapshot feed standalone.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "vslcav/feed_http.hpp"
#include "vslcav/report.hpp"
#include "vslcav/scenario.hpp"
#include "vslcav/simulation.hpp"

namespace fs = std::filesystem;
using namespace vslcav;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kRuntime = 3, kIo = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Scenario load(const std::string& name, const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed) {
  const std::string path = resolve_scenario_path(name);
  if (!fs::exists(path)) throw IoError("scenario not found: " + name);
  Scenario s = load_scenario(path);
  for (const auto& o : overrides) apply_override(s, o);
  if (seed) s.seed = *seed;
  return s;
}

std::vector<Segment> parse_segments(const std::string& spec) {
  std::vector<Segment> out;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--segments", "expected lo:hi[,lo:hi...]");
    out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
  }
  return out;
}

void write_run_outputs(const SimulationTrace& trace, const Scenario& sc, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ostringstream os;
    write_trace_csv(trace, os);
    write_file(dir / "trace.csv", os.str());
  }
  {
    std::ostringstream os;
    write_events_csv(trace, os);
    write_file(dir / "events.csv", os.str());
  }
  const RunSummary summary = summarize_run(trace, sc.segments);
  write_file(dir / "run_summary.json", summary_to_json(summary));

  std::ostringstream report;
  report << "# " << sc.name << "\n\n";
  const VehicleReport* pilot = nullptr;
  const VehicleReport* ego = nullptr;
  for (const auto& v : summary.vehicles) {
    if (!pilot && v.kind == VehicleKind::Pilot) pilot = &v;
    if (!ego && v.kind == VehicleKind::Cav) ego = &v;
  }
  if (!sc.segments.empty()) report << render_comparison(compare(pilot, ego)) << "\n";
  if (ego) report << render_events(ego->events);
  write_file(dir / "report.md", report.str());

  std::ostringstream speed, ctrl;
  write_speed_profile_csv(trace, speed);
  write_controller_state_csv(trace, ctrl);
  write_file(dir / "speed_profile.csv", speed.str());
  write_file(dir / "controller_state.csv", ctrl.str());
  write_file(dir / "plot.py", plot_script());
}

int cmd_run(const std::string& scenario, const std::string& out, std::optional<std::uint64_t> seed,
            const std::string& transport, const std::vector<std::string>& overrides) {
  const Scenario sc = load(scenario, overrides, seed);
  RunOptions opts;
  opts.transport = transport == "socket" ? Transport::Socket : Transport::InProcess;
  const SimulationTrace trace = run_scenario(sc, opts);
  write_run_outputs(trace, sc, out);
  std::cout << sc.name << ": " << trace.ticks() << " ticks, " << trace.events.size() << " events, "
            << (trace.collision ? "COLLISION" : "no collision") << ", " << trace.wall_time_s << " s wall\n";
  if (trace.wall_time_s > sc.runtime_budget_s)
    std::cerr << "warning: run exceeded its runtime budget of " << sc.runtime_budget_s << " s\n";
  std::cout << read_file(fs::path(out) / "report.md");
  return kOk;
}

int cmd_validate(const std::vector<std::string>& scenarios) {
  int status = kOk;
  for (const auto& name : scenarios) {
    try {
      const Scenario s = load(name, {}, std::nullopt);
      std::cout << resolve_scenario_path(name) << ": ok (" << s.vehicles.size() << " vehicles, "
                << s.corridor.gantries().size() << " gantries)\n";
    } catch (const ScenarioError& e) {
      std::cerr << e.what() << "\n";
      status = kValidation;
    }
  }
  return status;
}

std::atomic<bool> g_stop{false};

int cmd_serve(const std::string& scenario, const std::string& host, int port, double cadence, double window) {
  const Scenario sc = load(scenario, {}, std::nullopt);
  FeedConfig cfg = sc.feed;
  if (cadence > 0) cfg.cadence_s = cadence;
  if (window > 0) cfg.window_s = window;
  FeedService service(sc.corridor.gantries(), cfg);
  FeedHttpServer server(service, wall_clock_seconds);
  try {
    port = server.start(host, port);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  SnapshotScheduler scheduler(service, wall_clock_seconds);
  scheduler.start();
  std::cout << "serving " << sc.corridor.gantries().size() << " gantries on http://" << host << ":" << port
            << kSnapshotPath << " (updates: POST " << kUpdatePath << ", cadence " << cfg.cadence_s << " s)"
            << std::endl;
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  scheduler.stop();
  server.stop();
  return kOk;
}

int cmd_inject(const std::string& host, int port, const std::string& gantry, double mph,
               std::optional<double> at) {
  GantryUpdate u;
  u.gantry_id = gantry;
  u.posted_speed_mph = mph;
  u.effective_at = at.value_or(0.0);
  const auto [status, body] = post_update(host, port, u, false, at.has_value());
  if (status == 0) throw IoError("no response from http://" + host + ":" + std::to_string(port));
  std::cout << status << " " << body << "\n";
  return status == 200 ? kOk : kValidation;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& segments_spec, const std::string& out) {
  if (inputs.empty() || inputs.size() > 2) throw CLI::ValidationError("report", "expects one or two inputs");
  std::vector<Segment> segments = segments_spec.empty() ? std::vector<Segment>{} : parse_segments(segments_spec);
  std::vector<RunSummary> summaries;
  std::vector<SimulationTrace> traces;
  for (const auto& in : inputs) {
    const std::string text = read_file(in);
    if (fs::path(in).extension() == ".json") {
      RunSummary s = summary_from_json(text);
      if (!segments.empty() && s.segments != segments)
        throw MetricsError(in + ": summary segments differ from --segments");
      summaries.push_back(std::move(s));
    } else {
      std::istringstream is(text);
      traces.push_back(read_trace_csv(is));
      summaries.push_back(summarize_run(traces.back(), segments));
      summaries.back().scenario = fs::path(in).stem().string();
    }
  }
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& vs = summaries[i].vehicles;
    const bool covered = std::any_of(vs.begin(), vs.end(), [](const VehicleReport& v) { return !v.segments.empty(); });
    if (!summaries[i].segments.empty() && !covered)
      throw MetricsError(inputs[i] + ": no vehicle covers every requested segment");
  }
  if (summaries.size() == 2 && summaries[0].segments != summaries[1].segments)
    throw MetricsError("inputs use different segment lists");

  const VehicleReport* pilot = nullptr;
  const VehicleReport* ego = nullptr;
  if (summaries.size() == 2) {
    pilot = primary_vehicle(summaries[0]);
    ego = primary_vehicle(summaries[1]);
  } else {
    for (const auto& v : summaries[0].vehicles) {
      if (!pilot && v.kind == VehicleKind::Pilot) pilot = &v;
      if (!ego && v.kind == VehicleKind::Cav) ego = &v;
    }
  }
  std::ostringstream report;
  report << render_comparison(compare(pilot, ego));
  if (ego && !ego->events.empty()) report << "\n" << render_events(ego->events);
  std::cout << report.str();

  if (!out.empty()) {
    fs::create_directories(out);
    write_file(fs::path(out) / "report.md", report.str());
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const std::string suffix = traces.size() > 1 ? "_" + std::to_string(i) : "";
      std::ostringstream speed, ctrl;
      write_speed_profile_csv(traces[i], speed);
      write_controller_state_csv(traces[i], ctrl);
      write_file(fs::path(out) / ("speed_profile" + suffix + ".csv"), speed.str());
      write_file(fs::path(out) / ("controller_state" + suffix + ".csv"), ctrl.str());
    }
    if (!traces.empty()) write_file(fs::path(out) / "plot.py", plot_script());
  }
  return kOk;
}

int cmd_reproduce(std::vector<std::string> names, const std::string& out) {
  if (names.empty()) names = bundled_scenarios();
  for (const auto& name : names) {
    const Scenario sc = load(name, {}, std::nullopt);
    const SimulationTrace trace = run_scenario(sc);
    write_run_outputs(trace, sc, fs::path(out) / sc.name);
    std::cout << "== " << sc.name << " (" << trace.wall_time_s << " s)\n"
              << read_file(fs::path(out) / sc.name / "report.md") << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VSL-following connected and automated vehicle simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string transport = "in-process";
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run a scenario and write trace, summary and report");
  run->add_option("--scenario,-s", scenario, "Scenario file or bundled scenario name")->required();
  run->add_option("--out,-o", out, "Output directory")->capture_default_str();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--transport", transport, "Feed transport")
      ->check(CLI::IsMember({"in-process", "socket"}))
      ->capture_default_str();
  run->add_option("--set", overrides,
                  "key=value override (dt, duration, seed, feed.cadence, feed.window, fault.latency, "
                  "fault.jitter, fault.loss, fault.timeout, gps.rate_hz, gps.noise_m, controller.k_p, "
                  "controller.k_cbf, controller.t_min, controller.s_min, controller.u_min, controller.u_max, "
                  "ramp.up_rate, ramp.down_rate, plant.lag, user_set_point_mph, gps2vsl.threshold_mi, "
                  "gps2vsl.lookup_period_s, gps2vsl.max_staleness_s)");

  std::vector<std::string> to_validate;
  auto* validate = app.add_subcommand("validate", "Check scenario files and print line-located diagnostics");
  validate->add_option("scenarios", to_validate, "Scenario files or bundled names")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  double cadence = 0.0;
  double window = 0.0;
  auto* serve = app.add_subcommand("serve", "Serve the VSL snapshot feed over HTTP until interrupted");
  serve->add_option("--scenario,-s", scenario, "Scenario whose corridor defines the gantries")->required();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port,-p", port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--cadence", cadence, "Snapshot rebuild cadence in seconds (default: scenario, 15)");
  serve->add_option("--window", window, "Update window in seconds (default: scenario, 86400)");

  std::string gantry;
  double mph = 0.0;
  std::optional<double> at;
  auto* inject = app.add_subcommand("inject", "POST one gantry update to a running feed");
  inject->add_option("--host", host, "Feed host")->capture_default_str();
  inject->add_option("--port,-p", port, "Feed port")->capture_default_str();
  inject->add_option("--gantry,-g", gantry, "Gantry id")->required();
  inject->add_option("--mph", mph, "Posted speed in mph")->required()->check(CLI::Range(30.0, 70.0));
  inject->add_option("--at", at, "Effective time in seconds since epoch (default: server clock)");

  std::vector<std::string> inputs;
  std::string segments;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Table and event report from traces or run summaries");
  report->add_option("inputs", inputs, "trace.csv or run_summary.json; with two inputs the first is the pilot")
      ->required();
  report->add_option("--segments", segments, "Mile-marker segments lo:hi[,lo:hi...]");
  report->add_option("--out,-o", report_out, "Directory for report.md and plot-ready CSVs");

  std::vector<std::string> names;
  auto* reproduce = app.add_subcommand("reproduce", "Run bundled scenarios and write all outputs");
  reproduce->add_option("names", names, "Bundled scenario names (default: all)");
  reproduce->add_option("--out,-o", out, "Output directory")->capture_default_str();

  app.add_subcommand("scenarios", "List bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(scenario, out, seed, transport, overrides);
    if (*validate) return cmd_validate(to_validate);
    if (*serve) return cmd_serve(scenario, host, port, cadence, window);
    if (*inject) return cmd_inject(host, port, gantry, mph, at);
    if (*report) return cmd_report(inputs, segments, report_out);
    if (*reproduce) return cmd_reproduce(names, out);
    for (const auto& n : bundled_scenarios()) std::cout << n << "\n";
    return kOk;
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const MetricsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
