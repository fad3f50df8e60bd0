#include <algorithm>

#include <gtest/gtest.h>

#include "vslcav/scenario.hpp"

using namespace vslcav;

namespace {

const char* kMinimal = R"(name: minimal
duration_s: 30
corridor:
  start_mile_marker: 60.0
  end_mile_marker: 58.0
  gantries:
    - {id: A, mile_marker: 59.5}
    - {id: B, mile_marker: 59.0, default_limit_mph: 65}
vsl_schedule:
  - {gantry: A, posted_mph: 40, at: 10}
  - {gantry: B, posted_mph: 65, at: 0}
vehicles:
  - name: lead
    kind: scripted
    mile_marker: 59.8
    speed: 15
    profile:
      - {constant: 15, duration: 10}
      - {ramp: 12, duration: 3}
      - {constant: 12}
  - name: ego
    kind: cav
    mile_marker: 59.85
    speed: 15
    user_set_point_mph: 45
)";

std::vector<Diagnostic> diagnostics_of(const std::string& text) {
  try {
    parse_scenario(text, "t.yaml");
  } catch (const ScenarioError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<Diagnostic>& d, const std::string& field) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.field.find(field) != std::string::npos; });
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST(Scenario, MinimalParses) {
  const Scenario s = parse_scenario(kMinimal);
  EXPECT_EQ(s.name, "minimal");
  ASSERT_EQ(s.vehicles.size(), 2u);
  EXPECT_EQ(s.vehicles[0].kind, VehicleKind::Scripted);
  EXPECT_EQ(s.vehicles[1].kind, VehicleKind::Cav);
  EXPECT_DOUBLE_EQ(s.vehicles[1].cav.user_set_point_mps, mph_to_mps(45));
  EXPECT_DOUBLE_EQ(s.vehicles[0].profile.speed_at(11.5), 13.5);
  ASSERT_EQ(s.corridor.gantries().size(), 2u);
  EXPECT_DOUBLE_EQ(s.corridor.find_gantry("B")->default_limit_mph, 65);
  // Sorted by time; `triggered` derived from posted < default.
  ASSERT_EQ(s.vsl_schedule.size(), 2u);
  EXPECT_EQ(s.vsl_schedule[0].gantry_id, "B");
  EXPECT_FALSE(s.vsl_schedule[0].triggered);
  EXPECT_TRUE(s.vsl_schedule[1].triggered);
  EXPECT_DOUBLE_EQ(s.dt_s, 0.05);
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Scenario, BundledScenariosAllParse) {
  const auto names = bundled_scenarios();
  EXPECT_GE(names.size(), 6u);
  for (const char* want : {"fig7_three_cases", "fig8_set_and_hold", "fig9_safety_filter", "table1_wave_comparison",
                           "feed_fault", "reengage_bumpless"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  for (const auto& n : names) {
    EXPECT_NO_THROW(load_scenario(resolve_scenario_path(n))) << n;
  }
}

TEST(Scenario, MissingGantriesNamesFieldAndLine) {
  const std::string text = replace(kMinimal,
                                   "  gantries:\n    - {id: A, mile_marker: 59.5}\n"
                                   "    - {id: B, mile_marker: 59.0, default_limit_mph: 65}\n",
                                   "");
  try {
    parse_scenario(text, "t.yaml");
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    ASSERT_TRUE(mentions(e.diagnostics(), "corridor.gantries"));
    const auto& d = *std::find_if(e.diagnostics().begin(), e.diagnostics().end(),
                                  [](const Diagnostic& x) { return x.field == "corridor.gantries"; });
    EXPECT_EQ(d.line, 4);
    EXPECT_NE(std::string(e.what()).find("t.yaml:4:"), std::string::npos) << e.what();
  }
}

TEST(Scenario, TypeErrorsCarryLineNumbers) {
  const auto d = diagnostics_of(replace(kMinimal, "duration_s: 30", "duration_s: thirty"));
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].line, 2);
  EXPECT_TRUE(mentions(d, "duration_s"));
}

TEST(Scenario, SemanticErrors) {
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "gantry: A, posted_mph: 40", "gantry: Z, posted_mph: 40")),
                       "vsl_schedule"));
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "gantry: A, posted_mph: 40", "gantry: A, posted_mph: 20")),
                       "vsl_schedule"));
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "name: ego", "name: lead")), "vehicles"));
  // Ego ahead of the lead.
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "mile_marker: 59.85", "mile_marker: 59.7")), "vehicles"));
  // Lead braking harder than the suite bound.
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "{ramp: 12, duration: 3}", "{ramp: 2, duration: 3}")),
                       "vehicles"));
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "kind: cav", "kind: bus")), "kind"));
  EXPECT_TRUE(mentions(diagnostics_of(replace(kMinimal, "duration_s: 30", "duration_s: -1")), "duration_s"));
}

TEST(Scenario, ReportsEveryProblem) {
  std::string text = replace(kMinimal, "duration_s: 30", "duration_s: thirty");
  text = replace(text, "kind: cav", "kind: bus");
  EXPECT_GE(diagnostics_of(text).size(), 2u);
  text = replace(kMinimal, "duration_s: 30", "duration_s: -1");
  text = replace(text, "posted_mph: 40", "posted_mph: 20");
  EXPECT_GE(diagnostics_of(text).size(), 2u);
}

TEST(Scenario, Overrides) {
  Scenario s = parse_scenario(kMinimal);
  apply_override(s, "controller.k_p=0.6");
  EXPECT_DOUBLE_EQ(s.vehicles[1].cav.controller.k_p, 0.6);
  apply_override(s, "dt=0.025");
  EXPECT_DOUBLE_EQ(s.dt_s, 0.025);
  apply_override(s, "user_set_point_mph=50");
  EXPECT_DOUBLE_EQ(s.vehicles[1].cav.user_set_point_mps, mph_to_mps(50));
  EXPECT_THROW(apply_override(s, "controller.k_p"), ConfigError);
  EXPECT_THROW(apply_override(s, "no.such.key=1"), ConfigError);
  EXPECT_THROW(apply_override(s, "dt=fast"), ConfigError);
  EXPECT_THROW(apply_override(s, "controller.u_min=1"), ConfigError);
  EXPECT_THROW(apply_override(s, "dt=0"), ConfigError);
  EXPECT_THROW(apply_override(s, "fault.loss=2"), ConfigError);
}

TEST(Scenario, ResolvesBundledNames) {
  const auto p = resolve_scenario_path("fig7_three_cases");
  EXPECT_NE(p.find("fig7_three_cases.yaml"), std::string::npos);
  EXPECT_EQ(load_scenario(p).name, "fig7_three_cases");
}

TEST(Scenario, EngagedWindows) {
  CavConfig c;
  c.disengaged = {{40, 60, -0.5}};
  EXPECT_TRUE(c.engaged_at(39.95));
  EXPECT_FALSE(c.engaged_at(40.0));
  EXPECT_FALSE(c.engaged_at(59.95));
  EXPECT_TRUE(c.engaged_at(60.0));
}
