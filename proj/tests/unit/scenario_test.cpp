#include <gtest/gtest.h>

#include <algorithm>

#include "microgrid/scenario.hpp"

using namespace microgrid;

namespace {

std::vector<Issue> issues_of(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<Issue>& issues, std::string_view needle, int line = -1) {
  return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) {
    return i.message.find(needle) != std::string::npos && (line < 0 || i.line == line);
  });
}

constexpr const char* kMinimal = R"(
[sim]
t_end = 2

[grid]

[load.main]
r = 121
)";

}  // namespace

TEST(Parse, BundledGridFixture) {
  const auto s = load_scenario("fig3_1");
  EXPECT_EQ(s.name, "fig3_1");
  EXPECT_EQ(s.sim.t_end, 15.0);
  ASSERT_TRUE(s.grid.has_value());
  ASSERT_EQ(s.machines.size(), 1u);
  EXPECT_EQ(s.machines[0].mode, FrequencyMode::const_power);
  EXPECT_EQ(s.machines[0].p_mech, 5e5);
  EXPECT_EQ(s.machines[0].avr, AvrMode::pi);
  ASSERT_EQ(s.loads.size(), 1u);
  EXPECT_NEAR(3 * line_to_phase(11e3) * line_to_phase(11e3) / s.loads[0].params.r, 1e6, 0.01e6);
}

TEST(Parse, BundledQuadratureStepFixture) {
  const auto s = load_scenario("fig5_12");
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].action, EventAction::set_iq);
  EXPECT_EQ(s.events[0].time, 3.0);
  EXPECT_EQ(s.events[0].value, 30.0);
  ASSERT_EQ(s.winds.size(), 1u);
  EXPECT_EQ(s.winds[0].iq_rms, 15.0);
}

TEST(Parse, EveryFixtureLoads) {
  for (const char* name : {"fig3_1", "fig3_12", "fig3_15", "fig3_17", "fig3_23", "fig3_25", "fig4_2", "fig5_1",
                           "fig5_8", "fig5_12", "appC2"}) {
    EXPECT_NO_THROW(load_scenario(name)) << name;
  }
}

TEST(Parse, WindSeriesResolvesRelativeToScenario) {
  const auto s = load_scenario("appC2");
  ASSERT_TRUE(s.winds[0].series.has_value());
  EXPECT_EQ(s.winds[0].series->samples.size(), 11u);
  EXPECT_NEAR(s.winds[0].current_at(1.0).id_rms, 10.76, 0.005);
}

TEST(Parse, EmptyDevicesHaveNoVoltageSource) {
  EXPECT_TRUE(mentions(issues_of("[sim]\nt_end = 1\n"), "no voltage source"));
}

TEST(Parse, CollectsEveryError) {
  const auto issues = issues_of(R"([sim]
t_end = 1
bogus = 3

[machine.a]
s_rated = -5
mode = warp

[machine.a]

[load.l]
r = abc

[event.e]
time = 0.5
action = close_switch
target = ghost
)");
  EXPECT_TRUE(mentions(issues, "unknown key 'bogus'", 3));
  EXPECT_TRUE(mentions(issues, "mode must be", 7));
  EXPECT_TRUE(mentions(issues, "duplicate section", 9));
  EXPECT_TRUE(mentions(issues, "expects a number", 12));
  EXPECT_TRUE(mentions(issues, "does not resolve", 14));
  EXPECT_TRUE(mentions(issues, "s_rated", 5));
  EXPECT_GE(issues.size(), 6u);
}

TEST(Parse, DuplicateIdsAcrossKinds) {
  const auto issues = issues_of(R"([grid]
[machine.x]
mode = const_power
[load.x]
r = 10
)");
  EXPECT_TRUE(mentions(issues, "duplicate device id 'x'", 4));
}

TEST(Parse, EventChecks) {
  const std::string base = kMinimal;
  EXPECT_TRUE(mentions(issues_of(base + "[event.e]\ntime = 5\naction = open_switch\ntarget = main\n"), "within [0, t_end]"));
  EXPECT_TRUE(mentions(issues_of(base + "[event.e]\ntime = 1\naction = set_mech_power\ntarget = main\n"),
                       "needs a value"));
  EXPECT_TRUE(mentions(issues_of(base + "[event.e]\ntime = 1\naction = explode\ntarget = main\n"), "unknown action"));
  EXPECT_TRUE(mentions(issues_of(base + "[event.e]\naction = open_switch\ntarget = main\n"), "missing 'time'"));
  EXPECT_TRUE(issues_of(base + "[event.e]\ntime = 1\naction = open_switch\ntarget = main\n").empty());
}

TEST(Parse, FrequencyReferenceRequiredWhenIslanded) {
  const auto issues = issues_of("[machine.a]\nmode = const_power\np_mech = 1e5\n[load.l]\nr = 100\n");
  EXPECT_TRUE(mentions(issues, "no frequency reference"));
}

TEST(Parse, SpeedReferenceMustMatchGrid) {
  const auto issues = issues_of("[grid]\nf = 50\n[machine.a]\nmode = speed_ref\nf0 = 60\n[load.l]\nr = 100\n");
  EXPECT_TRUE(mentions(issues, "differs from the grid"));
}

TEST(Parse, CommentsAndLocaleIndependentNumbers) {
  const auto s = parse_scenario("# header\n[sim]\nt_end = 2.5 # trailing\n[grid]\nv_ll = 1.1e4\n[load.l]\nr = 121\n");
  EXPECT_EQ(s.sim.t_end, 2.5);
  EXPECT_EQ(s.grid->params.v_ll, 11000.0);
  EXPECT_FALSE(issues_of("[grid]\n[load.l]\nr = 1,5\n").empty());
}

TEST(Parse, EventsSortedStably) {
  const auto s = parse_scenario(std::string(kMinimal) +
                                "[load.b]\nr = 200\nconnected = false\n"
                                "[event.late]\ntime = 1.5\naction = open_switch\ntarget = main\n"
                                "[event.first]\ntime = 0.5\naction = close_switch\ntarget = b\n"
                                "[event.second]\ntime = 0.5\naction = open_switch\ntarget = b\n");
  ASSERT_EQ(s.events.size(), 3u);
  EXPECT_EQ(s.events[0].name, "first");
  EXPECT_EQ(s.events[1].name, "second");
  EXPECT_EQ(s.events[2].name, "late");
}

TEST(AtTime, AppliesEventsUpToTime) {
  const auto s = load_scenario("fig3_17");
  EXPECT_EQ(s.at_time(0.5).machines[1].p_mech, 0.0);
  EXPECT_EQ(s.at_time(1.0).machines[1].p_mech, 5e5);
  EXPECT_EQ(s.at_time(4.0).machines[1].p_mech, 7e5);
  const auto t = load_scenario("fig3_23");
  EXPECT_FALSE(t.at_time(1.9).loads[1].params.connected);
  EXPECT_TRUE(t.at_time(2.0).loads[1].params.connected);
}

TEST(SetParameter, ResolvesPaths) {
  auto s = load_scenario("fig4_2");
  set_parameter(s, "machine.sg1.n_droop", 0.05);
  EXPECT_EQ(s.machines[0].n_droop, 0.05);
  set_parameter(s, "load.main.l", 0.5);
  EXPECT_EQ(s.loads[0].params.l, 0.5);
  set_parameter(s, "sim.t_end", 3.0);
  EXPECT_EQ(s.sim.t_end, 3.0);
  EXPECT_THROW(set_parameter(s, "machine.nope.n_droop", 1), std::invalid_argument);
  EXPECT_THROW(set_parameter(s, "machine.sg1.nope", 1), std::invalid_argument);
  EXPECT_THROW(set_parameter(s, "grid.v_ll", 1), std::invalid_argument);
  EXPECT_THROW(set_parameter(s, "bogus", 1), std::invalid_argument);
}

TEST(FindFixture, UnknownName) { EXPECT_THROW(find_fixture("no_such_fixture"), std::invalid_argument); }
