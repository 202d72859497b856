#include <gtest/gtest.h>

#include <sstream>

#include "microgrid/report.hpp"
#include "microgrid/simulation.hpp"

using namespace microgrid;

TEST(Balance, GridFixtureSteadyWindow) {
  const auto rep = balance_report(run(load_scenario("fig3_1")));
  EXPECT_FALSE(rep.times.empty());
  EXPECT_GT(rep.times.front(), 3.0);
  EXPECT_LT(rep.max_p_residual, 1e-3);
  EXPECT_LT(rep.max_q_residual, 1e-3);
  EXPECT_NEAR(rep.p_load.back(), 1e6, 0.01e6);
}

TEST(Balance, ZeroLoadLeavesOnlyGridLoss) {
  // Measured at the bus, an unloaded grid delivers nothing.
  const auto s = parse_scenario("[sim]\nt_end = 4\n[grid]\n[load.tiny]\nr = 1e12\nconnected = false\n");
  const auto rep = balance_report(run(s));
  ASSERT_FALSE(rep.times.empty());
  EXPECT_LT(rep.max_p_residual, 1e-6);
  EXPECT_LT(rep.max_q_residual, 1e-6);
}

TEST(Balance, ReactiveBalanceWithConverter) {
  const auto s = load_scenario("fig5_8");
  const auto rep = balance_report(run(s));
  EXPECT_LT(rep.max_q_residual, 1e-3);
  // oracle: the algebraic equilibrium of the same configuration
  const auto eq = solve_steady_state(s, s.sim.t_end);
  double q_src = 0.0;
  for (const auto& m : eq.machines) q_src += m.q;
  const auto net = s.build_network();
  q_src += eq.network.devices[*net.find("wt")].power.q_reactive;
  const double q_load = eq.network.devices[*net.find("main")].power.q_reactive;
  EXPECT_NEAR(q_src, q_load, 1e-3 * q_load);
  EXPECT_NEAR(rep.q_load.back(), q_load, 1e-3 * q_load);
}

TEST(Balance, DetectsImbalance) {
  TimeSeries ts({"t", "grid.P", "grid.Q", "load.a.P", "load.a.Q"});
  ts.append({5.0, 1000.0, 0.0, 900.0, 0.0});
  const auto rep = balance_report(ts);
  EXPECT_NEAR(rep.max_p_residual, 0.1, 1e-12);
}

TEST(Tables, KnownNames) {
  const auto names = table_names();
  EXPECT_EQ(names, (std::vector<std::string>{"t3_13", "t3_16", "t4_3", "t4_4", "t4_5", "t5_9"}));
  EXPECT_THROW(table_report("t9_9", load_scenario("fig4_2")), std::invalid_argument);
  EXPECT_THROW(table_report("t4_3", load_scenario("fig3_12")), std::invalid_argument);
}

TEST(Tables, ReactiveRatioReport) {
  const auto rep = table_report("t4_3", load_scenario("fig4_2"));
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.table.rows.size(), 3u);
  ASSERT_EQ(rep.checks.size(), 3u);
  std::ostringstream os;
  print(os, rep);
  EXPECT_NE(os.str().find("PASS"), std::string::npos);
  EXPECT_NE(os.str().find("(reference)"), std::string::npos);
}

TEST(Tables, LoadAngleTrend) {
  const auto rep = table_report("t3_13", load_scenario("fig3_12"));
  EXPECT_TRUE(rep.passed());
}
