#include <gtest/gtest.h>

#include "microgrid/wind.hpp"

using namespace microgrid;

namespace {

WindSeries profile() {
  return parse_wind_series(
      "time,speed_mps\n0.0,13.2\n0.1,13.9\n0.2,14.2\n0.3,14.8\n0.4,16.5\n0.5,16.7\n"
      "0.6,18.4\n0.7,20.1\n0.8,13.2\n0.9,11.9\n1.0,11.2\n");
}

}  // namespace

TEST(WindSeries, ParsesProfile) {
  const auto s = profile();
  ASSERT_EQ(s.samples.size(), 11u);
  EXPECT_EQ(s.samples.front().speed, 13.2);
  EXPECT_EQ(s.samples.back().time, 1.0);
}

TEST(WindCurrent, HeldBeyondLastSample) {
  const WindMapping m;
  EXPECT_NEAR(wind_current_at(profile(), m, 1.5), 10.76, 0.005);
  EXPECT_NEAR(3 * 6300 * wind_current_at(profile(), m, 1.0), 0.21e6, 0.01e6);
}

TEST(WindCurrent, ZeroSpeed) {
  const WindMapping m;
  EXPECT_EQ(m.current(0.0), 0.0);
}

TEST(WindCurrent, InterpolatesBetweenSamples) {
  const WindMapping m;
  EXPECT_NEAR(profile().speed_at(0.05), 13.55, 1e-12);
  EXPECT_NEAR(wind_current_at(profile(), m, 0.05), 13.02, 0.005);
}

TEST(WindMapping, CubicAndClamp) {
  WindMapping m;
  m.kind = WindMappingKind::cubic;
  m.gain = 20.0;
  m.v_ref = 12.0;
  EXPECT_NEAR(m.current(12.0), 20.0, 1e-12);
  EXPECT_NEAR(m.current(6.0), 2.5, 1e-12);
  m.i_max = 30.0;
  EXPECT_EQ(m.current(24.0), 30.0);
  m.i_max = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  WindMapping neg;
  neg.gain = -1.0;
  EXPECT_THROW(neg.validate(), std::invalid_argument);
}

TEST(WindSeries, Errors) {
  EXPECT_THROW(WindSeries{}.speed_at(0.0), std::invalid_argument);
  EXPECT_THROW(parse_wind_series("time,speed\n0,1\n0,2\n"), std::invalid_argument);
  EXPECT_THROW(parse_wind_series("time,speed\n0,abc\n"), std::invalid_argument);
  try {
    parse_wind_series("time,speed\n0,1\n0.1,2\n0.05,3\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}
