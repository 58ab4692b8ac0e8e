#include "bms/bench/config.hpp"
#include "bms/error.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace {

using namespace bms::bench;

IniFile parse(const std::string& text) {
  std::istringstream in(text);
  return IniFile::parse(in, "test.ini");
}

TEST(Ini, SectionsCommentsAndWhitespace) {
  const auto ini = parse("# header\n[scenario]\n  horizon =  40 \n; note\nkind=oscillator\n\n[weights]\nr = 2.5\n");
  EXPECT_EQ(ini.get("scenario.horizon").value(), "40");
  EXPECT_EQ(ini.get("scenario.kind").value(), "oscillator");
  EXPECT_EQ(ini.get("weights.r").value(), "2.5");
  EXPECT_FALSE(ini.get("weights.q").has_value());
}

TEST(Ini, MalformedLinesNameTheLine) {
  try {
    parse("[scenario]\nhorizon 40\n");
    FAIL();
  } catch (const bms::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.ini:2"), std::string::npos);
  }
  EXPECT_THROW(parse("[scenario\n"), bms::ConfigError);
}

TEST(Config, PresetThenOverrides) {
  const auto c = load_config(parse("[scenario]\nkind = hydraulic\nsteps = 300\n[weights]\nr = 7\n"));
  EXPECT_EQ(c.kind, ScenarioKind::hydraulic);
  EXPECT_EQ(c.steps, 300);
  EXPECT_EQ(c.horizon, 5);
  EXPECT_DOUBLE_EQ(c.weight_r, 7.0);
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
  EXPECT_THROW(load_config(parse("[scenario]\nhorizn = 3\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[scenario]\nhorizon = three\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[scenario]\nkind = pendulum\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[scenario]\ntiming = maybe\n")), bms::ConfigError);
}

TEST(Config, ValidationCatchesInconsistentSettings) {
  EXPECT_THROW(load_config(parse("[scenario]\nhorizon = 100\nsteps = 50\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[scenario]\nkind = diffusion-field\nestimator = pwmhe\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[scenario]\nkind = oscillator\nestimator = mhmap\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[weights]\np = 0\n")), bms::ConfigError);
  EXPECT_THROW(load_config(parse("[scenario]\nkind = fast-field\n[fast]\naggregation = 4\nlocal_horizon = 4\n")),
               bms::ConfigError);
}

TEST(Config, IniRoundTripIsExact) {
  for (auto kind : {ScenarioKind::hydraulic, ScenarioKind::oscillator, ScenarioKind::oscillator_network,
                    ScenarioKind::diffusion_field, ScenarioKind::fast_field}) {
    auto c = scenario_preset(kind);
    c.seed = 12345;
    c.weight_q = 0.1 + 0.2;  // not representable in few digits
    const std::string text = to_ini(c);
    const auto back = load_config(parse(text));
    EXPECT_EQ(to_ini(back), text) << to_string(kind);
    EXPECT_EQ(back.weight_q, c.weight_q);
  }
}

TEST(Grid, RangesAndLists) {
  const auto r = parse_grid("-2:2:0.1");
  ASSERT_EQ(r.size(), 41u);
  EXPECT_DOUBLE_EQ(r.front(), -2.0);
  EXPECT_NEAR(r.back(), 2.0, 1e-12);
  EXPECT_EQ(r[20], 0.0);
  const auto l = parse_grid("1e-7, 1e-5,0.1");
  ASSERT_EQ(l.size(), 3u);
  EXPECT_DOUBLE_EQ(l[1], 1e-5);
  EXPECT_THROW(parse_grid(""), bms::ConfigError);
  EXPECT_THROW(parse_grid("1:0:0.1"), bms::ConfigError);
  EXPECT_THROW(parse_grid("0:1"), bms::ConfigError);
  EXPECT_THROW(parse_grid("0:1:0"), bms::ConfigError);
}

}  // namespace
