#include "aerocap/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace aerocap;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ConfigError parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return ConfigError("", 0, "");
}

}  // namespace

TEST(ParseConfig, EmptyDocumentIsDefaults) {
    const ScenarioConfig defaults;
    EXPECT_EQ(config_to_json(parse_config("")), config_to_json(defaults));
    EXPECT_EQ(config_to_json(parse_config("# only a comment\n")), config_to_json(defaults));
    EXPECT_TRUE(validate(defaults).empty());
}

TEST(ParseConfig, DocumentedDefaults) {
    const ScenarioConfig c;
    EXPECT_EQ(c.rates.dynamics, 400.0);
    EXPECT_EQ(c.rates.vision, 30.0);
    EXPECT_EQ(c.rates.control, 20.0);
    EXPECT_EQ(c.world.pendulum.length, 1.5);
    EXPECT_EQ(c.world.ball_diameter, 0.18);
    EXPECT_EQ(c.world.pendulum.damping, 0.05);
    EXPECT_EQ(c.world.detach_threshold, 5.0);
    EXPECT_GE(c.world.claw_pull_force, c.world.detach_threshold);
    EXPECT_EQ(c.camera.intrinsics.width, 640);
    EXPECT_EQ(c.camera.intrinsics.height, 480);
    EXPECT_EQ(c.camera.intrinsics.focal_length, 600.0);
    EXPECT_EQ(c.perception.q_pixel, 200.0);
    EXPECT_EQ(c.perception.q_range, 2.0);
    EXPECT_EQ(c.perception.gate, 9.21);
    EXPECT_EQ(c.perception.init_range, 6.0);
    EXPECT_EQ(c.perception.loss_timeout, 0.8);
    EXPECT_EQ(c.switch_range, 8.0);
    EXPECT_EQ(c.gains.kp_psi, 0.005);
    EXPECT_EQ(c.gains.kp_r, 0.8);
    EXPECT_EQ(c.mission.r_standoff, 2.5);
    EXPECT_EQ(c.mission.r_tracker, 6.0);
    EXPECT_EQ(c.capture.radius, 0.25);
    EXPECT_EQ(c.capture.cone_half_angle_deg, 45.0);
    EXPECT_EQ(c.capture.rel_speed_max, 1.5);
    EXPECT_EQ(c.channel.latency, 0.1);
    EXPECT_EQ(c.channel.drop_probability, 0.05);
    EXPECT_EQ(c.channel.rate_limit, 5.0);
    EXPECT_EQ(c.target.speed, 0.5);
}

TEST(ParseConfig, SeedOverridesOnlySeed) {
    const ScenarioConfig c = parse_config("seed: 42\n");
    EXPECT_EQ(c.seed, 42u);
    auto expected = config_to_json(ScenarioConfig{});
    expected["seed"] = 42;
    EXPECT_EQ(config_to_json(c), expected);
}

TEST(ParseConfig, NestedValues) {
    const ScenarioConfig c = parse_config(R"(
mode: single
target:
  pattern: figure_eight
  center: [1, 2, 3]
  extent: 4
world:
  wind:
    sigma: [0.1, 0.2, 0]
drones:
  grabber:
    initial_yaw: 0.5
camera:
  detection:
    dropout: false
)");
    EXPECT_EQ(c.mode, MissionMode::single);
    EXPECT_FALSE(c.collaborative());
    EXPECT_FALSE(c.mission.collaborative);
    EXPECT_EQ(c.target.kind, PatternKind::figure_eight);
    EXPECT_EQ(c.target.center, Vec3(1.0, 2.0, 3.0));
    EXPECT_EQ(c.target.extent, 4.0);
    EXPECT_EQ(c.world.wind.sigma, Vec3(0.1, 0.2, 0.0));
    EXPECT_EQ(c.grabber.initial_yaw, 0.5);
    EXPECT_FALSE(c.camera.detection.dropout);
}

TEST(ParseConfig, NegativeRodLengthNamesField) {
    const auto e = parse_error("schema: 1\nworld:\n  rod_length: -1.5\n");
    EXPECT_EQ(e.field(), "world.rod_length");
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("world.rod_length"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
}

TEST(ParseConfig, UnknownKeysRejected) {
    const auto e = parse_error("world:\n  rod_lenght: 1.5\n");
    EXPECT_EQ(e.field(), "world.rod_lenght");
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(parse_error("colour: red\n").field(), "colour");
}

TEST(ParseConfig, DuplicateKeysRejected) {
    const auto e = parse_error("duration: 10\nseed: 2\nduration: 20\n");
    EXPECT_EQ(e.field(), "duration");
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(parse_error("world:\n  rod_length: 1.5\n  rod_length: 2\n").field(), "world.rod_length");
}

TEST(ParseConfig, TypeMismatches) {
    EXPECT_EQ(parse_error("duration: soon\n").field(), "duration");
    EXPECT_EQ(parse_error("target:\n  center: [1, 2]\n").field(), "target.center");
    EXPECT_EQ(parse_error("mode: solo\n").field(), "mode");
    EXPECT_EQ(parse_error("target:\n  pattern: circle\n").field(), "target.pattern");
    EXPECT_EQ(parse_error("world: 3\n").field(), "world");
    EXPECT_EQ(parse_error("camera:\n  width: 6.5\n").field(), "camera.width");
}

TEST(ParseConfig, SyntaxErrorHasLine) {
    const auto e = parse_error("seed: 1\nworld: [1, 2\n");
    EXPECT_GT(e.line(), 0);
    EXPECT_NE(std::string(e.what()).find("YAML"), std::string::npos);
}

TEST(ParseConfig, RangeViolations) {
    EXPECT_EQ(parse_error("duration: 0\n").field(), "duration");
    EXPECT_EQ(parse_error("rates:\n  vision: 500\n").field(), "rates.vision");
    EXPECT_EQ(parse_error("rates:\n  control: -20\n").field(), "rates.control");
    EXPECT_EQ(parse_error("channel:\n  drop_probability: 1.5\n").field(), "channel.drop_probability");
    EXPECT_EQ(parse_error("target:\n  speed: -1\n").field(), "target.speed");
    EXPECT_EQ(parse_error("schema: 2\n").field(), "schema");
    EXPECT_EQ(parse_error("guidance:\n  r_standoff: 0.1\n").field(), "guidance.r_standoff");
}

TEST(ParseConfig, ReportsEveryIssue) {
    const auto e = parse_error("duration: -1\nworld:\n  ball_mass: 0\n");
    const std::string what = e.what();
    EXPECT_NE(what.find("duration"), std::string::npos);
    EXPECT_NE(what.find("world.ball_mass"), std::string::npos);
}

TEST(Validate, ListsIssuesForProgrammaticConfigs) {
    ScenarioConfig c;
    c.world.pendulum.length = 0.0;
    c.explore.area.x_max = c.explore.area.x_min;
    const auto issues = validate(c);
    ASSERT_EQ(issues.size(), 2u);
    EXPECT_EQ(issues[0].field, "world.rod_length");
    EXPECT_EQ(issues[1].field, "mission.explore.x_max");
}

TEST(ParseConfig, JsonRoundTripThroughYaml) {
    ScenarioConfig c;
    c.seed = 77;
    c.target.kind = PatternKind::straight_line;
    c.world.wind.mean = Vec3(0.01, -0.02, 0.0);
    c.mode = MissionMode::single;
    // JSON is valid YAML flow syntax.
    const ScenarioConfig back = parse_config(config_to_json(c).dump());
    EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(ParseConfig, ShippedScenariosParse) {
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(AEROCAP_SCENARIO_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW(parse_config(slurp(entry.path()))) << entry.path();
        ++n;
    }
    EXPECT_GE(n, 5);
}

TEST(ParseConfig, DefaultScenarioFilesMatchModes) {
    const auto collab = parse_config(slurp(std::filesystem::path(AEROCAP_SCENARIO_DIR) / "default_collaborative.yaml"));
    const auto single = parse_config(slurp(std::filesystem::path(AEROCAP_SCENARIO_DIR) / "default_single.yaml"));
    EXPECT_TRUE(collab.collaborative());
    EXPECT_FALSE(single.collaborative());
    auto a = config_to_json(collab);
    auto b = config_to_json(single);
    a.erase("mode");
    b.erase("mode");
    EXPECT_EQ(a, b);
}
