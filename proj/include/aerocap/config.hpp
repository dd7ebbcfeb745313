#pragma once

// Scenario configuration: one struct aggregating every tunable, a YAML reader
// that rejects unknown keys and reports line numbers, range validation with
// dotted field paths, and a JSON echo used in run-log headers.
//
// The schema is defined once, by visit_fields(); reading, validation
// line lookup and JSON output all walk the same table.

#include "aerocap/camera.hpp"
#include "aerocap/coordination.hpp"
#include "aerocap/core.hpp"
#include "aerocap/guidance.hpp"
#include "aerocap/perception.hpp"
#include "aerocap/world.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace aerocap {

inline constexpr int kConfigSchemaVersion = 1;

enum class MissionMode { single, collaborative };

inline std::string_view to_string(MissionMode m) { return m == MissionMode::single ? "single" : "collaborative"; }

struct RatesConfig {
    double dynamics = 400.0;  // Hz
    double vision = 30.0;     // Hz
    double control = 20.0;    // Hz
};

struct WorldConfig {
    PendulumParams pendulum;
    double ball_diameter = 0.18;     // m
    double drone_span = 0.35;        // m
    double detach_threshold = 5.0;   // N
    double claw_pull_force = 8.0;    // N
    double keep_out_radius = 0.5;    // m around the target drone
    double ball_search_margin = 1.0; // m, sway allowance of the drone-derived search gate
    WindModel wind{Vec3::Zero(), Vec3(0.09, 0.09, 0.0), 2.0};
};

struct DroneConfig {
    Vec3 initial_position = Vec3::Zero();
    double initial_yaw = 0.0;
    UavParams plant;
    CameraMount mount;
};

struct CameraConfig {
    CameraIntrinsics intrinsics;
    SensorNoise noise;
    DetectionModel detection;
};

struct ScenarioConfig {
    int schema = kConfigSchemaVersion;
    std::uint64_t seed = 1;
    double duration = 240.0;  // s
    MissionMode mode = MissionMode::collaborative;
    RatesConfig rates;
    WorldConfig world;
    TrajectoryPattern target;
    DroneConfig grabber{Vec3(0.0, 0.0, 0.0), 0.0, {}, CameraMount{Vec3(0.6, 0.0, -0.15)}};
    DroneConfig tracker{Vec3(0.0, -3.0, 0.0), 0.0, {}, CameraMount{Vec3(0.1, 0.0, 0.0)}};
    CameraConfig camera;
    TrackerParams perception;
    double switch_range = 8.0;  // m
    GuidanceGains gains;
    CommandLimits limits;
    MissionParams mission;
    ExploreParams explore;
    CaptureGeometry capture;
    ChannelModel channel;

    bool collaborative() const { return mode == MissionMode::collaborative; }
};

struct ConfigIssue {
    std::string field;
    int line = 0;
    std::string message;
};

namespace detail {

/// Walks every configurable field. The visitor provides `section(name, fn)`
/// and `field(name, T&)` for double, int, bool, uint64, Vec3 and the enums.
template <class Visitor>
void visit_fields(ScenarioConfig& c, Visitor& v) {
    v.field("schema", c.schema);
    v.field("seed", c.seed);
    v.field("duration", c.duration);
    v.field("mode", c.mode);
    v.section("rates", [&] {
        v.field("dynamics", c.rates.dynamics);
        v.field("vision", c.rates.vision);
        v.field("control", c.rates.control);
    });
    v.section("world", [&] {
        v.field("rod_length", c.world.pendulum.length);
        v.field("ball_mass", c.world.pendulum.mass);
        v.field("damping", c.world.pendulum.damping);
        v.field("gravity", c.world.pendulum.gravity);
        v.field("ball_diameter", c.world.ball_diameter);
        v.field("drone_span", c.world.drone_span);
        v.field("detach_threshold", c.world.detach_threshold);
        v.field("claw_pull_force", c.world.claw_pull_force);
        v.field("keep_out_radius", c.world.keep_out_radius);
        v.field("ball_search_margin", c.world.ball_search_margin);
        v.section("wind", [&] {
            v.field("mean", c.world.wind.mean);
            v.field("sigma", c.world.wind.sigma);
            v.field("correlation_time", c.world.wind.correlation_time);
        });
    });
    v.section("target", [&] {
        v.field("pattern", c.target.kind);
        v.field("center", c.target.center);
        v.field("heading", c.target.heading);
        v.field("speed", c.target.speed);
        v.field("extent", c.target.extent);
    });
    auto drone = [&](const char* name, DroneConfig& d) {
        v.section(name, [&] {
            v.field("initial_position", d.initial_position);
            v.field("initial_yaw", d.initial_yaw);
            v.field("tau", d.plant.tau);
            v.field("v_max_h", d.plant.v_max_h);
            v.field("v_max_z", d.plant.v_max_z);
            v.field("yaw_rate_max", d.plant.yaw_rate_max);
            v.field("camera_mount", d.mount.translation);
        });
    };
    v.section("drones", [&] {
        drone("grabber", c.grabber);
        drone("tracker", c.tracker);
    });
    v.section("camera", [&] {
        v.field("width", c.camera.intrinsics.width);
        v.field("height", c.camera.intrinsics.height);
        v.field("focal_length", c.camera.intrinsics.focal_length);
        v.field("sigma_center", c.camera.noise.sigma_center);
        v.field("sigma_size", c.camera.noise.sigma_size);
        v.section("detection", [&] {
            v.field("dropout", c.camera.detection.dropout);
            v.field("near_range", c.camera.detection.near_range);
            v.field("far_range", c.camera.detection.far_range);
            v.field("far_probability", c.camera.detection.far_probability);
        });
    });
    v.section("perception", [&] {
        v.field("q_pixel", c.perception.q_pixel);
        v.field("q_range", c.perception.q_range);
        v.field("sigma_pixel", c.perception.sigma_pixel);
        v.field("sigma_size", c.perception.sigma_size);
        v.field("gate", c.perception.gate);
        v.field("init_range", c.perception.init_range);
        v.field("drone_init_range", c.perception.drone_init_range);
        v.field("loss_timeout", c.perception.loss_timeout);
        v.field("reseed_after", c.perception.reseed_after);
        v.field("switch_range", c.switch_range);
    });
    v.section("guidance", [&] {
        v.field("kp_psi", c.gains.kp_psi);
        v.field("kd_psi", c.gains.kd_psi);
        v.field("kp_z", c.gains.kp_z);
        v.field("kd_z", c.gains.kd_z);
        v.field("kp_r", c.gains.kp_r);
        v.field("kd_r", c.gains.kd_r);
        v.field("r_standoff", c.mission.r_standoff);
        v.field("grab_ramp_rate", c.mission.grab_ramp_rate);
        v.field("grab_r_final", c.mission.grab_r_final);
        v.field("r_drone_approach", c.mission.r_drone_approach);
        v.field("r_tracker", c.mission.r_tracker);
        v.field("v_max_h", c.limits.v_max_h);
        v.field("v_max_z", c.limits.v_max_z);
        v.field("yaw_rate_max", c.limits.yaw_rate_max);
    });
    v.section("mission", [&] {
        v.field("takeoff_altitude", c.mission.takeoff_altitude);
        v.field("mission_budget", c.mission.mission_budget);
        v.field("grab_budget", c.mission.grab_budget);
        v.field("align_pixel_threshold", c.mission.align_pixel_threshold);
        v.field("align_range_tolerance", c.mission.align_range_tolerance);
        v.field("align_hold", c.mission.align_hold);
        v.field("approach_standoff", c.mission.approach_standoff);
        v.field("approach_speed", c.mission.approach_speed);
        v.field("land_speed", c.mission.land_speed);
        v.field("sighting_rate", c.mission.sighting_rate);
        v.section("explore", [&] {
            v.field("x_min", c.explore.area.x_min);
            v.field("x_max", c.explore.area.x_max);
            v.field("y_min", c.explore.area.y_min);
            v.field("y_max", c.explore.area.y_max);
            v.field("lane_spacing", c.explore.lane_spacing);
            v.field("altitude", c.explore.altitude);
            v.field("speed", c.explore.speed);
        });
        v.section("capture", [&] {
            v.field("radius", c.capture.radius);
            v.field("cone_half_angle_deg", c.capture.cone_half_angle_deg);
            v.field("rel_speed_max", c.capture.rel_speed_max);
        });
    });
    v.section("channel", [&] {
        v.field("latency", c.channel.latency);
        v.field("drop_probability", c.channel.drop_probability);
        v.field("rate_limit", c.channel.rate_limit);
    });
}

inline int yaml_line(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

class YamlReader {
public:
    explicit YamlReader(const YAML::Node& root) { stack_.push_back({root, "", {}}); }

    std::map<std::string, int> lines;

    template <class Fn>
    void section(const char* name, Fn&& fn) {
        const auto& top = stack_.back();
        const std::string path = join(top.path, name);
        YAML::Node child = lookup(name);
        if (!child) {
            // Absent section: keep defaults, but still record nothing.
            return;
        }
        if (!child.IsMap()) throw ConfigError(path, yaml_line(child), "expected a mapping");
        lines[path] = yaml_line(child);
        stack_.push_back({child, path, {}});
        fn();
        finish_level();
        stack_.pop_back();
    }

    template <class T>
    void field(const char* name, T& value) {
        const std::string path = join(stack_.back().path, name);
        YAML::Node n = lookup(name);
        if (!n) return;
        lines[path] = yaml_line(n);
        read(n, path, value);
    }

    void finish() { finish_level(); }

private:
    struct Level {
        YAML::Node node;
        std::string path;
        std::set<std::string> seen;
    };

    static std::string join(const std::string& base, const std::string& name) {
        return base.empty() ? name : base + "." + name;
    }

    YAML::Node lookup(const char* name) {
        auto& top = stack_.back();
        top.seen.insert(name);
        if (!top.node.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
        for (auto it = top.node.begin(); it != top.node.end(); ++it)
            if (it->first.as<std::string>() == name) return it->second;
        return YAML::Node(YAML::NodeType::Undefined);
    }

    void finish_level() {
        const auto& top = stack_.back();
        if (top.node.IsNull()) return;
        if (!top.node.IsMap()) throw ConfigError(top.path, yaml_line(top.node), "expected a mapping");
        std::set<std::string> keys;
        for (auto it = top.node.begin(); it != top.node.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!top.seen.count(key)) throw ConfigError(join(top.path, key), yaml_line(it->first), "unknown key");
            if (!keys.insert(key).second) throw ConfigError(join(top.path, key), yaml_line(it->first), "duplicate key");
        }
    }

    template <class T>
    static T scalar(const YAML::Node& n, const std::string& path, const char* what) {
        if (!n.IsScalar()) throw ConfigError(path, yaml_line(n), std::string("expected ") + what);
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path, yaml_line(n), std::string("expected ") + what + ", got '" + n.Scalar() + "'");
        }
    }

    static void read(const YAML::Node& n, const std::string& path, double& v) {
        v = scalar<double>(n, path, "a number");
        if (!std::isfinite(v)) throw ConfigError(path, yaml_line(n), "must be finite");
    }
    static void read(const YAML::Node& n, const std::string& path, int& v) { v = scalar<int>(n, path, "an integer"); }
    static void read(const YAML::Node& n, const std::string& path, std::uint64_t& v) {
        if (n.IsScalar() && !n.Scalar().empty() && n.Scalar()[0] == '-')
            throw ConfigError(path, yaml_line(n), "must be a non-negative integer");
        v = scalar<std::uint64_t>(n, path, "a non-negative integer");
    }
    static void read(const YAML::Node& n, const std::string& path, bool& v) { v = scalar<bool>(n, path, "true or false"); }
    static void read(const YAML::Node& n, const std::string& path, Vec3& v) {
        if (!n.IsSequence() || n.size() != 3) throw ConfigError(path, yaml_line(n), "expected a 3-element list");
        for (std::size_t i = 0; i < 3; ++i) read(n[i], path + "[" + std::to_string(i) + "]", v[static_cast<int>(i)]);
    }
    static void read(const YAML::Node& n, const std::string& path, MissionMode& v) {
        const auto s = scalar<std::string>(n, path, "a string");
        if (s == "single") v = MissionMode::single;
        else if (s == "collaborative") v = MissionMode::collaborative;
        else throw ConfigError(path, yaml_line(n), "expected 'single' or 'collaborative', got '" + s + "'");
    }
    static void read(const YAML::Node& n, const std::string& path, PatternKind& v) {
        const auto s = scalar<std::string>(n, path, "a string");
        for (auto k : {PatternKind::static_hover, PatternKind::straight_line, PatternKind::figure_eight})
            if (to_string(k) == s) {
                v = k;
                return;
            }
        throw ConfigError(path, yaml_line(n), "unknown pattern '" + s + "'");
    }

    std::vector<Level> stack_;
};

class JsonWriter {
public:
    nlohmann::ordered_json root = nlohmann::ordered_json::object();

    template <class Fn>
    void section(const char* name, Fn&& fn) {
        auto* parent = current_;
        current_ = &(*parent)[name];
        *current_ = nlohmann::ordered_json::object();
        fn();
        current_ = parent;
    }

    template <class T>
    void field(const char* name, const T& value) {
        if constexpr (std::is_same_v<T, Vec3>) {
            (*current_)[name] = {value.x(), value.y(), value.z()};
        } else if constexpr (std::is_enum_v<T>) {
            (*current_)[name] = std::string(to_string(value));
        } else {
            (*current_)[name] = value;
        }
    }

private:
    nlohmann::ordered_json* current_ = &root;
};

}  // namespace detail

/// Range checks. `lines` maps dotted paths to source lines when known.
inline std::vector<ConfigIssue> validate(const ScenarioConfig& c, const std::map<std::string, int>& lines = {}) {
    std::vector<ConfigIssue> issues;
    auto check = [&](bool ok, const std::string& field, const std::string& msg) {
        if (ok) return;
        auto it = lines.find(field);
        issues.push_back({field, it == lines.end() ? 0 : it->second, msg});
    };
    auto positive = [&](double v, const std::string& f) { check(v > 0.0, f, "must be > 0"); };
    auto non_negative = [&](double v, const std::string& f) { check(v >= 0.0, f, "must be >= 0"); };

    check(c.schema == kConfigSchemaVersion, "schema", "unsupported schema version");
    positive(c.duration, "duration");
    positive(c.rates.dynamics, "rates.dynamics");
    positive(c.rates.vision, "rates.vision");
    positive(c.rates.control, "rates.control");
    check(c.rates.vision <= c.rates.dynamics, "rates.vision", "must not exceed rates.dynamics");
    check(c.rates.control <= c.rates.dynamics, "rates.control", "must not exceed rates.dynamics");

    positive(c.world.pendulum.length, "world.rod_length");
    positive(c.world.pendulum.mass, "world.ball_mass");
    non_negative(c.world.pendulum.damping, "world.damping");
    positive(c.world.pendulum.gravity, "world.gravity");
    positive(c.world.ball_diameter, "world.ball_diameter");
    positive(c.world.drone_span, "world.drone_span");
    non_negative(c.world.detach_threshold, "world.detach_threshold");
    non_negative(c.world.claw_pull_force, "world.claw_pull_force");
    non_negative(c.world.keep_out_radius, "world.keep_out_radius");
    non_negative(c.world.ball_search_margin, "world.ball_search_margin");
    check((c.world.wind.sigma.array() >= 0.0).all(), "world.wind.sigma", "components must be >= 0");
    positive(c.world.wind.correlation_time, "world.wind.correlation_time");

    non_negative(c.target.speed, "target.speed");
    if (c.target.kind == PatternKind::figure_eight) positive(c.target.extent, "target.extent");

    for (auto [name, d] : {std::pair{"drones.grabber", &c.grabber}, std::pair{"drones.tracker", &c.tracker}}) {
        const std::string base = name;
        check(d->initial_position.z() >= 0.0, base + ".initial_position", "must not start below ground");
        positive(d->plant.tau, base + ".tau");
        positive(d->plant.v_max_h, base + ".v_max_h");
        positive(d->plant.v_max_z, base + ".v_max_z");
        positive(d->plant.yaw_rate_max, base + ".yaw_rate_max");
    }

    check(c.camera.intrinsics.width > 0, "camera.width", "must be > 0");
    check(c.camera.intrinsics.height > 0, "camera.height", "must be > 0");
    positive(c.camera.intrinsics.focal_length, "camera.focal_length");
    non_negative(c.camera.noise.sigma_center, "camera.sigma_center");
    non_negative(c.camera.noise.sigma_size, "camera.sigma_size");
    positive(c.camera.detection.near_range, "camera.detection.near_range");
    check(c.camera.detection.far_range > c.camera.detection.near_range, "camera.detection.far_range",
          "must exceed near_range");
    check(c.camera.detection.far_probability >= 0.0 && c.camera.detection.far_probability <= 1.0,
          "camera.detection.far_probability", "must be in [0, 1]");

    positive(c.perception.q_pixel, "perception.q_pixel");
    positive(c.perception.q_range, "perception.q_range");
    positive(c.perception.sigma_pixel, "perception.sigma_pixel");
    positive(c.perception.sigma_size, "perception.sigma_size");
    positive(c.perception.gate, "perception.gate");
    positive(c.perception.init_range, "perception.init_range");
    positive(c.perception.drone_init_range, "perception.drone_init_range");
    positive(c.perception.loss_timeout, "perception.loss_timeout");
    non_negative(c.perception.reseed_after, "perception.reseed_after");
    positive(c.switch_range, "perception.switch_range");

    positive(c.gains.kp_psi, "guidance.kp_psi");
    non_negative(c.gains.kd_psi, "guidance.kd_psi");
    positive(c.gains.kp_z, "guidance.kp_z");
    non_negative(c.gains.kd_z, "guidance.kd_z");
    positive(c.gains.kp_r, "guidance.kp_r");
    non_negative(c.gains.kd_r, "guidance.kd_r");
    check(c.mission.r_standoff > c.capture.radius, "guidance.r_standoff", "must exceed mission.capture.radius");
    positive(c.mission.grab_ramp_rate, "guidance.grab_ramp_rate");
    positive(c.mission.r_drone_approach, "guidance.r_drone_approach");
    positive(c.mission.r_tracker, "guidance.r_tracker");
    positive(c.limits.v_max_h, "guidance.v_max_h");
    positive(c.limits.v_max_z, "guidance.v_max_z");
    positive(c.limits.yaw_rate_max, "guidance.yaw_rate_max");

    positive(c.mission.takeoff_altitude, "mission.takeoff_altitude");
    positive(c.mission.mission_budget, "mission.mission_budget");
    positive(c.mission.grab_budget, "mission.grab_budget");
    positive(c.mission.align_pixel_threshold, "mission.align_pixel_threshold");
    positive(c.mission.align_range_tolerance, "mission.align_range_tolerance");
    non_negative(c.mission.align_hold, "mission.align_hold");
    non_negative(c.mission.approach_standoff, "mission.approach_standoff");
    positive(c.mission.approach_speed, "mission.approach_speed");
    positive(c.mission.land_speed, "mission.land_speed");
    positive(c.mission.sighting_rate, "mission.sighting_rate");
    check(c.explore.area.x_max > c.explore.area.x_min, "mission.explore.x_max", "must exceed x_min");
    check(c.explore.area.y_max > c.explore.area.y_min, "mission.explore.y_max", "must exceed y_min");
    positive(c.explore.lane_spacing, "mission.explore.lane_spacing");
    positive(c.explore.altitude, "mission.explore.altitude");
    positive(c.explore.speed, "mission.explore.speed");
    positive(c.capture.radius, "mission.capture.radius");
    check(c.capture.cone_half_angle_deg > 0.0 && c.capture.cone_half_angle_deg <= 90.0,
          "mission.capture.cone_half_angle_deg", "must be in (0, 90]");
    positive(c.capture.rel_speed_max, "mission.capture.rel_speed_max");

    non_negative(c.channel.latency, "channel.latency");
    check(c.channel.drop_probability >= 0.0 && c.channel.drop_probability <= 1.0, "channel.drop_probability",
          "must be in [0, 1]");
    positive(c.channel.rate_limit, "channel.rate_limit");
    return issues;
}

/// Parses a YAML scenario document. Omitted keys keep their defaults; unknown
/// keys, type mismatches and range violations throw ConfigError naming the
/// field and (when known) the line.
inline ScenarioConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, "YAML syntax error: " + e.msg);
    }
    ScenarioConfig cfg;
    if (root.IsNull()) return cfg;
    if (!root.IsMap()) throw ConfigError("", detail::yaml_line(root), "top level must be a mapping");

    detail::YamlReader reader(root);
    detail::visit_fields(cfg, reader);
    reader.finish();
    cfg.mission.collaborative = cfg.collaborative();

    const auto issues = validate(cfg, reader.lines);
    if (!issues.empty()) {
        std::string all;
        for (const auto& i : issues) all += (all.empty() ? "" : "; ") + i.field + ": " + i.message;
        throw ConfigError(issues.front().field, issues.front().line, issues.size() == 1 ? issues.front().message : all);
    }
    return cfg;
}

/// Every field, defaults included, as ordered JSON.
inline nlohmann::ordered_json config_to_json(ScenarioConfig cfg) {
    detail::JsonWriter writer;
    detail::visit_fields(cfg, writer);
    return writer.root;
}

}  // namespace aerocap
