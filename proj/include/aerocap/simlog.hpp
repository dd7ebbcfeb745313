#pragma once

// Structured run log: one chronological stream of typed records, written as
// newline-delimited JSON behind a versioned header line, and read back for
// plotting and analysis.

#include "aerocap/camera.hpp"
#include "aerocap/coordination.hpp"
#include "aerocap/perception.hpp"
#include "aerocap/world.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace aerocap {

inline constexpr const char* kLogSchema = "aerocap.simlog";
inline constexpr int kLogSchemaVersion = 1;

enum class Verdict { captured, timeout, invalid };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::captured: return "captured";
        case Verdict::timeout: return "timeout";
        case Verdict::invalid: return "invalid";
    }
    return "?";
}

inline std::optional<Verdict> verdict_from_string(std::string_view s) {
    for (auto v : {Verdict::captured, Verdict::timeout, Verdict::invalid})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

/// Ground truth after one dynamics step.
struct TruthRecord {
    std::int64_t step = 0;
    double t = 0.0;
    std::optional<UavState> tracker;
    UavState grabber;
    Vec3 target_position = Vec3::Zero();
    Vec3 target_velocity = Vec3::Zero();
    BallState ball;
    Vec3 ball_position = Vec3::Zero();
    Vec3 wind = Vec3::Zero();
};

struct DetectionRecord {
    double t = 0.0;
    DroneId drone = DroneId::grabber;
    ImageDetection det;
    double range = 0.0;  // known-size estimate
};

struct TrackRecord {
    double t = 0.0;
    DroneId drone = DroneId::grabber;
    ObjectClass cls = ObjectClass::ball;
    TrackStatus status = TrackStatus::uninitialized;
    Vec6 state = Vec6::Zero();
    double mahalanobis2 = 0.0;
    bool rejected = false;
};

struct CommandRecord {
    double t = 0.0;
    DroneId drone = DroneId::grabber;
    VelocityCommand cmd;  // world frame, as consumed by the dynamics
};

struct PhaseRecord {
    PhaseTransition transition;
};

struct MessageRecord {
    double t = 0.0;
    std::string event;  // queued | dropped | rate_limited | delivered
    DroneMessage msg;
};

struct EventRecord {
    double t = 0.0;
    std::string kind;
    std::optional<DroneId> drone;
    std::optional<MissionPhase> phase;
};

using LogRecord = std::variant<TruthRecord, DetectionRecord, TrackRecord, CommandRecord, PhaseRecord, MessageRecord, EventRecord>;

struct SimLog {
    nlohmann::ordered_json header = nlohmann::ordered_json::object();
    std::vector<LogRecord> records;
    Verdict verdict = Verdict::timeout;
    std::optional<double> capture_time;
    std::string failure_cause;  // empty when captured
    double end_time = 0.0;
    std::int64_t dynamics_steps = 0;

    template <class T>
    std::vector<const T*> all() const {
        std::vector<const T*> out;
        for (const auto& r : records)
            if (auto p = std::get_if<T>(&r)) out.push_back(p);
        return out;
    }

    std::vector<PhaseTransition> transitions() const {
        std::vector<PhaseTransition> out;
        for (const auto* p : all<PhaseRecord>()) out.push_back(p->transition);
        return out;
    }

    std::vector<const EventRecord*> events(std::string_view kind) const {
        std::vector<const EventRecord*> out;
        for (const auto* e : all<EventRecord>())
            if (e->kind == kind) out.push_back(e);
        return out;
    }
};

// ---------------------------------------------------------------------------
// JSON encoding
// ---------------------------------------------------------------------------

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson vec(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

inline Vec3 to_vec3(const ojson& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

inline ojson uav_json(const UavState& s) {
    return ojson{{"p", vec(s.position)}, {"v", vec(s.velocity)}, {"yaw", s.yaw}, {"yaw_rate", s.yaw_rate}};
}

inline UavState uav_from(const ojson& j) {
    UavState s;
    s.position = to_vec3(j.at("p"));
    s.velocity = to_vec3(j.at("v"));
    s.yaw = j.at("yaw").get<double>();
    s.yaw_rate = j.at("yaw_rate").get<double>();
    return s;
}

template <class E, class Parse>
E enum_from(const ojson& j, Parse parse, const char* what) {
    const auto s = j.get<std::string>();
    auto v = parse(s);
    if (!v) throw InputError(std::string("log: unknown ") + what + " '" + s + "'");
    return *v;
}

inline std::optional<ObjectClass> class_from_string(std::string_view s) {
    if (s == "drone") return ObjectClass::drone;
    if (s == "ball") return ObjectClass::ball;
    return std::nullopt;
}

inline std::optional<TrackStatus> status_from_string(std::string_view s) {
    for (auto v : {TrackStatus::uninitialized, TrackStatus::tracking, TrackStatus::coasting})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

inline std::optional<Frame> frame_from_string(std::string_view s) {
    for (auto v : {Frame::camera, Frame::vehicle, Frame::world})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

inline std::optional<MessageKind> message_kind_from_string(std::string_view s) {
    for (auto v : {MessageKind::ball_sighting, MessageKind::grab_confirmed})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

struct RecordEncoder {
    ojson operator()(const TruthRecord& r) const {
        ojson j{{"type", "truth"}, {"t", r.t}, {"step", r.step}};
        if (r.tracker) j["tracker"] = uav_json(*r.tracker);
        j["grabber"] = uav_json(r.grabber);
        j["target"] = {{"p", vec(r.target_position)}, {"v", vec(r.target_velocity)}};
        j["ball"] = {{"p", vec(r.ball_position)},
                     {"theta", r.ball.theta},
                     {"phi", r.ball.phi},
                     {"theta_dot", r.ball.theta_dot},
                     {"phi_dot", r.ball.phi_dot},
                     {"attached", r.ball.attached}};
        if (!r.ball.attached) {
            j["ball"]["free_p"] = vec(r.ball.free_position);
            j["ball"]["free_v"] = vec(r.ball.free_velocity);
        }
        j["wind"] = vec(r.wind);
        return j;
    }
    ojson operator()(const DetectionRecord& r) const {
        return {{"type", "detection"}, {"t", r.t},         {"drone", to_string(r.drone)}, {"class", to_string(r.det.cls)},
                {"x", r.det.x},        {"y", r.det.y},     {"w", r.det.w},                {"h", r.det.h},
                {"range", r.range}};
    }
    ojson operator()(const TrackRecord& r) const {
        ojson s = ojson::array();
        for (int i = 0; i < 6; ++i) s.push_back(r.state[i]);
        return {{"type", "track"},     {"t", r.t},
                {"drone", to_string(r.drone)}, {"class", to_string(r.cls)},
                {"status", to_string(r.status)}, {"state", s},
                {"d2", r.mahalanobis2},  {"rejected", r.rejected}};
    }
    ojson operator()(const CommandRecord& r) const {
        return {{"type", "command"}, {"t", r.t}, {"drone", to_string(r.drone)}, {"frame", to_string(r.cmd.frame)},
                {"v", vec(r.cmd.velocity)}, {"yaw_rate", r.cmd.yaw_rate}};
    }
    ojson operator()(const PhaseRecord& r) const {
        return {{"type", "phase"}, {"t", r.transition.t}, {"drone", to_string(r.transition.drone)},
                {"from", to_string(r.transition.from)}, {"to", to_string(r.transition.to)}};
    }
    ojson operator()(const MessageRecord& r) const {
        ojson j{{"type", "message"}, {"t", r.t}, {"event", r.event}, {"sender", to_string(r.msg.sender)},
                {"t_sent", r.msg.t_sent}, {"kind", to_string(r.msg.kind)}};
        if (r.msg.payload) {
            ojson cov = ojson::array();
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) cov.push_back(r.msg.payload->covariance(i, k));
            j["position"] = vec(r.msg.payload->position);
            j["covariance"] = cov;
        }
        return j;
    }
    ojson operator()(const EventRecord& r) const {
        ojson j{{"type", "event"}, {"t", r.t}, {"kind", r.kind}};
        if (r.drone) j["drone"] = to_string(*r.drone);
        if (r.phase) j["phase"] = to_string(*r.phase);
        return j;
    }
};

inline LogRecord decode_record(const ojson& j) {
    const auto type = j.at("type").get<std::string>();
    const double t = j.at("t").get<double>();
    auto drone = [&](const char* key) { return enum_from<DroneId>(j.at(key), drone_from_string, "drone"); };
    if (type == "truth") {
        TruthRecord r;
        r.t = t;
        r.step = j.at("step").get<std::int64_t>();
        if (j.contains("tracker")) r.tracker = uav_from(j.at("tracker"));
        r.grabber = uav_from(j.at("grabber"));
        r.target_position = to_vec3(j.at("target").at("p"));
        r.target_velocity = to_vec3(j.at("target").at("v"));
        const auto& b = j.at("ball");
        r.ball_position = to_vec3(b.at("p"));
        r.ball.theta = b.at("theta").get<double>();
        r.ball.phi = b.at("phi").get<double>();
        r.ball.theta_dot = b.at("theta_dot").get<double>();
        r.ball.phi_dot = b.at("phi_dot").get<double>();
        r.ball.attached = b.at("attached").get<bool>();
        if (!r.ball.attached) {
            r.ball.free_position = to_vec3(b.at("free_p"));
            r.ball.free_velocity = to_vec3(b.at("free_v"));
        }
        r.wind = to_vec3(j.at("wind"));
        return r;
    }
    if (type == "detection") {
        DetectionRecord r;
        r.t = t;
        r.drone = drone("drone");
        r.det.cls = enum_from<ObjectClass>(j.at("class"), class_from_string, "class");
        r.det.x = j.at("x").get<double>();
        r.det.y = j.at("y").get<double>();
        r.det.w = j.at("w").get<double>();
        r.det.h = j.at("h").get<double>();
        r.det.t = t;
        r.range = j.at("range").get<double>();
        return r;
    }
    if (type == "track") {
        TrackRecord r;
        r.t = t;
        r.drone = drone("drone");
        r.cls = enum_from<ObjectClass>(j.at("class"), class_from_string, "class");
        r.status = enum_from<TrackStatus>(j.at("status"), status_from_string, "status");
        for (int i = 0; i < 6; ++i) r.state[i] = j.at("state").at(i).get<double>();
        r.mahalanobis2 = j.at("d2").get<double>();
        r.rejected = j.at("rejected").get<bool>();
        return r;
    }
    if (type == "command") {
        CommandRecord r;
        r.t = t;
        r.drone = drone("drone");
        r.cmd.frame = enum_from<Frame>(j.at("frame"), frame_from_string, "frame");
        r.cmd.velocity = to_vec3(j.at("v"));
        r.cmd.yaw_rate = j.at("yaw_rate").get<double>();
        return r;
    }
    if (type == "phase") {
        PhaseRecord r;
        r.transition.t = t;
        r.transition.drone = drone("drone");
        r.transition.from = enum_from<MissionPhase>(j.at("from"), phase_from_string, "phase");
        r.transition.to = enum_from<MissionPhase>(j.at("to"), phase_from_string, "phase");
        return r;
    }
    if (type == "message") {
        MessageRecord r;
        r.t = t;
        r.event = j.at("event").get<std::string>();
        r.msg.sender = drone("sender");
        r.msg.t_sent = j.at("t_sent").get<double>();
        r.msg.kind = enum_from<MessageKind>(j.at("kind"), message_kind_from_string, "message kind");
        if (j.contains("position")) {
            SightingPayload p;
            p.position = to_vec3(j.at("position"));
            for (int i = 0; i < 9; ++i) p.covariance(i / 3, i % 3) = j.at("covariance").at(i).get<double>();
            r.msg.payload = p;
        }
        return r;
    }
    if (type == "event") {
        EventRecord r;
        r.t = t;
        r.kind = j.at("kind").get<std::string>();
        if (j.contains("drone")) r.drone = drone("drone");
        if (j.contains("phase")) r.phase = enum_from<MissionPhase>(j.at("phase"), phase_from_string, "phase");
        return r;
    }
    throw InputError("log: unknown record type '" + type + "'");
}

}  // namespace detail

inline nlohmann::ordered_json encode_record(const LogRecord& r) { return std::visit(detail::RecordEncoder{}, r); }

inline nlohmann::ordered_json verdict_json(const SimLog& log) {
    nlohmann::ordered_json j{{"type", "verdict"}, {"t", log.end_time}, {"verdict", to_string(log.verdict)}};
    j["capture_time"] = log.capture_time ? nlohmann::ordered_json(*log.capture_time) : nlohmann::ordered_json(nullptr);
    j["failure_cause"] = log.failure_cause;
    j["dynamics_steps"] = log.dynamics_steps;
    return j;
}

/// Header line, every record in order, then the verdict line.
inline void write_log(std::ostream& os, const SimLog& log) {
    os << log.header.dump() << '\n';
    for (const auto& r : log.records) os << encode_record(r).dump() << '\n';
    os << verdict_json(log).dump() << '\n';
}

inline std::string log_to_string(const SimLog& log) {
    std::ostringstream os;
    write_log(os, log);
    return os.str();
}

/// Reads a log written by write_log. Throws InputError on malformed input.
inline SimLog read_log(std::istream& is) {
    SimLog log;
    std::string line;
    int lineno = 0;
    bool have_header = false, have_verdict = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("log line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            const auto type = j.at("type").get<std::string>();
            if (!have_header) {
                if (type != "header" || j.value("schema", "") != kLogSchema)
                    throw InputError("log line 1: missing " + std::string(kLogSchema) + " header");
                log.header = j;
                have_header = true;
            } else if (type == "verdict") {
                auto v = verdict_from_string(j.at("verdict").get<std::string>());
                if (!v) throw InputError("log line " + std::to_string(lineno) + ": unknown verdict");
                log.verdict = *v;
                log.end_time = j.at("t").get<double>();
                if (!j.at("capture_time").is_null()) log.capture_time = j.at("capture_time").get<double>();
                log.failure_cause = j.at("failure_cause").get<std::string>();
                log.dynamics_steps = j.at("dynamics_steps").get<std::int64_t>();
                have_verdict = true;
            } else {
                log.records.push_back(detail::decode_record(j));
            }
        } catch (const nlohmann::json::exception& e) {
            throw InputError("log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_header) throw InputError("log: empty or missing header");
    if (!have_verdict) throw InputError("log: missing verdict line");
    return log;
}

/// Record time stamps must strictly increase within each stream. Streams are
/// keyed by record type plus drone, class, event or kind as applicable.
inline std::optional<std::string> check_stream_monotonicity(const SimLog& log) {
    std::map<std::string, double> last;
    for (const auto& r : log.records) {
        const auto j = encode_record(r);
        std::string key = j.at("type").get<std::string>();
        for (const char* k : {"drone", "class", "event", "kind", "sender"})
            if (j.contains(k)) key += "/" + j.at(k).get<std::string>();
        const double t = j.at("t").get<double>();
        auto it = last.find(key);
        if (it != last.end() && !(t > it->second))
            return "stream " + key + ": time " + std::to_string(t) + " does not follow " + std::to_string(it->second);
        last[key] = t;
    }
    return std::nullopt;
}

}  // namespace aerocap
