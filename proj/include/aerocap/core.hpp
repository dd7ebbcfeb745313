#pragma once

// Shared vocabulary for the aerocap library: vector aliases, angle helpers,
// and the exception hierarchy used across modules.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aerocap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGravity = 9.81;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Rotation about world +z (ENU yaw).
inline Mat3 yaw_rotation(double yaw) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    Mat3 r;
    r << c, -s, 0.0,
         s,  c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed numeric input.
class InputError : public Error {
public:
    using Error::Error;
};

/// Caller violated an interface contract (wrong frame tag, bad phase, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// A detection that cannot be used for ranging (w <= 0).
class InvalidDetection : public Error {
public:
    using Error::Error;
};

/// Guidance asked for a command from a track that has no estimate.
class NoCommand : public Error {
public:
    using Error::Error;
};

/// Configuration parse or validation failure. `field` is a dotted path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, int line, const std::string& what)
        : Error(format(field, line, what)), field_(std::move(field)), line_(line) {}

    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& field, int line, const std::string& what) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + what;
    }

    std::string field_;
    int line_;
};

}  // namespace aerocap
