#pragma once

// Synthetic stand-in for the vision stack: a forward-looking pinhole camera
// that turns ground-truth geometry into noisy drone/ball bounding boxes, plus
// known-size monocular ranging.

#include "aerocap/core.hpp"
#include "aerocap/rng.hpp"
#include "aerocap/world.hpp"

#include <optional>
#include <string_view>

namespace aerocap {

struct CameraIntrinsics {
    int width = 640;
    int height = 480;
    double focal_length = 600.0;  // px
    double frame_rate = 30.0;     // Hz

    double cx() const { return 0.5 * width; }
    double cy() const { return 0.5 * height; }
};

/// Camera fixed to the vehicle, optical axis along vehicle +x.
struct CameraMount {
    Vec3 translation = Vec3::Zero();  // m, vehicle frame
};

enum class ObjectClass { drone, ball };

inline std::string_view to_string(ObjectClass c) { return c == ObjectClass::drone ? "drone" : "ball"; }

struct ImageDetection {
    double x = 0.0;  // px, box center
    double y = 0.0;
    double w = 0.0;  // px, box size
    double h = 0.0;
    ObjectClass cls = ObjectClass::ball;
    double t = 0.0;
};

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;  // m along the optical axis
};

/// Axis-aligned pixel rectangle.
struct PixelBox {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

inline Vec3 camera_position(const UavState& vehicle, const CameraMount& mount) {
    return vehicle.position + yaw_rotation(vehicle.yaw) * mount.translation;
}

/// World point in camera coordinates: (forward, left, up).
inline Vec3 to_camera_frame(const Vec3& point_world, const UavState& vehicle, const CameraMount& mount) {
    return yaw_rotation(vehicle.yaw).transpose() * (point_world - camera_position(vehicle, mount));
}

/// Pinhole projection. Image x grows rightward, image y downward. Returns
/// nothing behind the camera or outside [0, W] x [0, H].
inline std::optional<PixelPoint> project(const Vec3& point_world, const UavState& vehicle, const CameraMount& mount,
                                         const CameraIntrinsics& intr) {
    const Vec3 c = to_camera_frame(point_world, vehicle, mount);
    if (!(c.x() > 0.0)) return std::nullopt;
    const double f = intr.focal_length;
    PixelPoint p{intr.cx() - f * c.y() / c.x(), intr.cy() - f * c.z() / c.x(), c.x()};
    if (p.x < 0.0 || p.x > intr.width || p.y < 0.0 || p.y > intr.height) return std::nullopt;
    return p;
}

/// Back-projects a pixel at a given depth into the world.
inline Vec3 unproject(double x, double y, double depth, const UavState& vehicle, const CameraMount& mount,
                      const CameraIntrinsics& intr) {
    const double f = intr.focal_length;
    const Vec3 c(depth, -(x - intr.cx()) * depth / f, -(y - intr.cy()) * depth / f);
    return camera_position(vehicle, mount) + yaw_rotation(vehicle.yaw) * c;
}

struct SensorNoise {
    double sigma_center = 2.0;  // px
    double sigma_size = 0.5;    // px
};

/// Probability of detecting an object at a given depth: 1 up to near_range,
/// linear down to far_probability at far_range, nothing beyond.
struct DetectionModel {
    bool dropout = true;
    double near_range = 8.0;
    double far_range = 25.0;
    double far_probability = 0.2;

    double probability(double depth) const {
        if (!dropout) return 1.0;
        if (depth <= near_range) return 1.0;
        if (depth > far_range) return 0.0;
        const double s = (depth - near_range) / (far_range - near_range);
        return 1.0 + s * (far_probability - 1.0);
    }
};

/// Ground truth the camera can see at one instant.
struct WorldSnapshot {
    double t = 0.0;
    Vec3 target_drone = Vec3::Zero();
    Vec3 ball = Vec3::Zero();
    double ball_diameter = 0.18;  // m
    double drone_span = 0.35;     // m
};

/// Renders one detection of `cls`, or nothing when out of view, missed, or
/// (for a supplied gate) outside the gate. Always consumes four draws from
/// `rng` when the object projects into the image.
inline std::optional<ImageDetection> synth_detection(const WorldSnapshot& world, const UavState& observer,
                                                     const CameraMount& mount, const CameraIntrinsics& intr,
                                                     const SensorNoise& noise, const DetectionModel& model,
                                                     ObjectClass cls, const std::optional<PixelBox>& gate,
                                                     RngStream& rng) {
    const Vec3& point = cls == ObjectClass::ball ? world.ball : world.target_drone;
    const double size = cls == ObjectClass::ball ? world.ball_diameter : world.drone_span;
    const auto px = project(point, observer, mount, intr);
    if (!px) return std::nullopt;

    const double u_detect = rng.uniform();
    const double nx = rng.normal(0.0, noise.sigma_center);
    const double ny = rng.normal(0.0, noise.sigma_center);
    const double nw = rng.normal(0.0, noise.sigma_size);
    if (u_detect >= model.probability(px->depth)) return std::nullopt;

    ImageDetection det;
    det.cls = cls;
    det.t = world.t;
    det.x = std::clamp(px->x + nx, 0.0, static_cast<double>(intr.width));
    det.y = std::clamp(px->y + ny, 0.0, static_cast<double>(intr.height));
    det.w = std::max(1.0, intr.focal_length * size / px->depth + nw);
    det.h = det.w;
    if (gate && !gate->contains(det.x, det.y)) return std::nullopt;
    return det;
}

/// Known-size ranging: r = f D / w.
inline double estimate_range(const ImageDetection& det, const CameraIntrinsics& intr, double true_size) {
    if (!(det.w > 0.0) || !std::isfinite(det.w)) throw InvalidDetection("estimate_range: box width must be > 0");
    return intr.focal_length * true_size / det.w;
}

/// Where to look for the ball given a drone detection: a square centered one
/// rod length below the drone, sized for the sway plus the drone's extent.
inline PixelBox ball_search_gate(const ImageDetection& drone, double drone_span, double rod_length,
                                 double sway_margin) {
    const double px_per_m = drone.w / drone_span;
    const double half = (sway_margin + drone_span) * px_per_m;
    const double cy = drone.y + rod_length * px_per_m;
    return {drone.x - half, drone.x + half, cy - half, cy + half};
}

}  // namespace aerocap
