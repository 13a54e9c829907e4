#pragma once

#include <optional>
#include <stdexcept>

#include "slf/vec.h"

namespace slf {

struct Ray {
    Vec3 origin;
    Vec3 dir; // unit length
};

// Mirror reflection of a direction about a unit normal. Both inputs must be
// unit vectors.
inline Vec3 reflect(Vec3 incident, Vec3 normal) {
    if (std::abs(length_squared(incident) - 1.0) > 2e-6 ||
        std::abs(length_squared(normal) - 1.0) > 2e-6)
        throw std::invalid_argument("reflect: inputs must be unit vectors");
    return incident - 2.0 * dot(incident, normal) * normal;
}

struct Intrinsics {
    int width = 0;
    int height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;
};

struct PixelCoord {
    double u = 0, v = 0; // continuous pixel coordinates
    double depth = 0;    // distance along the optical axis, meters
};

// Pinhole camera. Camera frame: x right, y down, z forward (looking
// direction). Pose maps camera coordinates into world coordinates.
struct Camera {
    Intrinsics intr;
    Mat3 rotation = Mat3::identity(); // world-from-camera
    Vec3 position;                    // camera center in world

    // Camera at `position` looking toward `target`. `up` picks the roll; the
    // image y axis points against it.
    static Camera look_at(const Intrinsics& intr, Vec3 position, Vec3 target,
                          Vec3 up = {0, 0, 1});

    // Ray through continuous pixel coordinates (u, v). The center of pixel
    // (i, j) is at (i + 0.5, j + 0.5).
    Ray pixel_ray(double u, double v) const;
    Ray pixel_center_ray(int i, int j) const { return pixel_ray(i + 0.5, j + 0.5); }

    // Projects a world point into the image. Empty if the point is not
    // strictly in front of the camera or falls outside the image bounds.
    std::optional<PixelCoord> project(Vec3 world_point) const;

    // World point at the given pixel and depth (distance along the optical
    // axis). Inverse of project on the valid domain.
    Vec3 unproject(double u, double v, double depth) const;

    Vec3 world_to_camera(Vec3 world_point) const {
        return transpose(rotation) * (world_point - position);
    }
    Vec3 camera_dir_to_world(Vec3 dir_cam) const { return rotation * dir_cam; }
};

} // namespace slf
