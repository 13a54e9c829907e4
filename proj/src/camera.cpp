#include "slf/camera.h"

#include <cmath>

namespace slf {

Camera Camera::look_at(const Intrinsics& intr, Vec3 position, Vec3 target, Vec3 up) {
    Vec3 z = normalize(target - position);
    Vec3 xv = cross(z, up);
    double len = length(xv);
    if (len < 1e-9) {
        // Looking along `up`; pick an arbitrary perpendicular roll.
        Vec3 alt = std::abs(z.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        xv = cross(z, alt);
        len = length(xv);
    }
    Vec3 x = xv / len;
    Vec3 y = cross(z, x);
    Camera cam;
    cam.intr = intr;
    cam.rotation = Mat3::from_columns(x, y, z);
    cam.position = position;
    return cam;
}

Ray Camera::pixel_ray(double u, double v) const {
    Vec3 dir_cam{(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
    return Ray{position, normalize(rotation * dir_cam)};
}

std::optional<PixelCoord> Camera::project(Vec3 world_point) const {
    Vec3 p = world_to_camera(world_point);
    if (p.z <= 0.0) return std::nullopt;
    double u = intr.fx * (p.x / p.z) + intr.cx;
    double v = intr.fy * (p.y / p.z) + intr.cy;
    if (u < 0.0 || u >= intr.width || v < 0.0 || v >= intr.height) return std::nullopt;
    return PixelCoord{u, v, p.z};
}

Vec3 Camera::unproject(double u, double v, double depth) const {
    Vec3 p_cam{(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth};
    return rotation * p_cam + position;
}

} // namespace slf
