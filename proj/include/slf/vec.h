#pragma once

#include <cmath>
#include <algorithm>
#include <ostream>

namespace slf {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator*(double s, Vec3 a) { return a * s; }
inline Vec3 operator*(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, Vec3 b) { a = a - b; return a; }
inline Vec3& operator*=(Vec3& a, double s) { a = a * s; return a; }
inline bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length_squared(Vec3 a) { return dot(a, a); }
inline double length(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(Vec3 a) { return a / length(a); }

inline Vec3 min(Vec3 a, Vec3 b) { return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)}; }
inline Vec3 max(Vec3 a, Vec3 b) { return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}; }
inline double max_component(Vec3 a) { return std::max(a.x, std::max(a.y, a.z)); }
inline double mean_component(Vec3 a) { return (a.x + a.y + a.z) / 3.0; }

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
inline Vec3 clamp(Vec3 v, double lo, double hi) {
    return {clamp(v.x, lo, hi), clamp(v.y, lo, hi), clamp(v.z, lo, hi)};
}

// Safe inverse trig: clamps the argument so values that drift a few ulps
// outside [-1, 1] do not produce NaN.
inline double safe_acos(double c) { return std::acos(clamp(c, -1.0, 1.0)); }

inline std::ostream& operator<<(std::ostream& os, Vec3 v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

using Rgb = Vec3;

// 3x3 matrix stored as rows.
struct Mat3 {
    Vec3 r0, r1, r2;

    static Mat3 identity() { return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}; }
    static Mat3 from_columns(Vec3 c0, Vec3 c1, Vec3 c2) {
        return {{c0.x, c1.x, c2.x}, {c0.y, c1.y, c2.y}, {c0.z, c1.z, c2.z}};
    }
};

inline Vec3 operator*(const Mat3& m, Vec3 v) {
    return {dot(m.r0, v), dot(m.r1, v), dot(m.r2, v)};
}
inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 bt = Mat3::from_columns(b.r0, b.r1, b.r2); // transpose
    return {{dot(a.r0, bt.r0), dot(a.r0, bt.r1), dot(a.r0, bt.r2)},
            {dot(a.r1, bt.r0), dot(a.r1, bt.r1), dot(a.r1, bt.r2)},
            {dot(a.r2, bt.r0), dot(a.r2, bt.r1), dot(a.r2, bt.r2)}};
}
inline Mat3 transpose(const Mat3& m) { return Mat3::from_columns(m.r0, m.r1, m.r2); }
inline double determinant(const Mat3& m) { return dot(m.r0, cross(m.r1, m.r2)); }

} // namespace slf
