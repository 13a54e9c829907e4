#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slf/camera.h"
#include "slf/image.h"
#include "slf/mesh.h"

namespace slf {

// ---- PFM (portable float map) ----
// Header "PF\n{w} {h}\n-1.0\n", float32 little-endian, rows bottom to top.
// Grayscale variant uses "Pf".
void write_pfm(const std::string& path, const ImageRgb& image);
void write_pfm_gray(const std::string& path, const ImageF& image);
ImageRgb read_pfm(const std::string& path);
ImageF read_pfm_gray(const std::string& path);

// ---- PNG ----
// 8-bit RGB. Values are encoded with gamma 2.2 on write and linearized with
// the inverse curve on read; out-of-range values clamp to [0, 1].
void write_png(const std::string& path, const ImageRgb& image);
ImageRgb read_png(const std::string& path);

// ---- PLY (binary little-endian) ----
// Vertex colors are stored as float32 when `float_colors` is true (lossless
// round trip) and as uint16 otherwise. Readers accept float, uint16, or
// uint8 colors; integer colors are mapped to [0, 1].
void write_ply(const std::string& path, const TriangleMesh& mesh, bool float_colors = true);
TriangleMesh read_ply(const std::string& path);

// ---- OBJ (v / vn / f, triangles only) ----
void write_obj(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::string& path);

// ---- Raw little-endian arrays ----
void write_floats(const std::string& path, const std::vector<float>& v);
std::vector<float> read_floats(const std::string& path);
void write_u32(const std::string& path, const std::vector<uint32_t>& v);
std::vector<uint32_t> read_u32(const std::string& path);

// ---- Minimal TOML subset ----
// Supports [section] headers, `key = value` pairs, strings, booleans,
// numbers, arrays of numbers, and # comments.
struct TomlValue {
    enum class Kind { String, Number, Boolean, NumberArray } kind = Kind::Number;
    std::string str;
    double num = 0;
    bool boolean = false;
    std::vector<double> array;
};

class Toml {
public:
    static Toml parse_file(const std::string& path);
    static Toml parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;
    std::vector<double> get_array(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_number(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

private:
    const TomlValue& require(const std::string& section, const std::string& key,
                             TomlValue::Kind kind) const;
    std::map<std::string, std::map<std::string, TomlValue>> sections_;
    std::string origin_;
};

// ---- Camera files ----
// Intrinsics: TOML with a [camera] section holding fx, fy, cx, cy, width,
// height. Trajectory: one line per frame, `timestamp tx ty tz qx qy qz qw`,
// camera-to-world, Hamilton quaternion with w last.
Intrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const Intrinsics& intr);

struct TrajectoryEntry {
    double timestamp = 0;
    Vec3 translation;
    Mat3 rotation; // world-from-camera
};
std::vector<TrajectoryEntry> read_trajectory(const std::string& path);
void write_trajectory(const std::string& path, const std::vector<TrajectoryEntry>& entries);

Mat3 quaternion_to_matrix(double qx, double qy, double qz, double qw);
void matrix_to_quaternion(const Mat3& m, double& qx, double& qy, double& qz, double& qw);

} // namespace slf
