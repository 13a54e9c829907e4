#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "slf/errors.h"
#include "slf/io.h"

namespace slf {

Intrinsics read_intrinsics(const std::string& path) {
    Toml toml = Toml::parse_file(path);
    Intrinsics intr;
    intr.fx = toml.get_number("camera", "fx");
    intr.fy = toml.get_number("camera", "fy");
    intr.cx = toml.get_number("camera", "cx");
    intr.cy = toml.get_number("camera", "cy");
    intr.width = int(toml.get_number("camera", "width"));
    intr.height = int(toml.get_number("camera", "height"));
    if (intr.fx <= 0 || intr.fy <= 0)
        throw DataError(path + ": focal lengths must be positive");
    if (intr.width <= 0 || intr.height <= 0)
        throw DataError(path + ": image size must be positive");
    if (intr.cx < 0 || intr.cx >= intr.width || intr.cy < 0 || intr.cy >= intr.height)
        throw DataError(path + ": principal point outside the image");
    return intr;
}

void write_intrinsics(const std::string& path, const Intrinsics& intr) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << "[camera]\n";
    out << std::setprecision(17);
    out << "fx = " << intr.fx << "\n";
    out << "fy = " << intr.fy << "\n";
    out << "cx = " << intr.cx << "\n";
    out << "cy = " << intr.cy << "\n";
    out << "width = " << intr.width << "\n";
    out << "height = " << intr.height << "\n";
    if (!out) throw DataError("write failed: " + path);
}

Mat3 quaternion_to_matrix(double qx, double qy, double qz, double qw) {
    double n = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
    if (n < 1e-12) throw DataError("zero-length quaternion");
    qx /= n; qy /= n; qz /= n; qw /= n;
    double xx = qx * qx, yy = qy * qy, zz = qz * qz;
    double xy = qx * qy, xz = qx * qz, yz = qy * qz;
    double wx = qw * qx, wy = qw * qy, wz = qw * qz;
    return {{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
            {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
            {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}};
}

void matrix_to_quaternion(const Mat3& m, double& qx, double& qy, double& qz, double& qw) {
    double trace = m.r0.x + m.r1.y + m.r2.z;
    if (trace > 0) {
        double s = std::sqrt(trace + 1.0) * 2;
        qw = 0.25 * s;
        qx = (m.r2.y - m.r1.z) / s;
        qy = (m.r0.z - m.r2.x) / s;
        qz = (m.r1.x - m.r0.y) / s;
    } else if (m.r0.x > m.r1.y && m.r0.x > m.r2.z) {
        double s = std::sqrt(1.0 + m.r0.x - m.r1.y - m.r2.z) * 2;
        qw = (m.r2.y - m.r1.z) / s;
        qx = 0.25 * s;
        qy = (m.r0.y + m.r1.x) / s;
        qz = (m.r0.z + m.r2.x) / s;
    } else if (m.r1.y > m.r2.z) {
        double s = std::sqrt(1.0 + m.r1.y - m.r0.x - m.r2.z) * 2;
        qw = (m.r0.z - m.r2.x) / s;
        qx = (m.r0.y + m.r1.x) / s;
        qy = 0.25 * s;
        qz = (m.r1.z + m.r2.y) / s;
    } else {
        double s = std::sqrt(1.0 + m.r2.z - m.r0.x - m.r1.y) * 2;
        qw = (m.r1.x - m.r0.y) / s;
        qx = (m.r0.z + m.r2.x) / s;
        qy = (m.r1.z + m.r2.y) / s;
        qz = 0.25 * s;
    }
}

std::vector<TrajectoryEntry> read_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("cannot open " + path);
    std::vector<TrajectoryEntry> entries;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = line;
        size_t hash = t.find('#');
        if (hash != std::string::npos) t = t.substr(0, hash);
        std::istringstream ls(t);
        std::vector<double> fields;
        double v;
        while (ls >> v) fields.push_back(v);
        if (fields.empty()) continue;
        if (fields.size() != 8)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 8 fields " +
                            "(timestamp tx ty tz qx qy qz qw), found " +
                            std::to_string(fields.size()));
        TrajectoryEntry e;
        e.timestamp = fields[0];
        e.translation = {fields[1], fields[2], fields[3]};
        e.rotation = quaternion_to_matrix(fields[4], fields[5], fields[6], fields[7]);
        entries.push_back(e);
    }
    return entries;
}

void write_trajectory(const std::string& path, const std::vector<TrajectoryEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << std::setprecision(17);
    for (const auto& e : entries) {
        double qx, qy, qz, qw;
        matrix_to_quaternion(e.rotation, qx, qy, qz, qw);
        out << e.timestamp << " " << e.translation.x << " " << e.translation.y << " "
            << e.translation.z << " " << qx << " " << qy << " " << qz << " " << qw << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

} // namespace slf
