#pragma once

#include <array>
#include <vector>

#include "slf/vec.h"

namespace slf {

struct Aabb {
    Vec3 lo{1e30, 1e30, 1e30};
    Vec3 hi{-1e30, -1e30, -1e30};

    void expand(Vec3 p) { lo = min(lo, p); hi = max(hi, p); }
    void expand(const Aabb& b) { lo = min(lo, b.lo); hi = max(hi, b.hi); }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    double diagonal() const { return length(hi - lo); }
};

// Indexed triangle mesh with per-vertex shading attributes. `logits` holds M
// material-weight logits per vertex (flattened, vertex-major) and may be
// empty when no material assignment exists yet.
struct TriangleMesh {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals; // unit, per-vertex
    std::vector<Rgb> albedo;   // RGB in [0,1], per-vertex
    std::vector<std::array<int, 3>> faces;
    std::vector<double> logits; // vertex-major, size = positions.size() * num_materials
    int num_materials = 0;

    size_t vertex_count() const { return positions.size(); }
    size_t face_count() const { return faces.size(); }

    const double* vertex_logits(int v) const { return &logits[size_t(v) * num_materials]; }

    // Area-weighted average of incident face normals, renormalized.
    void compute_vertex_normals();

    Aabb bounds() const;

    // Checks index ranges, normal lengths, and albedo range. Throws DataError
    // on violation.
    void validate() const;
};

template <typename T>
T interpolate(const T& a0, const T& a1, const T& a2, double b1, double b2) {
    return a0 * (1.0 - b1 - b2) + a1 * b1 + a2 * b2;
}

} // namespace slf
