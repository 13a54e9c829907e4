#include "slf/mesh.h"

#include <cmath>
#include <string>

#include "slf/errors.h"

namespace slf {

void TriangleMesh::compute_vertex_normals() {
    normals.assign(positions.size(), Vec3{});
    for (const auto& f : faces) {
        Vec3 e1 = positions[f[1]] - positions[f[0]];
        Vec3 e2 = positions[f[2]] - positions[f[0]];
        Vec3 fn = cross(e1, e2); // length = 2 * area, so this is area weighting
        normals[f[0]] += fn;
        normals[f[1]] += fn;
        normals[f[2]] += fn;
    }
    for (auto& n : normals) {
        double len = length(n);
        n = len > 0.0 ? n / len : Vec3{0, 0, 1};
    }
}

Aabb TriangleMesh::bounds() const {
    Aabb box;
    for (const auto& p : positions) box.expand(p);
    return box;
}

void TriangleMesh::validate() const {
    const int nv = int(positions.size());
    for (size_t i = 0; i < faces.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            int idx = faces[i][k];
            if (idx < 0 || idx >= nv)
                throw DataError("face " + std::to_string(i) + " references vertex " +
                                std::to_string(idx) + " outside [0, " + std::to_string(nv) + ")");
        }
    }
    if (!normals.empty() && normals.size() != positions.size())
        throw DataError("normal count does not match vertex count");
    for (size_t i = 0; i < normals.size(); ++i) {
        if (std::abs(length(normals[i]) - 1.0) > 1e-6)
            throw DataError("normal " + std::to_string(i) + " is not unit length");
    }
    if (!albedo.empty() && albedo.size() != positions.size())
        throw DataError("albedo count does not match vertex count");
    for (size_t i = 0; i < albedo.size(); ++i) {
        const Rgb& a = albedo[i];
        if (a.x < 0 || a.x > 1 || a.y < 0 || a.y > 1 || a.z < 0 || a.z > 1)
            throw DataError("albedo " + std::to_string(i) + " outside [0,1]");
    }
    if (num_materials > 0 && logits.size() != positions.size() * size_t(num_materials))
        throw DataError("logit count does not match vertex count * material count");
}

} // namespace slf
