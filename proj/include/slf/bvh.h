#pragma once

#include <optional>
#include <vector>

#include "slf/camera.h"
#include "slf/mesh.h"

namespace slf {

struct Hit {
    double t = 0;       // ray parameter of the intersection
    int face = -1;      // face index in the mesh
    double b1 = 0, b2 = 0; // barycentric weights of vertices 1 and 2
    Vec3 position;
    Vec3 normal; // interpolated vertex normal, renormalized
    Rgb albedo;  // interpolated vertex albedo
};

// Binary BVH over mesh triangles. Median split on the longest centroid axis
// with a full sort, leaf size <= 4, so builds are deterministic. Queries must
// be passed the same mesh the BVH was built from.
class Bvh {
public:
    Bvh() = default;
    explicit Bvh(const TriangleMesh& mesh) { build(mesh); }

    void build(const TriangleMesh& mesh);

    // Nearest intersection with t in (t_min, t_max], two-sided triangles.
    std::optional<Hit> intersect(const TriangleMesh& mesh, const Ray& ray, double t_min,
                                 double t_max) const;

    // True if any intersection exists with t in (t_min, t_max].
    bool occluded(const TriangleMesh& mesh, const Ray& ray, double t_min, double t_max) const;

    const Aabb& bounds() const { return nodes_.empty() ? empty_bounds_ : nodes_[0].box; }

private:
    struct Node {
        Aabb box;
        int left = -1;   // internal: child indices; leaf: left = -1
        int first = 0;   // leaf: offset into prims_
        int count = 0;   // leaf: triangle count
    };

    std::vector<Node> nodes_;
    std::vector<int> prims_; // triangle indices, leaf-ordered
    Aabb empty_bounds_;

    int build_node(const TriangleMesh& mesh, std::vector<int>& tris, int begin, int end,
                   const std::vector<Vec3>& centroids);
};

// Exhaustive scan over every triangle; reference for testing the BVH.
std::optional<Hit> intersect_brute_force(const TriangleMesh& mesh, const Ray& ray,
                                         double t_min, double t_max);

// Möller–Trumbore, two-sided. Returns (t, b1, b2) on hit.
bool intersect_triangle(const Ray& ray, Vec3 v0, Vec3 v1, Vec3 v2,
                        double& t, double& b1, double& b2);

} // namespace slf
