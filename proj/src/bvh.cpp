#include "slf/bvh.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slf {

bool intersect_triangle(const Ray& ray, Vec3 v0, Vec3 v1, Vec3 v2,
                        double& t, double& b1, double& b2) {
    Vec3 e1 = v1 - v0;
    Vec3 e2 = v2 - v0;
    Vec3 pvec = cross(ray.dir, e2);
    double det = dot(e1, pvec);
    if (std::abs(det) < 1e-14) return false;
    double inv_det = 1.0 / det;
    Vec3 tvec = ray.origin - v0;
    b1 = dot(tvec, pvec) * inv_det;
    if (b1 < 0.0 || b1 > 1.0) return false;
    Vec3 qvec = cross(tvec, e1);
    b2 = dot(ray.dir, qvec) * inv_det;
    if (b2 < 0.0 || b1 + b2 > 1.0) return false;
    t = dot(e2, qvec) * inv_det;
    return true;
}

namespace {

void fill_hit(const TriangleMesh& mesh, const Ray& ray, int face,
              double t, double b1, double b2, Hit& hit) {
    hit.t = t;
    hit.face = face;
    hit.b1 = b1;
    hit.b2 = b2;
    hit.position = ray.origin + ray.dir * t;
    const auto& f = mesh.faces[face];
    if (!mesh.normals.empty()) {
        Vec3 n = interpolate(mesh.normals[f[0]], mesh.normals[f[1]], mesh.normals[f[2]], b1, b2);
        double len = length(n);
        hit.normal = len > 0 ? n / len : Vec3{0, 0, 1};
    } else {
        Vec3 gn = cross(mesh.positions[f[1]] - mesh.positions[f[0]],
                        mesh.positions[f[2]] - mesh.positions[f[0]]);
        double len = length(gn);
        hit.normal = len > 0 ? gn / len : Vec3{0, 0, 1};
    }
    hit.albedo = mesh.albedo.empty()
                     ? Rgb{}
                     : interpolate(mesh.albedo[f[0]], mesh.albedo[f[1]], mesh.albedo[f[2]], b1, b2);
}

bool hit_box(const Aabb& box, const Ray& ray, double t_min, double t_max) {
    for (int a = 0; a < 3; ++a) {
        double d = ray.dir[a];
        double o = ray.origin[a];
        if (std::abs(d) < 1e-300) {
            if (o < box.lo[a] || o > box.hi[a]) return false;
            continue;
        }
        double inv = 1.0 / d;
        double t0 = (box.lo[a] - o) * inv;
        double t1 = (box.hi[a] - o) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_min = std::max(t_min, t0);
        t_max = std::min(t_max, t1);
        if (t_min > t_max) return false;
    }
    return true;
}

Aabb triangle_bounds(const TriangleMesh& mesh, int face) {
    Aabb box;
    for (int k = 0; k < 3; ++k) box.expand(mesh.positions[mesh.faces[face][k]]);
    return box;
}

} // namespace

void Bvh::build(const TriangleMesh& mesh) {
    nodes_.clear();
    prims_.clear();
    const int n = int(mesh.face_count());
    if (n == 0) return;

    std::vector<Vec3> centroids(n);
    for (int i = 0; i < n; ++i) centroids[i] = triangle_bounds(mesh, i).center();

    std::vector<int> tris(n);
    std::iota(tris.begin(), tris.end(), 0);
    nodes_.reserve(size_t(2) * n);
    build_node(mesh, tris, 0, n, centroids);
    prims_ = std::move(tris);
}

int Bvh::build_node(const TriangleMesh& mesh, std::vector<int>& tris, int begin, int end,
                    const std::vector<Vec3>& centroids) {
    int index = int(nodes_.size());
    nodes_.emplace_back();

    Aabb box;
    Aabb cbox;
    for (int i = begin; i < end; ++i) {
        box.expand(triangle_bounds(mesh, tris[i]));
        cbox.expand(centroids[tris[i]]);
    }
    nodes_[index].box = box;

    int count = end - begin;
    if (count <= 4) {
        nodes_[index].first = begin;
        nodes_[index].count = count;
        return index;
    }

    Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;

    std::sort(tris.begin() + begin, tris.begin() + end, [&](int a, int b) {
        double ca = centroids[a][axis], cb = centroids[b][axis];
        return ca < cb || (ca == cb && a < b);
    });
    int mid = begin + count / 2;

    int left = build_node(mesh, tris, begin, mid, centroids);
    int right = build_node(mesh, tris, mid, end, centroids);
    nodes_[index].left = left;
    nodes_[index].first = right;
    nodes_[index].count = 0;
    return index;
}

std::optional<Hit> Bvh::intersect(const TriangleMesh& mesh, const Ray& ray, double t_min,
                                  double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    int best_face = -1;
    double best_t = t_max, best_b1 = 0, best_b2 = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        if (!hit_box(node.box, ray, t_min, best_t)) continue;
        if (node.left < 0) {
            for (int i = 0; i < node.count; ++i) {
                int face = prims_[node.first + i];
                const auto& f = mesh.faces[face];
                double t, b1, b2;
                if (intersect_triangle(ray, mesh.positions[f[0]], mesh.positions[f[1]],
                                       mesh.positions[f[2]], t, b1, b2) &&
                    t > t_min && t <= best_t) {
                    // Ties on t resolve to the lowest face index so traversal
                    // order cannot change the result.
                    if (best_face < 0 || t < best_t || face < best_face) {
                        best_t = t;
                        best_face = face;
                        best_b1 = b1;
                        best_b2 = b2;
                    }
                }
            }
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.first;
        }
    }
    if (best_face < 0) return std::nullopt;
    Hit hit;
    fill_hit(mesh, ray, best_face, best_t, best_b1, best_b2, hit);
    return hit;
}

bool Bvh::occluded(const TriangleMesh& mesh, const Ray& ray, double t_min,
                   double t_max) const {
    if (nodes_.empty()) return false;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        if (!hit_box(node.box, ray, t_min, t_max)) continue;
        if (node.left < 0) {
            for (int i = 0; i < node.count; ++i) {
                int face = prims_[node.first + i];
                const auto& f = mesh.faces[face];
                double t, b1, b2;
                if (intersect_triangle(ray, mesh.positions[f[0]], mesh.positions[f[1]],
                                       mesh.positions[f[2]], t, b1, b2) &&
                    t > t_min && t <= t_max)
                    return true;
            }
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.first;
        }
    }
    return false;
}

std::optional<Hit> intersect_brute_force(const TriangleMesh& mesh, const Ray& ray,
                                         double t_min, double t_max) {
    int best_face = -1;
    double best_t = t_max, best_b1 = 0, best_b2 = 0;
    for (int face = 0; face < int(mesh.face_count()); ++face) {
        const auto& f = mesh.faces[face];
        double t, b1, b2;
        if (intersect_triangle(ray, mesh.positions[f[0]], mesh.positions[f[1]],
                               mesh.positions[f[2]], t, b1, b2) &&
            t > t_min && t <= best_t) {
            if (best_face < 0 || t < best_t || face < best_face) {
                best_t = t;
                best_face = face;
                best_b1 = b1;
                best_b2 = b2;
            }
        }
    }
    if (best_face < 0) return std::nullopt;
    Hit hit;
    fill_hit(mesh, ray, best_face, best_t, best_b1, best_b2, hit);
    return hit;
}

} // namespace slf
