#include "slf/diffuse.h"

#include <algorithm>
#include <cmath>

#include "slf/bvh.h"
#include "slf/parallel.h"

namespace slf {

namespace {

constexpr double kMinCos = 0.2;

Rgb sample_image_bilinear(const ImageRgb& img, double u, double v) {
    // pixel (i, j) has its center at (i + 0.5, j + 0.5)
    double x = clamp(u - 0.5, 0.0, double(img.width - 1));
    double y = clamp(v - 0.5, 0.0, double(img.height - 1));
    int x0 = std::min(int(x), img.width - 2 >= 0 ? img.width - 2 : 0);
    int y0 = std::min(int(y), img.height - 2 >= 0 ? img.height - 2 : 0);
    double fx = x - x0, fy = y - y0;
    return img.at(x0, y0) * ((1 - fx) * (1 - fy)) + img.at(x0 + 1, y0) * (fx * (1 - fy)) +
           img.at(x0, y0 + 1) * ((1 - fx) * fy) + img.at(x0 + 1, y0 + 1) * (fx * fy);
}

// One channel of the soft minimum. Samples must be sorted ascending.
double irls_channel(const std::vector<double>& s, int iterations, double epsilon) {
    const size_t n = s.size();
    // 10th percentile with linear interpolation between order statistics
    double pos = 0.1 * double(n - 1);
    size_t lo = size_t(pos);
    double frac = pos - double(lo);
    double d = lo + 1 < n ? s[lo] * (1.0 - frac) + s[lo + 1] * frac : s[lo];
    for (int it = 0; it < iterations; ++it) {
        double num = 0, den = 0;
        for (double v : s) {
            double w = 1.0 / (epsilon + std::max(0.0, v - d));
            num += w * v;
            den += w;
        }
        d = num / den;
    }
    return d;
}

} // namespace

VertexObservations gather_observations(const Scene& scene,
                                       const std::vector<ObservedFrame>& frames) {
    const TriangleMesh& mesh = scene.mesh;
    const size_t nv = mesh.vertex_count();
    const double tol = 1e-3 * scene.diagonal;

    // one buffer per frame so the merge order is fixed regardless of threads
    std::vector<std::vector<std::pair<int, Observation>>> found(frames.size());
    parallel_for(int64_t(frames.size()), [&](int64_t f) {
        const Camera& cam = frames[f].camera;
        const ImageRgb& img = *frames[f].image;
        auto& out = found[f];
        for (size_t v = 0; v < nv; ++v) {
            const Vec3 p = mesh.positions[v];
            const Vec3 to_cam = cam.position - p;
            const double dist = length(to_cam);
            const double cos_angle = dot(mesh.normals[v], to_cam) / dist;
            if (cos_angle < kMinCos) continue;
            const auto pix = cam.project(p);
            if (!pix) continue;
            // anything more than tol in front of the vertex blocks it; asking
            // instead for a hit at the vertex depth is fragile because the ray
            // meets the mesh exactly at a triangle corner and can slip through
            const Ray ray{cam.position, to_cam * (-1.0 / dist)};
            if (scene.bvh.occluded(mesh, ray, 0.0, dist - tol)) continue;
            out.push_back({int(v), {sample_image_bilinear(img, pix->u, pix->v),
                                    cos_angle, int(f)}});
        }
    });

    VertexObservations obs;
    obs.per_vertex.resize(nv);
    for (const auto& frame_hits : found)
        for (const auto& [v, o] : frame_hits) obs.per_vertex[v].push_back(o);
    obs.low_confidence.resize(nv);
    for (size_t v = 0; v < nv; ++v) obs.low_confidence[v] = obs.per_vertex[v].size() < 3;
    return obs;
}

std::vector<Rgb> robust_min_irls(const VertexObservations& obs, int iterations,
                                 double epsilon) {
    std::vector<Rgb> albedo(obs.per_vertex.size());
    parallel_for(int64_t(obs.per_vertex.size()), [&](int64_t v) {
        const auto& samples = obs.per_vertex[v];
        if (samples.empty()) return; // stays black, caller sees the flag
        std::vector<double> channel(samples.size());
        Rgb result;
        for (int c = 0; c < 3; ++c) {
            for (size_t k = 0; k < samples.size(); ++k) channel[k] = samples[k].color[c];
            // sorting makes the estimate exactly permutation invariant
            std::sort(channel.begin(), channel.end());
            result[c] = irls_channel(channel, iterations, epsilon);
        }
        albedo[v] = result;
    });
    return albedo;
}

} // namespace slf
