#include "slf/components.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "slf/parallel.h"

namespace slf {

void softmax(const double* z, int m, double* w) {
    double z_max = z[0];
    for (int i = 1; i < m; ++i) z_max = std::max(z_max, z[i]);
    double sum = 0;
    for (int i = 0; i < m; ++i) {
        w[i] = std::exp(z[i] - z_max);
        sum += w[i];
    }
    for (int i = 0; i < m; ++i) w[i] /= sum;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Logits of the face's three vertices blended at (b1, b2).
void interpolate_logits(const TriangleMesh& mesh, int face, double b1, double b2, double* z) {
    const auto& f = mesh.faces[face];
    const double* z0 = mesh.vertex_logits(f[0]);
    const double* z1 = mesh.vertex_logits(f[1]);
    const double* z2 = mesh.vertex_logits(f[2]);
    const double b0 = 1.0 - b1 - b2;
    for (int i = 0; i < mesh.num_materials; ++i) z[i] = b0 * z0[i] + b1 * z1[i] + b2 * z2[i];
}

} // namespace

RenderComponents render_components(const Scene& scene, const std::vector<Panorama>& srms,
                                   const Camera& camera) {
    const TriangleMesh& mesh = scene.mesh;
    const int m = int(srms.size());
    if (m == 0) throw std::invalid_argument("render_components: no reflection maps");
    if (mesh.num_materials != m)
        throw std::invalid_argument("render_components: mesh carries " +
                                    std::to_string(mesh.num_materials) +
                                    " logits per vertex but " + std::to_string(m) +
                                    " reflection maps were given");
    for (const Panorama& srm : srms) check_panorama(srm);

    const int w = camera.intr.width;
    const int h = camera.intr.height;
    RenderComponents c;
    c.width = w;
    c.height = h;
    c.diffuse = ImageRgb(w, h);
    c.specular = ImageRgb(w, h);
    c.reflection = ImageRgb(w, h);
    c.visibility = ImageF(w, h);
    c.first_bounce = ImageRgb(w, h);
    c.fresnel = ImageF(w, h);
    c.coverage = ImageMask(w, h);
    c.weights.assign(m, ImageF(w, h));
    c.depth = ImageF(w, h);
    c.face = Image<int>(w, h, -1);
    c.bary1 = ImageF(w, h);
    c.bary2 = ImageF(w, h);

    const double eps = scene.ray_epsilon();
    parallel_for(h, [&](int64_t j) {
        std::vector<double> z(m), weights(m);
        for (int i = 0; i < w; ++i) {
            const Ray ray = camera.pixel_center_ray(i, int(j));
            const auto hit = scene.bvh.intersect(mesh, ray, 0.0, kInf);
            if (!hit) continue;

            c.coverage.at(i, j) = 1;
            c.depth.at(i, j) = hit->t;
            c.face.at(i, j) = hit->face;
            c.bary1.at(i, j) = hit->b1;
            c.bary2.at(i, j) = hit->b2;
            c.diffuse.at(i, j) = hit->albedo;

            const double cos_view = std::clamp(-dot(ray.dir, hit->normal), 0.0, 1.0);
            c.fresnel.at(i, j) = std::pow(1.0 - cos_view, 5.0);

            const Vec3 refl = reflect(ray.dir, hit->normal);
            c.reflection.at(i, j) = refl;

            const auto block = scene.bvh.intersect(mesh, {hit->position, refl}, eps, kInf);
            if (block) {
                c.first_bounce.at(i, j) = block->albedo;
            } else {
                c.visibility.at(i, j) = 1.0;
            }

            interpolate_logits(mesh, hit->face, hit->b1, hit->b2, z.data());
            softmax(z.data(), m, weights.data());
            Rgb blended{0, 0, 0};
            for (int k = 0; k < m; ++k) {
                c.weights[k].at(i, j) = weights[k];
                if (!block) blended = blended + weights[k] * lookup_bilinear(srms[k], refl);
            }
            c.specular.at(i, j) = blended;
        }
    });
    return c;
}

ImageRgb composite(const RenderComponents& c, CompositeMode mode, double r0) {
    if (!(r0 >= 0.0 && r0 <= 1.0))
        throw std::invalid_argument("composite: r0 must lie in [0, 1], got " + std::to_string(r0));
    ImageRgb out(c.width, c.height);
    for (int j = 0; j < c.height; ++j) {
        for (int i = 0; i < c.width; ++i) {
            if (!c.coverage.at(i, j)) continue;
            double gain = 1.0;
            if (mode == CompositeMode::Fresnel)
                gain = r0 + (1.0 - r0) * c.fresnel.at(i, j);
            const Rgb sum = c.diffuse.at(i, j) + gain * c.specular.at(i, j);
            out.at(i, j) = clamp(sum, 0.0, 1.0);
        }
    }
    return out;
}

ConsistencyReport cross_project(const RenderComponents& a, const Camera& camera_a,
                                const RenderComponents& b, const Camera& camera_b,
                                const Scene& scene) {
    const TriangleMesh& mesh = scene.mesh;
    const int m = int(a.weights.size());
    if (int(b.weights.size()) != m)
        throw std::invalid_argument("cross_project: views carry different basis counts");
    const double tol = 1e-3 * scene.diagonal;

    ConsistencyReport report;
    double weight_sum = 0;
    double diffuse_sum = 0;
    std::vector<double> z(m), w_a(m);

    for (int j = 0; j < b.height; ++j) {
        for (int i = 0; i < b.width; ++i) {
            if (!b.coverage.at(i, j)) continue;
            // Exact surface point of B's pixel from its face and barycentrics.
            const int face = b.face.at(i, j);
            const double b1 = b.bary1.at(i, j);
            const double b2 = b.bary2.at(i, j);
            const auto& f = mesh.faces[face];
            const Vec3 point = interpolate(mesh.positions[f[0]], mesh.positions[f[1]],
                                           mesh.positions[f[2]], b1, b2);

            const auto pix = camera_a.project(point);
            if (!pix) continue;
            // Nothing to compare against when A's frame is empty there.
            const int ai = std::clamp(int(pix->u), 0, a.width - 1);
            const int aj = std::clamp(int(pix->v), 0, a.height - 1);
            if (!a.coverage.at(ai, aj)) continue;

            // Re-trace through the exact continuous projection so the
            // comparison is against A's surface point, not a resampled grid.
            const Ray ray = camera_a.pixel_ray(pix->u, pix->v);
            const auto hit = scene.bvh.intersect(mesh, ray, 0.0, kInf);
            if (!hit) continue;
            if (length(hit->position - point) > tol) continue; // hidden from A

            interpolate_logits(mesh, hit->face, hit->b1, hit->b2, z.data());
            softmax(z.data(), m, w_a.data());

            ++report.compared_pixels;
            for (int k = 0; k < m; ++k)
                weight_sum += std::abs(w_a[k] - b.weights[k].at(i, j));
            const Rgb d = hit->albedo - b.diffuse.at(i, j);
            diffuse_sum += (std::abs(d.x) + std::abs(d.y) + std::abs(d.z)) / 3.0;
        }
    }
    if (report.compared_pixels > 0) {
        report.mean_weight_delta = weight_sum / (double(report.compared_pixels) * m);
        report.mean_diffuse_delta = diffuse_sum / double(report.compared_pixels);
    }
    return report;
}

} // namespace slf
