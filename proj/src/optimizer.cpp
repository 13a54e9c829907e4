#include "slf/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "slf/errors.h"
#include "slf/rng.h"

namespace slf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAdamEps = 1e-8;

void validate(const OptimizerConfig& c) {
    if (c.basis_count < 1) throw std::invalid_argument("optimizer: basis_count must be >= 1");
    if (c.srm_height < 2 || c.srm_width != 2 * c.srm_height)
        throw std::invalid_argument("optimizer: reflectance maps must be equirectangular, "
                                    "width = 2 * height with height >= 2");
    if (!(c.lr_srm > 0) || !(c.lr_logits > 0))
        throw std::invalid_argument("optimizer: learning rates must be positive");
    if (c.lambda_sparsity < 0 || c.lambda_smoothness < 0)
        throw std::invalid_argument("optimizer: negative regularizer weight");
    if (c.epochs < 1 || c.batch < 1)
        throw std::invalid_argument("optimizer: epochs and batch must be >= 1");
    if (!(c.beta1 >= 0 && c.beta1 < 1) || !(c.beta2 >= 0 && c.beta2 < 1))
        throw std::invalid_argument("optimizer: betas must lie in [0, 1)");
    if (c.srm_init < 0 || c.logit_noise < 0)
        throw std::invalid_argument("optimizer: srm_init and logit_noise must be >= 0");
}

double sign(double x) { return x > 0 ? 1.0 : x < 0 ? -1.0 : 0.0; }

// One Adam step for a single scalar.
inline void adam(double& p, double& m, double& v, double g, double lr, double beta1,
                 double beta2, double c1, double c2) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    p -= lr * (m / c1) / (std::sqrt(v / c2) + kAdamEps);
}

} // namespace

FrameCache build_frame_cache(const Scene& scene, const ObservedFrame& frame,
                             int srm_width, int srm_height) {
    const TriangleMesh& mesh = scene.mesh;
    const ImageRgb& img = *frame.image;
    const Camera& cam = frame.camera;
    if (img.width != cam.intr.width || img.height != cam.intr.height)
        throw DataError("frame is " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + " but its camera expects " +
                        std::to_string(cam.intr.width) + "x" + std::to_string(cam.intr.height));

    FrameCache cache;
    const double eps = scene.ray_epsilon();
    for (int j = 0; j < img.height; ++j) {
        for (int i = 0; i < img.width; ++i) {
            const Ray ray = cam.pixel_center_ray(i, j);
            const auto hit = scene.bvh.intersect(mesh, ray, 0.0, kInf);
            if (!hit) continue;

            PixelSample s;
            const Rgb g = img.at(i, j);
            s.target = {float(g.x - hit->albedo.x), float(g.y - hit->albedo.y),
                        float(g.z - hit->albedo.z)};
            const auto& f = mesh.faces[hit->face];
            s.vert = {uint32_t(f[0]), uint32_t(f[1]), uint32_t(f[2])};
            s.b1 = float(hit->b1);
            s.b2 = float(hit->b2);

            const Vec3 refl = reflect(ray.dir, hit->normal);
            const auto block = scene.bvh.intersect(mesh, {hit->position, refl}, eps, kInf);
            s.visible = block ? 0 : 1;
            if (s.visible) {
                const BilinearFootprint fp = lookup_footprint(srm_width, srm_height, refl);
                for (int t = 0; t < 4; ++t) {
                    s.texel[t] = uint32_t(fp[t].index);
                    s.tweight[t] = float(fp[t].weight);
                }
            } else {
                s.texel = {0, 0, 0, 0};
                s.tweight = {0, 0, 0, 0};
            }
            cache.samples.push_back(s);
        }
    }
    return cache;
}

BasisState initial_state(const Scene& scene, const OptimizerConfig& config) {
    validate(config);
    BasisState state;
    state.srms.assign(config.basis_count,
                      Panorama(config.srm_width, config.srm_height,
                               {config.srm_init, config.srm_init, config.srm_init}));
    state.logits.assign(scene.mesh.vertex_count() * size_t(config.basis_count), 0.0);
    if (config.logit_noise > 0) {
        Rng rng(config.seed);
        for (double& z : state.logits) z = config.logit_noise * rng.normal();
    }
    return state;
}

std::vector<std::array<int, 2>> unique_edges(const TriangleMesh& mesh) {
    std::vector<std::array<int, 2>> edges;
    edges.reserve(mesh.face_count() * 3);
    for (const auto& f : mesh.faces)
        for (int e = 0; e < 3; ++e) {
            int a = f[e], b = f[(e + 1) % 3];
            edges.push_back({std::min(a, b), std::max(a, b)});
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

LossTerms loss_and_gradients(const std::vector<const FrameCache*>& batch,
                             const std::vector<std::array<int, 2>>& edges,
                             const BasisState& state, const OptimizerConfig& config,
                             BasisState* gradients) {
    const int m = config.basis_count;
    if (int(state.srms.size()) != m)
        throw std::invalid_argument("loss: state carries " + std::to_string(state.srms.size()) +
                                    " maps for basis_count " + std::to_string(m));
    const size_t num_verts = state.logits.size() / size_t(m);

    size_t covered = 0;
    for (const FrameCache* c : batch) covered += c->samples.size();
    if (covered == 0) throw DataError("loss: batch covers no pixels");

    if (gradients) {
        gradients->srms.assign(m, Panorama(config.srm_width, config.srm_height));
        gradients->logits.assign(state.logits.size(), 0.0);
    }

    const double inv = 1.0 / (3.0 * double(covered));
    const double lam_s = config.lambda_sparsity;
    double data = 0, spar = 0;
    std::vector<double> z(m), w(m), lookup(m * 3), dz(m);

    for (const FrameCache* cache : batch) {
        for (const PixelSample& s : cache->samples) {
            const double b1 = s.b1, b2 = s.b2, b0 = 1.0 - b1 - b2;
            const double* z0 = &state.logits[s.vert[0] * m];
            const double* z1 = &state.logits[s.vert[1] * m];
            const double* z2 = &state.logits[s.vert[2] * m];
            for (int k = 0; k < m; ++k) z[k] = b0 * z0[k] + b1 * z1[k] + b2 * z2[k];
            softmax(z.data(), m, w.data());

            double S[3] = {0, 0, 0};
            if (s.visible) {
                for (int k = 0; k < m; ++k) {
                    const Rgb* texels = state.srms[k].data.data();
                    Rgb acc{0, 0, 0};
                    for (int t = 0; t < 4; ++t)
                        acc = acc + double(s.tweight[t]) * texels[s.texel[t]];
                    lookup[k * 3 + 0] = acc.x;
                    lookup[k * 3 + 1] = acc.y;
                    lookup[k * 3 + 2] = acc.z;
                    S[0] += w[k] * acc.x;
                    S[1] += w[k] * acc.y;
                    S[2] += w[k] * acc.z;
                }
            }

            double gS[3]; // d(loss)/dS per channel
            for (int c = 0; c < 3; ++c) {
                const double r = double(s.target[c]) - S[c];
                data += std::abs(r);
                spar += std::abs(S[c]);
                gS[c] = -sign(r) * inv + lam_s * sign(S[c]) * inv;
            }

            if (gradients && s.visible) {
                for (int k = 0; k < m; ++k) {
                    Rgb* gt = gradients->srms[k].data.data();
                    for (int c = 0; c < 3; ++c) {
                        const double gk = gS[c] * w[k];
                        for (int t = 0; t < 4; ++t)
                            gt[s.texel[t]][c] += gk * double(s.tweight[t]);
                    }
                    // dS_c/dz_k = w_k (lookup_kc - S_c)
                    double acc = 0;
                    for (int c = 0; c < 3; ++c) acc += gS[c] * (lookup[k * 3 + c] - S[c]);
                    dz[k] = w[k] * acc;
                }
                for (int k = 0; k < m; ++k) {
                    gradients->logits[s.vert[0] * m + k] += b0 * dz[k];
                    gradients->logits[s.vert[1] * m + k] += b1 * dz[k];
                    gradients->logits[s.vert[2] * m + k] += b2 * dz[k];
                }
            }
        }
    }

    LossTerms loss;
    loss.data = data * inv;
    loss.sparsity = lam_s * spar * inv;

    if (!edges.empty() && config.lambda_smoothness > 0) {
        // blend weights at the vertices themselves
        std::vector<double> vw(num_verts * m);
        for (size_t v = 0; v < num_verts; ++v)
            softmax(&state.logits[v * m], m, &vw[v * m]);

        const double scale = config.lambda_smoothness / double(edges.size());
        double sm = 0;
        std::vector<double> sgn(m);
        for (const auto& e : edges) {
            const double* wa = &vw[size_t(e[0]) * m];
            const double* wb = &vw[size_t(e[1]) * m];
            double sa = 0, sb = 0;
            for (int k = 0; k < m; ++k) {
                sm += std::abs(wa[k] - wb[k]);
                sgn[k] = sign(wa[k] - wb[k]);
                sa += sgn[k] * wa[k];
                sb += sgn[k] * wb[k];
            }
            if (gradients)
                for (int j = 0; j < m; ++j) {
                    // d|W(a) - W(b)| through each endpoint's softmax
                    gradients->logits[size_t(e[0]) * m + j] += scale * wa[j] * (sgn[j] - sa);
                    gradients->logits[size_t(e[1]) * m + j] -= scale * wb[j] * (sgn[j] - sb);
                }
        }
        loss.smoothness = sm * scale;
    }
    return loss;
}

FitResult fit_basis_maps(const Scene& scene, const std::vector<ObservedFrame>& frames,
                         const OptimizerConfig& config) {
    validate(config);
    if (frames.empty()) throw DataError("fit: no training frames");

    std::vector<FrameCache> caches;
    caches.reserve(frames.size());
    for (size_t f = 0; f < frames.size(); ++f) {
        caches.push_back(build_frame_cache(scene, frames[f], config.srm_width,
                                           config.srm_height));
        if (caches.back().samples.empty())
            throw DataError("fit: frame " + std::to_string(f) + " does not cover the mesh");
    }

    const std::vector<std::array<int, 2>> edges = unique_edges(scene.mesh);
    FitResult result;
    result.state = initial_state(scene, config);
    BasisState& state = result.state;

    BasisState m1, m2; // Adam moments, same shapes as the state
    m1.srms.assign(config.basis_count, Panorama(config.srm_width, config.srm_height));
    m2.srms = m1.srms;
    m1.logits.assign(state.logits.size(), 0.0);
    m2.logits = m1.logits;

    Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<int> order(frames.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);

    BasisState grads;
    int step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        LossTerms epoch_sum;
        int epoch_steps = 0;
        for (size_t start = 0; start < order.size(); start += size_t(config.batch)) {
            std::vector<const FrameCache*> batch;
            for (size_t i = start; i < std::min(order.size(), start + size_t(config.batch)); ++i)
                batch.push_back(&caches[order[i]]);

            const LossTerms loss = loss_and_gradients(batch, edges, state, config, &grads);
            if (!std::isfinite(loss.total()))
                throw NumericError("fit: loss is not finite at step " + std::to_string(step) +
                                   " (epoch " + std::to_string(epoch) + ")");
            ++step;
            const double c1 = 1.0 - std::pow(config.beta1, step);
            const double c2 = 1.0 - std::pow(config.beta2, step);

            for (int k = 0; k < config.basis_count; ++k) {
                Rgb* p = state.srms[k].data.data();
                Rgb* gm = m1.srms[k].data.data();
                Rgb* gv = m2.srms[k].data.data();
                const Rgb* g = grads.srms[k].data.data();
                const size_t n = state.srms[k].data.size();
                for (size_t i = 0; i < n; ++i)
                    for (int c = 0; c < 3; ++c) {
                        adam(p[i][c], gm[i][c], gv[i][c], g[i][c], config.lr_srm,
                             config.beta1, config.beta2, c1, c2);
                        p[i][c] = std::max(p[i][c], 0.0);
                    }
            }
            for (size_t i = 0; i < state.logits.size(); ++i)
                adam(state.logits[i], m1.logits[i], m2.logits[i], grads.logits[i],
                     config.lr_logits, config.beta1, config.beta2, c1, c2);

            epoch_sum.data += loss.data;
            epoch_sum.sparsity += loss.sparsity;
            epoch_sum.smoothness += loss.smoothness;
            ++epoch_steps;
        }
        result.curve.push_back({epoch_sum.data / epoch_steps, epoch_sum.sparsity / epoch_steps,
                                epoch_sum.smoothness / epoch_steps});
    }

    result.observed = ImageMask(config.srm_width, config.srm_height);
    for (const FrameCache& cache : caches)
        for (const PixelSample& s : cache.samples)
            if (s.visible)
                for (int t = 0; t < 4; ++t)
                    if (s.tweight[t] > 0) result.observed.data[s.texel[t]] = 1;

    return result;
}

} // namespace slf
