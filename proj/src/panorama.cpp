#include "slf/panorama.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "slf/errors.h"
#include "slf/parallel.h"

namespace slf {

void check_panorama(const Panorama& pano) {
    if (pano.width <= 0 || pano.height <= 0 || pano.width != 2 * pano.height)
        throw DataError("panorama must be 2:1 (width = 2 * height)");
    for (const Rgb& v : pano.data) {
        for (int c = 0; c < 3; ++c) {
            if (!std::isfinite(v[c]) || v[c] < 0.0)
                throw DataError("panorama radiance must be finite and non-negative");
        }
    }
}

void dir_to_uv(Vec3 dir, int width, int height, double& u, double& v) {
    double theta = safe_acos(dir.z);
    double phi = std::atan2(dir.y, dir.x);
    u = (phi / (2.0 * M_PI) + 0.5) * width;
    u -= std::floor(u / width) * width; // wrap into [0, width)
    if (u >= width) u = 0.0;            // guard the u == width edge after rounding
    v = theta / M_PI * height;
}

Vec3 uv_to_dir(double u, double v, int width, int height) {
    double phi = (u / width - 0.5) * 2.0 * M_PI;
    double theta = v / height * M_PI;
    double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

Vec3 texel_center_dir(int x, int y, int width, int height) {
    return uv_to_dir(x + 0.5, y + 0.5, width, height);
}

double texel_solid_angle(int y, int width, int height) {
    double theta = (y + 0.5) / height * M_PI;
    return std::sin(theta) * (M_PI / height) * (2.0 * M_PI / width);
}

BilinearFootprint lookup_footprint(int width, int height, Vec3 dir) {
    double u, v;
    dir_to_uv(dir, width, height, u, v);
    double x = u - 0.5;
    double y = v - 0.5;
    double xf = std::floor(x);
    double yf = std::floor(y);
    double fx = x - xf;
    double fy = y - yf;

    int x0 = int(xf);
    x0 %= width;
    if (x0 < 0) x0 += width;
    int x1 = x0 + 1 == width ? 0 : x0 + 1;

    int y0 = int(yf);
    int y1 = y0 + 1;
    if (y0 < 0) y0 = 0;
    if (y1 < 0) y1 = 0;
    if (y0 > height - 1) y0 = height - 1;
    if (y1 > height - 1) y1 = height - 1;

    return {{{y0 * width + x0, (1 - fx) * (1 - fy)},
             {y0 * width + x1, fx * (1 - fy)},
             {y1 * width + x0, (1 - fx) * fy},
             {y1 * width + x1, fx * fy}}};
}

Rgb lookup_bilinear(const Panorama& pano, Vec3 dir) {
    BilinearFootprint fp = lookup_footprint(pano.width, pano.height, dir);
    Rgb out{};
    for (const auto& tw : fp) out += pano.data[tw.index] * tw.weight;
    return out;
}

BilinearFootprint lookup_gradient(const Panorama& pano, Vec3 dir) {
    return lookup_footprint(pano.width, pano.height, dir);
}

double ggx_kernel(double cos_angle, double roughness) {
    // The lobe is cut at the horizon. Cosines within 1e-12 of zero count as
    // outside so that different-but-equivalent ways of computing the cosine
    // make the same inclusion decision at the discontinuity.
    if (cos_angle <= 1e-12) return 0.0;
    double a = roughness * roughness;
    double a2 = a * a;
    double d = cos_angle * cos_angle * (a2 - 1.0) + 1.0;
    return a2 / (M_PI * d * d);
}

namespace {

void check_roughness(double roughness) {
    if (!(roughness >= 0.01 && roughness <= 1.0))
        throw std::invalid_argument("roughness must lie in [0.01, 1.0]");
}

struct RowGeometry {
    std::vector<double> sin_theta, cos_theta, domega;

    explicit RowGeometry(int width, int height)
        : sin_theta(height), cos_theta(height), domega(height) {
        for (int y = 0; y < height; ++y) {
            double theta = (y + 0.5) / height * M_PI;
            sin_theta[y] = std::sin(theta);
            cos_theta[y] = std::cos(theta);
            domega[y] = texel_solid_angle(y, width, height);
        }
    }
};

} // namespace

Panorama prefilter_ggx_brute(const Panorama& env, double roughness) {
    check_roughness(roughness);
    const int w = env.width, h = env.height;
    RowGeometry rows(w, h);

    std::vector<Vec3> dirs(size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) dirs[size_t(y) * w + x] = texel_center_dir(x, y, w, h);

    Panorama out(w, h);
    parallel_for(int64_t(h), [&](int64_t oy) {
        for (int ox = 0; ox < w; ++ox) {
            Vec3 r = dirs[size_t(oy) * w + ox];
            Rgb num{};
            double den = 0;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double c = dot(dirs[size_t(y) * w + x], r);
                    double k = ggx_kernel(c, roughness);
                    if (k == 0.0) continue;
                    double kw = k * rows.domega[y];
                    num += env.at(x, y) * kw;
                    den += kw;
                }
            }
            out.at(ox, int(oy)) = den > 0 ? num / den : Rgb{};
        }
    });
    return out;
}

// Same sums as the brute force, restructured. The output texel grid equals
// the input grid, so for a fixed pair of rows the kernel depends only on the
// azimuth offset (co - ci) mod width: the inner sums are circular
// convolutions over azimuth, evaluated with FFTs. Rows whose minimal angular
// separation puts the kernel below 1e-12 of its peak are skipped; the
// normalizer uses the same truncated support, which keeps constants exact.
Panorama prefilter_ggx(const Panorama& env, double roughness) {
    check_roughness(roughness);
    const int w = env.width, h = env.height;
    const int nfreq = w / 2 + 1;
    RowGeometry rows(w, h);

    // Row-pair pruning radius: kernel ratio a^4 / (a^2 + t^2)^2 < 1e-12.
    double a = roughness * roughness;
    double cutoff = a * std::sqrt(1e6 - 1.0) + 2.0 * M_PI / h;

    using Cplx = std::complex<double>;
    std::vector<Cplx> env_spec(size_t(h) * 3 * nfreq);
    {
        std::vector<double> in(w);
        fftw_plan plan = fftw_plan_dft_r2c_1d(
            w, in.data(), reinterpret_cast<fftw_complex*>(env_spec.data()), FFTW_ESTIMATE);
        for (int y = 0; y < h; ++y) {
            for (int c = 0; c < 3; ++c) {
                for (int x = 0; x < w; ++x) in[x] = env.at(x, y)[c];
                fftw_execute_dft_r2c(plan, in.data(),
                                     reinterpret_cast<fftw_complex*>(
                                         env_spec.data() + (size_t(y) * 3 + c) * nfreq));
            }
        }
        fftw_destroy_plan(plan);
    }

    // Reference plans; each worker executes them on its own buffers.
    std::vector<double> proto_real(w);
    std::vector<Cplx> proto_cplx(nfreq);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(
        w, proto_real.data(), reinterpret_cast<fftw_complex*>(proto_cplx.data()), FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(
        w, reinterpret_cast<fftw_complex*>(proto_cplx.data()), proto_real.data(), FFTW_ESTIMATE);

    Panorama out(w, h);
    parallel_for(int64_t(h), [&](int64_t oy_) {
        int oy = int(oy_);
        std::vector<double> kernel(w), conv(w);
        std::vector<Cplx> kspec(nfreq);
        std::vector<Cplx> acc(size_t(3) * nfreq, Cplx{});
        double den = 0;

        double so = rows.sin_theta[oy], co = rows.cos_theta[oy];
        double theta_o = (oy + 0.5) / h * M_PI;
        for (int y = 0; y < h; ++y) {
            double theta_i = (y + 0.5) / h * M_PI;
            if (std::abs(theta_i - theta_o) > cutoff) continue;
            double si = rows.sin_theta[y], ci = rows.cos_theta[y];
            double dom = rows.domega[y];
            bool any = false;
            for (int d = 0; d < w; ++d) {
                double cg = so * si * std::cos(2.0 * M_PI * d / w) + co * ci;
                double k = ggx_kernel(cg, roughness) * dom;
                kernel[d] = k;
                if (k != 0.0) {
                    den += k;
                    any = true;
                }
            }
            if (!any) continue;
            fftw_execute_dft_r2c(fwd, kernel.data(),
                                 reinterpret_cast<fftw_complex*>(kspec.data()));
            for (int c = 0; c < 3; ++c) {
                const Cplx* es = env_spec.data() + (size_t(y) * 3 + c) * nfreq;
                Cplx* ac = acc.data() + size_t(c) * nfreq;
                for (int f = 0; f < nfreq; ++f) ac[f] += es[f] * kspec[f];
            }
        }

        for (int c = 0; c < 3; ++c) {
            std::vector<Cplx> spec(acc.begin() + size_t(c) * nfreq,
                                   acc.begin() + size_t(c + 1) * nfreq);
            fftw_execute_dft_c2r(bwd, reinterpret_cast<fftw_complex*>(spec.data()), conv.data());
            for (int x = 0; x < w; ++x)
                out.at(x, oy)[c] = den > 0 ? conv[x] / (w * den) : 0.0;
        }
    });

    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    return out;
}

} // namespace slf
