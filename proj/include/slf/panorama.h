#pragma once

#include <array>

#include "slf/image.h"
#include "slf/vec.h"

namespace slf {

// Equirectangular radiance map. +Z is up; rows run from the +Z pole (v = 0)
// to the -Z pole (v = height). Texel (x, y) covers u in [x, x+1), its center
// sits at (x + 0.5, y + 0.5).
using Panorama = Image<Rgb>;

// Throws DataError unless width == 2 * height and all values are finite and
// non-negative.
void check_panorama(const Panorama& pano);

// theta = acos(d_z), phi = atan2(d_y, d_x);
// u = (phi / 2pi + 0.5) * width wrapped into [0, width), v = theta / pi * height.
void dir_to_uv(Vec3 dir, int width, int height, double& u, double& v);

Vec3 uv_to_dir(double u, double v, int width, int height);
Vec3 texel_center_dir(int x, int y, int width, int height);

// Solid angle subtended by any texel in row y (constant along a row).
double texel_solid_angle(int y, int width, int height);

struct TexelWeight {
    int index = 0;     // flattened texel index, y * width + x
    double weight = 0;
};

// The four texels and weights of the bilinear lookup at `dir`. Azimuth wraps,
// rows clamp at the poles; clamped rows can repeat a texel index, in which
// case its effective weight is the sum of the entries. Weights sum to 1.
using BilinearFootprint = std::array<TexelWeight, 4>;

BilinearFootprint lookup_footprint(int width, int height, Vec3 dir);

Rgb lookup_bilinear(const Panorama& pano, Vec3 dir);

// d(lookup_bilinear)/d(texel values): exactly the footprint weights.
BilinearFootprint lookup_gradient(const Panorama& pano, Vec3 dir);

// Specular lobe kernel evaluated at the cosine of the angle between sample
// and lobe center: K(c) = a^2 / (pi * (c^2 (a^2 - 1) + 1)^2) for c > 0, else
// 0, with a = roughness^2.
double ggx_kernel(double cos_angle, double roughness);

// Convolves the environment with the lobe kernel: for every output texel
// direction r, out(r) = sum_texels env * K(dot) * dOmega / sum K * dOmega.
// prefilter_ggx_brute is the literal double sum; prefilter_ggx computes the
// same sums via circular convolution over azimuth (the grids share their
// azimuth spacing) and matches the brute force to floating-point accuracy.
// Both reject roughness outside [0.01, 1].
Panorama prefilter_ggx(const Panorama& env, double roughness);
Panorama prefilter_ggx_brute(const Panorama& env, double roughness);

} // namespace slf
