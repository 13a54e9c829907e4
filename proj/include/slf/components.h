#pragma once

#include <vector>

#include "slf/camera.h"
#include "slf/image.h"
#include "slf/panorama.h"
#include "slf/scene.h"

namespace slf {

// Per-pixel decomposition of a rendered view. Uncovered pixels hold zeros in
// every channel; `coverage` says which pixels are meaningful.
struct RenderComponents {
    int width = 0;
    int height = 0;
    ImageRgb diffuse;       // interpolated surface albedo
    ImageRgb specular;      // visibility-masked blended reflection lookup
    ImageRgb reflection;    // unit mirror direction of the view ray
    ImageF visibility;      // 1 if the reflected ray escapes, else 0
    ImageRgb first_bounce;  // albedo at the blocking surface where visibility = 0
    ImageF fresnel;         // Schlick term (1 - cos a)^5 for view angle a
    ImageMask coverage;

    // Extra channels for reprojection and fitting: blend weight per basis,
    // hit distance along the pixel ray, face index (-1 off surface) and the
    // barycentric coordinates of vertices 1 and 2.
    std::vector<ImageF> weights;
    ImageF depth;
    Image<int> face;
    ImageF bary1;
    ImageF bary2;
};

// Renders every component in one pass. The mesh must carry albedo and blend
// logits with one column per entry of `srms`.
RenderComponents render_components(const Scene& scene,
                                   const std::vector<Panorama>& srms,
                                   const Camera& camera);

enum class CompositeMode { Plain, Fresnel };

// Plain: clamp(diffuse + specular). Fresnel: the specular term is scaled by
// r0 + (1 - r0) * fresnel before the sum. r0 must lie in [0, 1].
ImageRgb composite(const RenderComponents& c, CompositeMode mode, double r0 = 0.04);

struct ConsistencyReport {
    long compared_pixels = 0;    // covered in B, co-visible from A
    double mean_weight_delta = 0;  // mean over pixels and bases of |w_A - w_B|
    double mean_diffuse_delta = 0; // mean over pixels and channels of |D_A - D_B|
};

// Warps each covered pixel of view B to its surface point, re-evaluates the
// blend weights and albedo as seen through camera A, and reports how far the
// two views disagree. Points hidden from A (ray test against the mesh with
// tolerance 1e-3 * diagonal) are skipped.
ConsistencyReport cross_project(const RenderComponents& a, const Camera& camera_a,
                                const RenderComponents& b, const Camera& camera_b,
                                const Scene& scene);

} // namespace slf
