#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "slf/panorama.h"
#include "slf/scene.h"

namespace slf {

struct OptimizerConfig {
    int basis_count = 2;
    int srm_width = 64; // equirectangular, width = 2 * height
    int srm_height = 32;
    double lr_srm = 1e-3;
    double lr_logits = 1e-2;
    double lambda_sparsity = 1e-4;
    double lambda_smoothness = 1e-3;
    int epochs = 40;
    int batch = 4; // frames per step; the last batch of an epoch may be short
    double beta1 = 0.9;
    double beta2 = 0.999;
    double srm_init = 0.05;
    // Stddev of the initial logit jitter. At exactly zero every basis receives
    // identical gradients forever and the blend never specializes.
    double logit_noise = 0.0;
    uint64_t seed = 1;
};

struct LossTerms {
    double data = 0;       // mean |target - prediction| over covered pixels, channels
    double sparsity = 0;   // lambda_sparsity * mean specular magnitude, same pooling
    double smoothness = 0; // lambda_smoothness * mean blend-weight jump over mesh edges
    double total() const { return data + sparsity + smoothness; }
};

// Everything the data term needs about one covered pixel, frozen before the
// first step. `target` already has the diffuse layer subtracted.
struct PixelSample {
    std::array<float, 3> target;
    std::array<uint32_t, 4> texel;  // bilinear footprint in the reflectance maps
    std::array<float, 4> tweight;
    std::array<uint32_t, 3> vert;   // corners of the hit face
    float b1 = 0, b2 = 0;
    uint8_t visible = 0;            // mirror ray escaped; 0 forces zero specular
};

struct FrameCache {
    std::vector<PixelSample> samples; // covered pixels in row-major order
};

FrameCache build_frame_cache(const Scene& scene, const ObservedFrame& frame,
                             int srm_width, int srm_height);

// The optimization variables: one reflectance map per basis and a logit row
// per vertex (vertex-major, basis_count entries each).
struct BasisState {
    std::vector<Panorama> srms;
    std::vector<double> logits;
};

BasisState initial_state(const Scene& scene, const OptimizerConfig& config);

// Each face edge once, lower vertex index first.
std::vector<std::array<int, 2>> unique_edges(const TriangleMesh& mesh);

// Loss over one batch plus, when `gradients` is non-null, d(loss)/d(state)
// accumulated into it (it is zeroed first). Sign subgradients at kinks are 0.
// Reductions run in a fixed order, so results are reproducible bit for bit.
LossTerms loss_and_gradients(const std::vector<const FrameCache*>& batch,
                             const std::vector<std::array<int, 2>>& edges,
                             const BasisState& state, const OptimizerConfig& config,
                             BasisState* gradients);

struct FitResult {
    BasisState state;
    std::vector<LossTerms> curve; // one entry per epoch, mean over its steps
    ImageMask observed;           // map texels touched by a visible covered pixel
};

// Adam over shuffled frame batches. Maps are clamped to >= 0 after every
// step. Throws DataError for unusable input (no frames, a frame that covers
// nothing, image/camera size mismatch) and NumericError if the loss stops
// being finite.
FitResult fit_basis_maps(const Scene& scene, const std::vector<ObservedFrame>& frames,
                         const OptimizerConfig& config);

} // namespace slf
