#pragma once

#include <string>
#include <vector>

#include "slf/camera.h"
#include "slf/image.h"
#include "slf/mesh.h"

namespace slf {

struct SyntheticData;

// A capture loaded in memory: calibrated, linearized frames plus the mesh.
// `train` and `test` hold indices into the frame arrays, never frame ids.
struct Dataset {
    TriangleMesh mesh;
    Intrinsics intrinsics;
    std::vector<int> frame_ids; // original trajectory line numbers, ascending
    std::vector<double> timestamps;
    std::vector<Camera> cameras;
    std::vector<ImageRgb> images; // linear radiance
    std::vector<int> train;
    std::vector<int> test;

    size_t frame_count() const { return images.size(); }
};

// Reads a scene descriptor TOML and everything it references:
//
//   [scene]
//   mesh = "mesh.ply"
//   intrinsics = "intrinsics.toml"
//   trajectory = "trajectory.txt"
//   frames = "frames"
//   split = "split.txt"        # optional; omitted = all frames train
//
// Relative paths resolve against the descriptor's directory. Frame k of the
// trajectory is frames/{k:05}.pfm or .png; the PFM wins when both exist, PNG
// is linearized with gamma 2.2. Every trajectory line must have an image even
// if the split drops it. The split file lists frame ids under "train" and
// "test" header lines; the two sets must be disjoint. `stride` keeps every
// stride-th entry of each list (long captures are heavily oversampled; 1
// keeps everything). Only surviving frames are decoded. A non-empty
// `frames_dir` overrides the descriptor's frames directory.
Dataset load_dataset(const std::string& scene_toml, int stride = 1,
                     const std::string& frames_dir = {});

// Writes a synthetic capture in the layout load_dataset reads, plus ground
// truth sidecars nothing loads by default: gt_srm_{i}.pfm, gt_albedo.ply
// (clean geometry, baked vertex colors), gt_env.pfm. Frames go out as both
// PFM (exact) and PNG (preview). Every test_stride-th frame lands in the
// test split; 0 puts everything in train.
void write_dataset(const std::string& dir, const SyntheticData& data, int test_stride = 0);

// Pixel errors over a coverage mask, plus the angular distance to the
// nearest train view measured between unit vectors from the camera centers
// toward `center`. l2 is the root mean square error; psnr is against peak
// 1.0 and infinite for identical pixels.
struct FrameMetrics {
    int frame_id = 0;
    double l1 = 0;
    double l2 = 0;
    double psnr = 0;
    double view_angle_deg = 0;
    size_t pixels = 0; // masked pixel count
};

struct MetricsReport {
    std::vector<FrameMetrics> frames;
    double mean_l1 = 0;
    double mean_l2 = 0;
    double mean_psnr = 0;
};

FrameMetrics frame_metrics(const ImageRgb& rendered, const ImageRgb& reference,
                           const ImageMask& mask, const Camera& camera,
                           const std::vector<Camera>& train_cameras, Vec3 center);

// One entry per frame; throws MismatchError when the array lengths or image
// sizes disagree. Aggregate means weight frames equally.
MetricsReport evaluate(const std::vector<ImageRgb>& rendered,
                       const std::vector<ImageRgb>& reference,
                       const std::vector<ImageMask>& masks,
                       const std::vector<Camera>& cameras,
                       const std::vector<Camera>& train_cameras, Vec3 center,
                       const std::vector<int>* frame_ids = nullptr);

void write_metrics_csv(const std::string& path, const MetricsReport& report);

} // namespace slf
