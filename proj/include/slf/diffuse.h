#pragma once

#include <vector>

#include "slf/camera.h"
#include "slf/image.h"
#include "slf/scene.h"

namespace slf {

struct Observation {
    Rgb color;        // bilinear image sample at the vertex projection
    double cos_angle; // between the vertex normal and the direction to the camera
    int frame = 0;
};

struct VertexObservations {
    std::vector<std::vector<Observation>> per_vertex;
    // true when a vertex collected fewer than 3 samples
    std::vector<unsigned char> low_confidence;

    std::vector<uint32_t> counts() const {
        std::vector<uint32_t> n(per_vertex.size());
        for (size_t v = 0; v < per_vertex.size(); ++v) n[v] = uint32_t(per_vertex[v].size());
        return n;
    }
};

// Collects a color sample per (vertex, frame) where the vertex projects into
// the image, faces the camera with cos >= 0.2, and no surface lies more than
// 1e-3 * scene diagonal in front of it along the view ray.
VertexObservations gather_observations(const Scene& scene,
                                       const std::vector<ObservedFrame>& frames);

// Soft minimum per channel: start at the 10th percentile, then average with
// one-sided weights 1 / (epsilon + max(0, sample - estimate)) so samples
// above the estimate (specular highlights) are suppressed. Vertices without
// samples get black. The result lies in [min sample, median sample] up to
// epsilon-scale leakage from the suppressed tail.
std::vector<Rgb> robust_min_irls(const VertexObservations& obs, int iterations = 10,
                                 double epsilon = 1e-3);

} // namespace slf
