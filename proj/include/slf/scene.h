#pragma once

#include <utility>

#include "slf/bvh.h"
#include "slf/camera.h"
#include "slf/image.h"
#include "slf/mesh.h"

namespace slf {

// A mesh prepared for rendering: acceleration structure plus the scene scale
// used to derive ray offsets.
struct Scene {
    TriangleMesh mesh;
    Bvh bvh;
    double diagonal = 0;

    // t_min for secondary rays; keeps reflections from re-hitting their own
    // surface without a per-scene bias knob.
    double ray_epsilon() const { return 1e-4 * diagonal; }
};

inline Scene make_scene(TriangleMesh mesh) {
    Scene scene;
    scene.mesh = std::move(mesh);
    scene.bvh.build(scene.mesh);
    scene.diagonal = scene.mesh.bounds().diagonal();
    return scene;
}

// w[i] = exp(z[i]) / sum_j exp(z[j]), computed with max subtraction.
void softmax(const double* z, int m, double* w);

// A captured image with the camera that took it.
struct ObservedFrame {
    const ImageRgb* image = nullptr;
    Camera camera;
};

} // namespace slf
