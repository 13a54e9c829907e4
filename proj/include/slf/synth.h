#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slf/camera.h"
#include "slf/image.h"
#include "slf/mesh.h"
#include "slf/panorama.h"
#include "slf/scene.h"

namespace slf {

// Procedural test geometry. Spheres carry exact sphere normals; the bumpy
// variant displaces an icosphere radially and recomputes averaged normals.
// The bowl is an open inward-facing spherical cap (strong self-reflections).
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0, Vec3 center = {0, 0, 0});
TriangleMesh make_bumpy_sphere(int subdivisions);
TriangleMesh make_concave_bowl(int subdivisions);

enum class MeshSource { Sphere, BumpySphere, TwoObject, ConcaveBowl };

int object_count(MeshSource source);          // 2 for TwoObject, else 1
MeshSource parse_mesh_source(const std::string& name); // "sphere" | "bumpy-sphere" | ...

struct SurfaceMaterial {
    double roughness = 0.1; // GGX, must lie in [0.01, 1]
    Rgb albedo{0.5, 0.5, 0.5};
};

struct RingRig {
    int count = 30;
    double radius = 3.0;
    double elevation = 0.5; // radians above the equatorial plane
};

struct GeometryNoise {
    double sigma = 0;   // vertex displacement std as a fraction of the diagonal
    double scale = 1.0; // global scale factor
};

struct SyntheticSceneSpec {
    MeshSource source = MeshSource::Sphere;
    int subdivisions = 4;
    std::string env = "studio"; // builtin name or a PFM file path
    std::vector<SurfaceMaterial> materials; // one per object
    double k_s = 1.0;
    RingRig rig;
    GeometryNoise noise;
    int width = 320;
    int height = 240;
    double fov_deg = 50.0; // horizontal field of view
    uint64_t seed = 1;
};

struct SyntheticData {
    // Geometry handed to the estimation side: noise applied when requested,
    // albedo baked per vertex, logits set to the true material assignment.
    TriangleMesh mesh;
    // Clean geometry the frames were actually rendered from (equal to `mesh`
    // when noise is off).
    TriangleMesh render_mesh;
    std::vector<int> face_object;
    std::vector<int> vertex_object;
    std::vector<Camera> cameras;
    std::vector<ImageRgb> frames; // linear radiance
    std::vector<ImageMask> masks;
    std::vector<Panorama> gt_srms; // k_s * prefiltered env, one per object
    Panorama env;
    Panorama irradiance; // 64x32 diffuse irradiance over normal directions
};

// Built-in analytic environments at the given panorama size:
//   "studio"  dim gray base with bright stripes and blobs in the equatorial band
//   "uniform" constant 1
//   "blobs"   near-black with a few broad bright blobs
Panorama builtin_env(const std::string& name, int width = 500, int height = 250);

// Cosine-weighted mean of env radiance over the hemisphere around each grid
// direction (includes the 1/pi factor, so a constant env maps to itself).
// Sample it with lookup_bilinear at a surface normal.
Panorama irradiance_grid(const Panorama& env, int width = 64, int height = 32);

// Scales about the vertex centroid, then displaces each vertex along its
// normal by seeded Gaussian noise of std sigma * diagonal, then recomputes
// averaged normals. sigma = 0 and scale = 1 returns the input unchanged.
TriangleMesh perturb_geometry(const TriangleMesh& mesh, double sigma, double scale,
                              uint64_t seed);

// One view of the diffuse + visibility-masked specular model. `prefiltered`
// holds the per-object filtered environments (without k_s).
ImageRgb render_forward(const Scene& scene, const std::vector<int>& face_object,
                        const std::vector<Panorama>& prefiltered, double k_s,
                        const Camera& camera, ImageMask* mask = nullptr);

// Full data generation: builds the mesh, bakes vertex diffuse from the
// irradiance grid, prefilters per-object environments, renders the ring of
// views from the clean geometry, and applies geometry noise to the copy that
// estimation will see. Throws DataError on an invalid spec.
SyntheticData render_synthetic(const SyntheticSceneSpec& spec);

} // namespace slf
