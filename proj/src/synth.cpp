#include "slf/synth.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "slf/bvh.h"
#include "slf/errors.h"
#include "slf/io.h"
#include "slf/parallel.h"
#include "slf/rng.h"

namespace slf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MeshBuilder {
    std::vector<Vec3> positions;
    std::vector<std::array<int, 3>> faces;
};

// Icosahedron with unit-ish vertices; subdivision midpoints are cached per
// edge so shared vertices stay shared.
MeshBuilder icosahedron() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    MeshBuilder b;
    b.positions = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                   {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                   {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    b.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return b;
}

void subdivide(MeshBuilder& b) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
        auto key = std::minmax(i, j);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        int idx = int(b.positions.size());
        b.positions.push_back((b.positions[i] + b.positions[j]) * 0.5);
        midpoint.emplace(key, idx);
        return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(b.faces.size() * 4);
    for (const auto& f : b.faces) {
        int a = mid(f[0], f[1]), c = mid(f[1], f[2]), e = mid(f[2], f[0]);
        next.push_back({f[0], a, e});
        next.push_back({f[1], c, a});
        next.push_back({f[2], e, c});
        next.push_back({a, c, e});
    }
    b.faces = std::move(next);
}

Vec3 azel_dir(double azimuth, double elevation) {
    return {std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
            std::sin(elevation)};
}

double angular_gauss(Vec3 a, Vec3 b, double sigma) {
    double ang = safe_acos(dot(a, b));
    return std::exp(-0.5 * (ang / sigma) * (ang / sigma));
}

Rgb studio_radiance(Vec3 d) {
    const double theta = safe_acos(d.z);
    const double phi = std::atan2(d.y, d.x);
    Rgb v{0.05, 0.05, 0.05};
    // bright vertical stripes around the equatorial band, period 90 degrees
    if (theta > 1.0 && theta < 2.1) {
        double seg = std::fmod(phi + 2.0 * M_PI, M_PI / 2.0);
        if (seg < 0.35) v = {0.30, 0.27, 0.22};
    }
    // thin cool ring above the equator
    if (theta > 1.25 && theta < 1.34) v = max(v, Rgb{0.10, 0.14, 0.28});
    // two soft colored blobs
    v = v + Rgb{0.25, 0.10, 0.05} * angular_gauss(d, azel_dir(0.8, 0.55), 0.25) +
        Rgb{0.05, 0.22, 0.12} * angular_gauss(d, azel_dir(-1.9, 0.85), 0.30);
    // dim floor
    if (theta > 2.6) v = max(v, Rgb{0.09, 0.07, 0.05});
    return clamp(v, 0.0, 0.34);
}

// Compact bright sources over a near-black ambient. The highlights they
// throw are sparse in view space, so most surface points get several nearly
// specular-free looks; wide sources (or a bright ambient) would put specular
// light into every view, and no view-based separation can remove a
// view-independent pedestal.
Rgb blobs_radiance(Vec3 d) {
    Rgb v{0.002, 0.002, 0.002};
    v = v + Rgb{0.85, 0.78, 0.65} * angular_gauss(d, azel_dir(0.0, 0.6), 0.10) +
        Rgb{0.30, 0.50, 0.85} * angular_gauss(d, azel_dir(2.1, 0.5), 0.09) +
        Rgb{0.80, 0.40, 0.30} * angular_gauss(d, azel_dir(4.0, 0.8), 0.11);
    return clamp(v, 0.0, 1.0);
}

struct BuiltGeometry {
    TriangleMesh mesh;
    std::vector<int> vertex_object;
    std::vector<int> face_object;
};

void append_object(BuiltGeometry& g, const TriangleMesh& part, int object) {
    int base = int(g.mesh.positions.size());
    g.mesh.positions.insert(g.mesh.positions.end(), part.positions.begin(),
                            part.positions.end());
    g.mesh.normals.insert(g.mesh.normals.end(), part.normals.begin(), part.normals.end());
    for (const auto& f : part.faces) {
        g.mesh.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
        g.face_object.push_back(object);
    }
    g.vertex_object.insert(g.vertex_object.end(), part.positions.size(), object);
}

BuiltGeometry build_geometry(MeshSource source, int subdivisions) {
    if (subdivisions < 0) throw DataError("mesh subdivisions must be >= 0");
    BuiltGeometry g;
    switch (source) {
    case MeshSource::Sphere:
        append_object(g, make_icosphere(subdivisions), 0);
        break;
    case MeshSource::BumpySphere:
        append_object(g, make_bumpy_sphere(subdivisions), 0);
        break;
    case MeshSource::TwoObject:
        append_object(g, make_icosphere(subdivisions, 1.0, {-1.25, 0, 0}), 0);
        append_object(g, make_icosphere(subdivisions, 0.8, {1.25, 0, 0}), 1);
        break;
    case MeshSource::ConcaveBowl:
        append_object(g, make_concave_bowl(std::max(1, subdivisions)), 0);
        break;
    }
    return g;
}

} // namespace

TriangleMesh make_icosphere(int subdivisions, double radius, Vec3 center) {
    MeshBuilder b = icosahedron();
    for (int s = 0; s < subdivisions; ++s) subdivide(b);
    TriangleMesh mesh;
    mesh.positions.reserve(b.positions.size());
    mesh.normals.reserve(b.positions.size());
    for (Vec3 p : b.positions) {
        Vec3 n = normalize(p);
        mesh.positions.push_back(center + n * radius);
        mesh.normals.push_back(n);
    }
    mesh.faces = std::move(b.faces);
    return mesh;
}

TriangleMesh make_bumpy_sphere(int subdivisions) {
    TriangleMesh mesh = make_icosphere(subdivisions);
    for (Vec3& p : mesh.positions) {
        double bump = 0.15 * std::sin(4.0 * p.x) * std::sin(4.0 * p.y) * std::cos(3.0 * p.z) +
                      0.08 * std::cos(5.0 * p.z);
        p = p * (1.0 + bump);
    }
    mesh.compute_vertex_normals();
    return mesh;
}

TriangleMesh make_concave_bowl(int subdivisions) {
    const int rows = 6 * subdivisions;     // polar steps from rim to bottom
    const int segs = 12 * subdivisions;    // azimuth steps
    TriangleMesh mesh;
    for (int i = 0; i < rows; ++i) {
        double theta = M_PI / 2 + M_PI / 2 * double(i) / rows;
        for (int j = 0; j < segs; ++j) {
            double phi = 2.0 * M_PI * double(j) / segs;
            Vec3 p{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta)};
            mesh.positions.push_back(p);
            mesh.normals.push_back(-1.0 * p); // inward: the camera sees the inside
        }
    }
    const int pole = int(mesh.positions.size());
    mesh.positions.push_back({0, 0, -1});
    mesh.normals.push_back({0, 0, 1});
    auto ring_vertex = [&](int i, int j) { return i * segs + (j % segs); };
    for (int i = 0; i + 1 < rows; ++i) {
        for (int j = 0; j < segs; ++j) {
            int v00 = ring_vertex(i, j), v01 = ring_vertex(i, j + 1);
            int v10 = ring_vertex(i + 1, j), v11 = ring_vertex(i + 1, j + 1);
            mesh.faces.push_back({v00, v01, v11});
            mesh.faces.push_back({v00, v11, v10});
        }
    }
    for (int j = 0; j < segs; ++j)
        mesh.faces.push_back({ring_vertex(rows - 1, j), ring_vertex(rows - 1, j + 1), pole});
    return mesh;
}

int object_count(MeshSource source) { return source == MeshSource::TwoObject ? 2 : 1; }

MeshSource parse_mesh_source(const std::string& name) {
    if (name == "sphere") return MeshSource::Sphere;
    if (name == "bumpy-sphere") return MeshSource::BumpySphere;
    if (name == "two-object") return MeshSource::TwoObject;
    if (name == "concave-bowl") return MeshSource::ConcaveBowl;
    throw DataError("unknown mesh source '" + name + "'");
}

Panorama builtin_env(const std::string& name, int width, int height) {
    Rgb (*f)(Vec3) = nullptr;
    if (name == "studio") f = studio_radiance;
    else if (name == "blobs") f = blobs_radiance;
    else if (name == "uniform") f = [](Vec3) { return Rgb{1, 1, 1}; };
    else throw DataError("unknown builtin environment '" + name + "'");
    Panorama env(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            env.at(x, y) = f(texel_center_dir(x, y, width, height));
    return env;
}

Panorama irradiance_grid(const Panorama& env, int width, int height) {
    check_panorama(env);
    std::vector<Vec3> dirs(env.pixel_count());
    std::vector<double> domega(env.pixel_count());
    for (int y = 0; y < env.height; ++y) {
        double sa = texel_solid_angle(y, env.width, env.height);
        for (int x = 0; x < env.width; ++x) {
            dirs[size_t(y) * env.width + x] = texel_center_dir(x, y, env.width, env.height);
            domega[size_t(y) * env.width + x] = sa;
        }
    }
    Panorama grid(width, height);
    parallel_for(int64_t(width) * height, [&](int64_t cell) {
        int x = int(cell % width), y = int(cell / width);
        Vec3 n = texel_center_dir(x, y, width, height);
        Rgb sum{0, 0, 0};
        for (size_t t = 0; t < dirs.size(); ++t) {
            double c = dot(dirs[t], n);
            if (c > 0) sum = sum + env.data[t] * (c * domega[t]);
        }
        grid.at(x, y) = sum * (1.0 / M_PI);
    });
    return grid;
}

TriangleMesh perturb_geometry(const TriangleMesh& mesh, double sigma, double scale,
                              uint64_t seed) {
    if (sigma < 0) throw DataError("geometry noise sigma must be >= 0");
    if (scale <= 0) throw DataError("geometry scale must be > 0");
    if (sigma == 0 && scale == 1.0) return mesh;

    TriangleMesh out = mesh;
    Vec3 centroid{0, 0, 0};
    for (Vec3 p : out.positions) centroid += p;
    centroid *= 1.0 / double(out.positions.size());
    for (Vec3& p : out.positions) p = centroid + (p - centroid) * scale;

    if (sigma > 0) {
        const double amp = sigma * out.bounds().diagonal();
        Rng rng(seed);
        for (size_t v = 0; v < out.positions.size(); ++v)
            out.positions[v] += out.normals[v] * (amp * rng.normal());
    }
    out.compute_vertex_normals();
    return out;
}

ImageRgb render_forward(const Scene& scene, const std::vector<int>& face_object,
                        const std::vector<Panorama>& prefiltered, double k_s,
                        const Camera& camera, ImageMask* mask) {
    const int w = camera.intr.width, h = camera.intr.height;
    ImageRgb out(w, h);
    if (mask) *mask = ImageMask(w, h);
    const double eps = scene.ray_epsilon();
    parallel_for(h, [&](int64_t j) {
        for (int i = 0; i < w; ++i) {
            const Ray ray = camera.pixel_center_ray(i, int(j));
            const auto hit = scene.bvh.intersect(scene.mesh, ray, 0.0, kInf);
            if (!hit) continue;
            if (mask) mask->at(i, j) = 1;
            Rgb color = hit->albedo; // vertex diffuse is pre-baked
            const Vec3 refl = reflect(ray.dir, hit->normal);
            if (k_s > 0 && !scene.bvh.occluded(scene.mesh, {hit->position, refl}, eps, kInf))
                color = color +
                        k_s * lookup_bilinear(prefiltered[face_object[hit->face]], refl);
            out.at(i, j) = color;
        }
    });
    return out;
}

SyntheticData render_synthetic(const SyntheticSceneSpec& spec) {
    const int objects = object_count(spec.source);
    if (int(spec.materials.size()) != objects)
        throw DataError("scene needs " + std::to_string(objects) + " materials, got " +
                        std::to_string(spec.materials.size()));
    for (const auto& mat : spec.materials) {
        if (!(mat.roughness >= 0.01 && mat.roughness <= 1.0))
            throw DataError("roughness must lie in [0.01, 1]");
        Rgb a = mat.albedo;
        if (!(a.x >= 0 && a.x <= 1 && a.y >= 0 && a.y <= 1 && a.z >= 0 && a.z <= 1))
            throw DataError("albedo channels must lie in [0, 1]");
    }
    if (!(spec.k_s >= 0 && spec.k_s <= 1)) throw DataError("k_s must lie in [0, 1]");
    if (spec.rig.count < 2) throw DataError("camera ring needs at least 2 views");
    if (spec.rig.radius <= 0) throw DataError("camera ring radius must be > 0");
    if (spec.width <= 0 || spec.height <= 0) throw DataError("image size must be positive");
    if (!(spec.fov_deg > 0 && spec.fov_deg < 180)) throw DataError("fov must be in (0, 180)");

    SyntheticData data;
    BuiltGeometry g = build_geometry(spec.source, spec.subdivisions);
    data.face_object = std::move(g.face_object);
    data.vertex_object = std::move(g.vertex_object);

    data.env = spec.env == "studio" || spec.env == "uniform" || spec.env == "blobs"
                   ? builtin_env(spec.env)
                   : read_pfm(spec.env);
    check_panorama(data.env);
    data.irradiance = irradiance_grid(data.env);

    // Bake per-vertex diffuse and the true material assignment.
    TriangleMesh& mesh = g.mesh;
    const size_t nv = mesh.vertex_count();
    mesh.albedo.resize(nv);
    mesh.num_materials = objects;
    mesh.logits.assign(nv * objects, objects == 1 ? 0.0 : -20.0);
    for (size_t v = 0; v < nv; ++v) {
        int obj = data.vertex_object[v];
        mesh.albedo[v] = spec.materials[obj].albedo * lookup_bilinear(data.irradiance,
                                                                      mesh.normals[v]);
        if (objects > 1) mesh.logits[v * objects + obj] = 20.0;
    }
    mesh.validate();

    std::vector<Panorama> prefiltered;
    prefiltered.reserve(objects);
    for (int o = 0; o < objects; ++o)
        prefiltered.push_back(prefilter_ggx(data.env, spec.materials[o].roughness));
    for (int o = 0; o < objects; ++o) {
        Panorama srm = prefiltered[o];
        for (Rgb& t : srm.data) t *= spec.k_s;
        data.gt_srms.push_back(std::move(srm));
    }

    data.render_mesh = mesh;
    data.mesh = spec.noise.sigma > 0 || spec.noise.scale != 1.0
                    ? perturb_geometry(mesh, spec.noise.sigma, spec.noise.scale, spec.seed)
                    : mesh;

    Scene scene = make_scene(data.render_mesh);
    const Vec3 target = scene.mesh.bounds().center();
    Intrinsics intr;
    intr.width = spec.width;
    intr.height = spec.height;
    intr.fx = intr.fy = (spec.width / 2.0) / std::tan(spec.fov_deg * M_PI / 360.0);
    intr.cx = spec.width / 2.0;
    intr.cy = spec.height / 2.0;

    for (int k = 0; k < spec.rig.count; ++k) {
        double az = 2.0 * M_PI * double(k) / spec.rig.count;
        Vec3 pos = target + spec.rig.radius * azel_dir(az, spec.rig.elevation);
        data.cameras.push_back(Camera::look_at(intr, pos, target));
    }
    data.frames.resize(data.cameras.size());
    data.masks.resize(data.cameras.size());
    for (size_t k = 0; k < data.cameras.size(); ++k)
        data.frames[k] = render_forward(scene, data.face_object, prefiltered, spec.k_s,
                                        data.cameras[k], &data.masks[k]);
    return data;
}

} // namespace slf
