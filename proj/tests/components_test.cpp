#include <doctest.h>

#include <cstring>
#include <vector>

#include "slf/components.h"
#include "slf/rng.h"
#include "slf/synth.h"

using namespace slf;

namespace {

TriangleMesh flat_mesh(Rgb albedo, int m, int materials = 1) {
    TriangleMesh mesh = make_icosphere(m);
    mesh.albedo.assign(mesh.vertex_count(), albedo);
    mesh.num_materials = materials;
    mesh.logits.assign(mesh.vertex_count() * materials, 0.0);
    return mesh;
}

Camera ring_camera(int w, int h, Vec3 pos, Vec3 target = {0, 0, 0}) {
    Intrinsics intr;
    intr.width = w;
    intr.height = h;
    intr.fx = intr.fy = w;
    intr.cx = w / 2.0;
    intr.cy = h / 2.0;
    return Camera::look_at(intr, pos, target);
}

// Camera whose single center ray points exactly along `dir`.
Camera one_pixel_camera(Vec3 pos, Vec3 dir) {
    Intrinsics intr;
    intr.width = intr.height = 1;
    intr.fx = intr.fy = 1;
    intr.cx = intr.cy = 0.5;
    return Camera::look_at(intr, pos, pos + dir);
}

// One triangle spanning the x = 1 plane with chosen shading normals; the ray
// from the origin along +x pierces its interior.
TriangleMesh wall_triangle(Vec3 shading_normal) {
    TriangleMesh mesh;
    mesh.positions = {{1, 0, -2}, {1, 2, 2}, {1, -2, 2}};
    mesh.normals.assign(3, shading_normal);
    mesh.albedo.assign(3, Rgb{0.5, 0.25, 0.125});
    mesh.faces = {{0, 1, 2}};
    mesh.num_materials = 1;
    mesh.logits.assign(3, 0.0);
    return mesh;
}

} // namespace

TEST_CASE("convex sphere sees everything: full visibility, no first bounce") {
    Scene scene = make_scene(flat_mesh({0.4, 0.3, 0.2}, 3));
    std::vector<Panorama> srms{Panorama(20, 10, Rgb{0.2, 0.2, 0.2})};
    Camera cam = ring_camera(64, 48, {3, 0.3, 0.6});
    RenderComponents c = render_components(scene, srms, cam);

    int covered = 0, blocked = 0;
    for (int j = 0; j < c.height; ++j) {
        for (int i = 0; i < c.width; ++i) {
            if (!c.coverage.at(i, j)) {
                CHECK(c.diffuse.at(i, j) == Rgb{0, 0, 0});
                CHECK(c.specular.at(i, j) == Rgb{0, 0, 0});
                CHECK(c.visibility.at(i, j) == 0.0);
                CHECK(c.face.at(i, j) == -1);
                continue;
            }
            ++covered;
            // Away from the silhouette the mirror ray must escape a convex
            // body. On rim pixels the interpolated shading normal can tilt
            // the mirror ray under the faceted surface, so those may block.
            if (c.fresnel.at(i, j) < 0.59) CHECK(c.visibility.at(i, j) == 1.0);
            if (c.visibility.at(i, j) == 1.0) {
                CHECK(c.first_bounce.at(i, j) == Rgb{0, 0, 0});
                // constant panorama: the blended lookup is exactly the constant
                CHECK(c.specular.at(i, j).x == doctest::Approx(0.2).epsilon(1e-12));
            } else {
                ++blocked;
            }
            CHECK(c.diffuse.at(i, j).x == doctest::Approx(0.4).epsilon(1e-12));
            CHECK(c.diffuse.at(i, j).y == doctest::Approx(0.3).epsilon(1e-12));
            CHECK(c.diffuse.at(i, j).z == doctest::Approx(0.2).epsilon(1e-12));
            CHECK(length(c.reflection.at(i, j)) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(c.fresnel.at(i, j) >= 0.0);
            CHECK(c.fresnel.at(i, j) <= 1.0);
            CHECK(c.depth.at(i, j) > 1.0);
        }
    }
    CHECK(covered > 300);
    CHECK(blocked <= covered / 50);
}

TEST_CASE("shading-normal wall pins Fresnel and mirror directions") {
    std::vector<Panorama> srms{Panorama(20, 10, Rgb{0.5, 0.5, 0.5})};

    SUBCASE("head-on: zero Fresnel, reflection straight back") {
        Scene scene = make_scene(wall_triangle({-1, 0, 0}));
        RenderComponents c = render_components(scene, srms, one_pixel_camera({0, 0, 0}, {1, 0, 0}));
        REQUIRE(c.coverage.at(0, 0) == 1);
        CHECK(c.fresnel.at(0, 0) == 0.0);
        CHECK(c.reflection.at(0, 0).x == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(c.visibility.at(0, 0) == 1.0);

        ImageRgb plain = composite(c, CompositeMode::Plain);
        ImageRgb fres = composite(c, CompositeMode::Fresnel, 0.04);
        // FCI = 0, so the fresnel path keeps exactly r0 of the specular term
        CHECK(fres.at(0, 0).x ==
              doctest::Approx(c.diffuse.at(0, 0).x + 0.04 * c.specular.at(0, 0).x).epsilon(1e-14));
        CHECK(plain.at(0, 0).x ==
              doctest::Approx(c.diffuse.at(0, 0).x + c.specular.at(0, 0).x).epsilon(1e-14));
    }

    SUBCASE("60 degree view angle: (1 - 1/2)^5") {
        Scene scene = make_scene(wall_triangle({-0.5, 0, std::sqrt(3.0) / 2.0}));
        RenderComponents c = render_components(scene, srms, one_pixel_camera({0, 0, 0}, {1, 0, 0}));
        REQUIRE(c.coverage.at(0, 0) == 1);
        CHECK(c.fresnel.at(0, 0) == doctest::Approx(0.03125).epsilon(1e-14));
    }

    SUBCASE("grazing shading normal: Fresnel saturates at 1") {
        Scene scene = make_scene(wall_triangle({0, 0, 1}));
        RenderComponents c = render_components(scene, srms, one_pixel_camera({0, 0, 0}, {1, 0, 0}));
        REQUIRE(c.coverage.at(0, 0) == 1);
        CHECK(c.fresnel.at(0, 0) == 1.0);
        // d perpendicular to n: the mirror direction is d itself
        CHECK(c.reflection.at(0, 0).x == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("mode fresnel with r0 = 1 equals plain") {
        Scene scene = make_scene(wall_triangle({-0.5, 0, std::sqrt(3.0) / 2.0}));
        RenderComponents c = render_components(scene, srms, one_pixel_camera({0, 0, 0}, {1, 0, 0}));
        ImageRgb a = composite(c, CompositeMode::Plain);
        ImageRgb b = composite(c, CompositeMode::Fresnel, 1.0);
        CHECK(a.at(0, 0) == b.at(0, 0));
    }

    SUBCASE("r0 outside [0,1] is rejected") {
        Scene scene = make_scene(wall_triangle({-1, 0, 0}));
        RenderComponents c = render_components(scene, srms, one_pixel_camera({0, 0, 0}, {1, 0, 0}));
        CHECK_THROWS_AS(composite(c, CompositeMode::Fresnel, -0.1), std::invalid_argument);
        CHECK_THROWS_AS(composite(c, CompositeMode::Fresnel, 1.5), std::invalid_argument);
    }
}

TEST_CASE("bowl interior blocks reflections exactly where the first bounce shows") {
    TriangleMesh mesh = make_concave_bowl(3);
    mesh.albedo.assign(mesh.vertex_count(), Rgb{0.5, 0.4, 0.3});
    mesh.num_materials = 1;
    mesh.logits.assign(mesh.vertex_count(), 0.0);
    Scene scene = make_scene(mesh);
    std::vector<Panorama> srms{Panorama(20, 10, Rgb{0.3, 0.3, 0.3})};
    Camera cam = ring_camera(80, 60, {0.5, 0.2, 2.2}, {0, 0, -0.4});
    RenderComponents c = render_components(scene, srms, cam);

    int covered = 0, blocked = 0;
    for (int j = 0; j < c.height; ++j) {
        for (int i = 0; i < c.width; ++i) {
            if (!c.coverage.at(i, j)) continue;
            ++covered;
            double v = c.visibility.at(i, j);
            CHECK((v == 0.0 || v == 1.0));
            Rgb fbi = c.first_bounce.at(i, j);
            CHECK(v * fbi.x == 0.0);
            CHECK(v * fbi.y == 0.0);
            CHECK(v * fbi.z == 0.0);
            if (v == 0.0) {
                ++blocked;
                CHECK(c.specular.at(i, j) == Rgb{0, 0, 0});
                CHECK(fbi.x > 0.0); // constant positive albedo at the second hit
            } else {
                CHECK(c.specular.at(i, j).x == doctest::Approx(0.3).epsilon(1e-12));
            }
        }
    }
    CHECK(covered > 1000);
    CHECK(blocked > 100); // the concave interior reflects into itself
}

TEST_CASE("blend weights form an exact partition of unity") {
    TriangleMesh mesh = make_icosphere(2);
    mesh.albedo.assign(mesh.vertex_count(), Rgb{0.6, 0.6, 0.6});
    mesh.num_materials = 3;
    mesh.logits.resize(mesh.vertex_count() * 3);
    Rng rng(7);
    for (double& z : mesh.logits) z = rng.uniform(-2.0, 2.0);
    Scene scene = make_scene(mesh);

    std::vector<Panorama> srms{Panorama(16, 8, Rgb{0.1, 0.1, 0.1}),
                               Panorama(16, 8, Rgb{0.4, 0.4, 0.4}),
                               Panorama(16, 8, Rgb{0.9, 0.9, 0.9})};
    Camera cam = ring_camera(48, 36, {0, 3, 0.5});
    RenderComponents c = render_components(scene, srms, cam);

    for (int j = 0; j < c.height; ++j) {
        for (int i = 0; i < c.width; ++i) {
            if (!c.coverage.at(i, j)) continue;
            double sum = 0, blend = 0;
            for (int k = 0; k < 3; ++k) {
                double w = c.weights[k].at(i, j);
                CHECK(w >= 0.0);
                sum += w;
                blend += w * srms[k].data[0].x;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(c.specular.at(i, j).x ==
                  doctest::Approx(c.visibility.at(i, j) * blend).epsilon(1e-12));
        }
    }

    SUBCASE("basis count must match the mesh logits") {
        std::vector<Panorama> two(srms.begin(), srms.begin() + 2);
        CHECK_THROWS_AS(render_components(scene, two, cam), std::invalid_argument);
    }
}

TEST_CASE("single bright texel lights exactly the pixels whose mirror ray covers it") {
    Scene scene = make_scene(flat_mesh({0.1, 0.1, 0.1}, 3));
    Panorama srm(40, 20, Rgb{0, 0, 0});
    const int tx = 13, ty = 6;
    srm.at(tx, ty) = {5, 5, 5};
    std::vector<Panorama> srms{srm};
    Camera cam = ring_camera(96, 72, {2.6, 0.4, 0.9});
    RenderComponents c = render_components(scene, srms, cam);

    int lit = 0;
    for (int j = 0; j < c.height; ++j) {
        for (int i = 0; i < c.width; ++i) {
            if (!c.coverage.at(i, j)) continue;
            BilinearFootprint fp = lookup_footprint(srm.width, srm.height, c.reflection.at(i, j));
            double w = 0;
            for (const TexelWeight& tw : fp)
                if (tw.index == ty * srm.width + tx) w += tw.weight;
            bool bright = c.specular.at(i, j).x > 0.0;
            CHECK(bright == (w > 0.0));
            if (bright) {
                ++lit;
                CHECK(c.specular.at(i, j).x == doctest::Approx(5.0 * w).epsilon(1e-12));
            }
        }
    }
    CHECK(lit > 0);
}

TEST_CASE("component rendering is bit-identical across reruns") {
    TriangleMesh mesh = make_bumpy_sphere(2);
    mesh.albedo.assign(mesh.vertex_count(), Rgb{0.5, 0.35, 0.3});
    mesh.num_materials = 2;
    mesh.logits.resize(mesh.vertex_count() * 2);
    Rng rng(3);
    for (double& z : mesh.logits) z = rng.uniform(-1.0, 1.0);
    Scene scene = make_scene(mesh);
    std::vector<Panorama> srms{builtin_env("studio", 40, 20), builtin_env("blobs", 40, 20)};
    Camera cam = ring_camera(64, 48, {2.8, -0.7, 0.8});

    RenderComponents a = render_components(scene, srms, cam);
    RenderComponents b = render_components(scene, srms, cam);
    CHECK(a.diffuse.data == b.diffuse.data);
    CHECK(a.specular.data == b.specular.data);
    CHECK(a.reflection.data == b.reflection.data);
    CHECK(a.visibility.data == b.visibility.data);
    CHECK(a.first_bounce.data == b.first_bounce.data);
    CHECK(a.fresnel.data == b.fresnel.data);
    CHECK(a.depth.data == b.depth.data);
    for (int k = 0; k < 2; ++k) CHECK(a.weights[k].data == b.weights[k].data);
}

TEST_CASE("cross projection agrees with itself and across views") {
    TriangleMesh mesh = make_icosphere(3);
    mesh.albedo.resize(mesh.vertex_count());
    mesh.num_materials = 2;
    mesh.logits.resize(mesh.vertex_count() * 2);
    Rng rng(11);
    for (size_t v = 0; v < mesh.vertex_count(); ++v) {
        mesh.albedo[v] = {rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
        mesh.logits[v * 2] = rng.uniform(-1.5, 1.5);
        mesh.logits[v * 2 + 1] = rng.uniform(-1.5, 1.5);
    }
    Scene scene = make_scene(mesh);
    std::vector<Panorama> srms{Panorama(16, 8, Rgb{0.2, 0.2, 0.2}),
                               Panorama(16, 8, Rgb{0.6, 0.6, 0.6})};
    Camera cam_a = ring_camera(72, 54, {3, 0, 0.4});
    Camera cam_b = ring_camera(72, 54, {2.4, 1.8, 0.4});
    RenderComponents a = render_components(scene, srms, cam_a);
    RenderComponents b = render_components(scene, srms, cam_b);

    SUBCASE("identity warp") {
        ConsistencyReport r = cross_project(a, cam_a, a, cam_a, scene);
        CHECK(r.compared_pixels > 1000);
        CHECK(r.mean_weight_delta <= 1e-12);
        CHECK(r.mean_diffuse_delta <= 1e-12);
    }

    SUBCASE("surface attributes agree between overlapping views") {
        ConsistencyReport r = cross_project(a, cam_a, b, cam_b, scene);
        CHECK(r.compared_pixels > 500);
        CHECK(r.mean_weight_delta <= 1e-6);
        CHECK(r.mean_diffuse_delta <= 1e-6);
    }

    SUBCASE("no overlap yields an empty report") {
        Camera away = ring_camera(32, 24, {5, 0, 0}, {9, 0, 0});
        RenderComponents nothing = render_components(scene, srms, away);
        ConsistencyReport r = cross_project(a, cam_a, nothing, away, scene);
        CHECK(r.compared_pixels == 0);
        CHECK(r.mean_weight_delta == 0.0);
    }
}
