#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "slf/errors.h"
#include "slf/io.h"
#include "slf/rng.h"

using namespace slf;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("slf_test_" + std::to_string(uint64_t(std::rand()) * 100003 + uint64_t(getpid())));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

ImageRgb random_image(int w, int h, uint64_t seed) {
    Rng rng(seed);
    ImageRgb img(w, h);
    for (auto& p : img.data) p = {rng.uniform(), rng.uniform(), rng.uniform()};
    return img;
}

TriangleMesh test_mesh() {
    TriangleMesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0.25, 1, 0.5}, {0, 0.25, 1}};
    m.faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
    m.compute_vertex_normals();
    m.albedo = {{0.1, 0.2, 0.3}, {0.9, 0.8, 0.7}, {0.5, 0.5, 0.5}, {0, 1, 0.25}};
    return m;
}

} // namespace

TEST_CASE("PFM round trip is bit-exact for float32 data") {
    TempDir dir;
    ImageRgb img = random_image(33, 17, 1);
    write_pfm(dir.file("a.pfm"), img);
    ImageRgb back = read_pfm(dir.file("a.pfm"));
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (size_t i = 0; i < img.data.size(); ++i)
        for (int c = 0; c < 3; ++c) CHECK(float(back.data[i][c]) == float(img.data[i][c]));

    ImageF gray(9, 4);
    Rng rng(2);
    for (auto& v : gray.data) v = rng.uniform(-5, 5);
    write_pfm_gray(dir.file("g.pfm"), gray);
    ImageF gback = read_pfm_gray(dir.file("g.pfm"));
    for (size_t i = 0; i < gray.data.size(); ++i)
        CHECK(float(gback.data[i]) == float(gray.data[i]));
}

TEST_CASE("PFM rejects junk") {
    TempDir dir;
    std::ofstream(dir.file("bad.pfm")) << "P6 no";
    CHECK_THROWS_AS(read_pfm(dir.file("bad.pfm")), DataError);
    CHECK_THROWS_AS(read_pfm(dir.file("missing.pfm")), DataError);
    // truncated payload
    std::ofstream(dir.file("short.pfm"), std::ios::binary) << "PF\n8 8\n-1.0\nxx";
    CHECK_THROWS_AS(read_pfm(dir.file("short.pfm")), DataError);
}

TEST_CASE("PNG round trip is exact up to 8-bit quantization") {
    TempDir dir;
    ImageRgb img = random_image(21, 13, 3);
    write_png(dir.file("a.png"), img);
    ImageRgb back = read_png(dir.file("a.png"));
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (size_t i = 0; i < img.data.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            // compare in encoded space where quantization is uniform
            double a = std::pow(img.data[i][c], 1 / 2.2);
            double b = std::pow(back.data[i][c], 1 / 2.2);
            CHECK(std::abs(a - b) <= 0.5 / 255 + 1e-9);
        }
    }
}

TEST_CASE("PNG values below 0 and above 1 clamp") {
    TempDir dir;
    ImageRgb img(2, 1);
    img.at(0, 0) = {-0.5, 2.0, 1.0};
    write_png(dir.file("c.png"), img);
    ImageRgb back = read_png(dir.file("c.png"));
    CHECK(back.at(0, 0).x == 0.0);
    CHECK(back.at(0, 0).y == 1.0);
}

TEST_CASE("PLY round trip preserves geometry and float colors exactly") {
    TempDir dir;
    TriangleMesh m = test_mesh();
    write_ply(dir.file("m.ply"), m, true);
    TriangleMesh back = read_ply(dir.file("m.ply"));
    REQUIRE(back.vertex_count() == m.vertex_count());
    REQUIRE(back.face_count() == m.face_count());
    for (size_t i = 0; i < m.vertex_count(); ++i) {
        for (int k = 0; k < 3; ++k) {
            CHECK(back.positions[i][k] == double(float(m.positions[i][k])));
            CHECK(back.albedo[i][k] == double(float(m.albedo[i][k])));
        }
    }
    CHECK(back.faces == m.faces);
}

TEST_CASE("PLY 16-bit colors round trip within quantization") {
    TempDir dir;
    TriangleMesh m = test_mesh();
    write_ply(dir.file("m16.ply"), m, false);
    TriangleMesh back = read_ply(dir.file("m16.ply"));
    for (size_t i = 0; i < m.vertex_count(); ++i)
        for (int k = 0; k < 3; ++k)
            CHECK(std::abs(back.albedo[i][k] - m.albedo[i][k]) <= 0.5 / 65535 + 1e-12);
}

TEST_CASE("PLY rejects non-triangle faces and foreign formats") {
    TempDir dir;
    {
        std::ofstream out(dir.file("quad.ply"), std::ios::binary);
        out << "ply\nformat binary_little_endian 1.0\nelement vertex 4\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face 1\nproperty list uchar int vertex_indices\nend_header\n";
        float v[12] = {0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0};
        out.write(reinterpret_cast<char*>(v), sizeof v);
        uint8_t n = 4;
        int32_t idx[4] = {0, 1, 2, 3};
        out.write(reinterpret_cast<char*>(&n), 1);
        out.write(reinterpret_cast<char*>(idx), 16);
    }
    CHECK_THROWS_WITH_AS(read_ply(dir.file("quad.ply")),
                         doctest::Contains("only triangles"), DataError);

    std::ofstream(dir.file("ascii.ply")) << "ply\nformat ascii 1.0\nend_header\n";
    CHECK_THROWS_AS(read_ply(dir.file("ascii.ply")), DataError);
}

TEST_CASE("OBJ round trip preserves connectivity and positions") {
    TempDir dir;
    TriangleMesh m = test_mesh();
    write_obj(dir.file("m.obj"), m);
    TriangleMesh back = read_obj(dir.file("m.obj"));
    REQUIRE(back.vertex_count() == m.vertex_count());
    CHECK(back.faces == m.faces);
    for (size_t i = 0; i < m.vertex_count(); ++i) {
        CHECK(length(back.positions[i] - m.positions[i]) < 1e-7);
        CHECK(length(back.normals[i] - m.normals[i]) < 1e-6);
    }
}

TEST_CASE("TOML subset parses sections, scalars, and arrays") {
    Toml t = Toml::parse(
        "# comment\n"
        "top = 1.5\n"
        "[camera]\n"
        "fx = 500.0  # focal\n"
        "name = \"main # rig\"\n"
        "enabled = true\n"
        "ks = [0.5, 1, 2e-1]\n"
        "[empty]\n");
    CHECK(t.get_number("", "top") == 1.5);
    CHECK(t.get_number("camera", "fx") == 500.0);
    CHECK(t.get_string("camera", "name") == "main # rig");
    CHECK(t.get_bool("camera", "enabled"));
    auto ks = t.get_array("camera", "ks");
    REQUIRE(ks.size() == 3);
    CHECK(ks[1] == 1.0);
    CHECK(ks[2] == 0.2);
    CHECK(t.get_number("camera", "missing", 7.0) == 7.0);
    CHECK(!t.has("camera", "missing"));
}

TEST_CASE("TOML errors carry location and kind information") {
    CHECK_THROWS_WITH_AS(Toml::parse("a ="), doctest::Contains(":1"), DataError);
    CHECK_THROWS_AS(Toml::parse("a = [1, 2"), DataError);
    CHECK_THROWS_AS(Toml::parse("[sec\na = 1"), DataError);
    Toml t = Toml::parse("a = 1");
    CHECK_THROWS_WITH_AS(t.get_string("", "a"), doctest::Contains("string"), DataError);
    CHECK_THROWS_WITH_AS(t.get_number("", "b"), doctest::Contains("missing"), DataError);
}

TEST_CASE("intrinsics file round trip and validation") {
    TempDir dir;
    Intrinsics intr{640, 480, 525.1, 524.7, 319.5, 239.5};
    write_intrinsics(dir.file("cam.toml"), intr);
    Intrinsics back = read_intrinsics(dir.file("cam.toml"));
    CHECK(back.fx == intr.fx);
    CHECK(back.fy == intr.fy);
    CHECK(back.cx == intr.cx);
    CHECK(back.cy == intr.cy);
    CHECK(back.width == intr.width);
    CHECK(back.height == intr.height);

    std::ofstream(dir.file("bad.toml")) << "[camera]\nfx = -1\nfy = 1\ncx = 0\ncy = 0\n"
                                           "width = 10\nheight = 10\n";
    CHECK_THROWS_AS(read_intrinsics(dir.file("bad.toml")), DataError);
}

TEST_CASE("trajectory round trip preserves poses") {
    TempDir dir;
    Rng rng(5);
    std::vector<TrajectoryEntry> entries;
    for (int i = 0; i < 20; ++i) {
        // random rotation via random unit quaternion
        double qx = rng.normal(), qy = rng.normal(), qz = rng.normal(), qw = rng.normal();
        TrajectoryEntry e;
        e.timestamp = i * 0.1;
        e.translation = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        e.rotation = quaternion_to_matrix(qx, qy, qz, qw);
        entries.push_back(e);
    }
    write_trajectory(dir.file("traj.txt"), entries);
    auto back = read_trajectory(dir.file("traj.txt"));
    REQUIRE(back.size() == entries.size());
    for (size_t i = 0; i < entries.size(); ++i) {
        CHECK(length(back[i].translation - entries[i].translation) < 1e-12);
        CHECK(length(back[i].rotation.r0 - entries[i].rotation.r0) < 1e-9);
        CHECK(length(back[i].rotation.r1 - entries[i].rotation.r1) < 1e-9);
        CHECK(length(back[i].rotation.r2 - entries[i].rotation.r2) < 1e-9);
        CHECK(std::abs(determinant(back[i].rotation) - 1) < 1e-9);
    }
}

TEST_CASE("trajectory parse errors name the line") {
    TempDir dir;
    std::ofstream(dir.file("traj.txt"))
        << "0.0 1 2 3 0 0 0 1\n"
        << "0.1 1 2 3 0 0 1\n"; // 7 fields
    CHECK_THROWS_WITH_AS(read_trajectory(dir.file("traj.txt")), doctest::Contains(":2"),
                         DataError);
}

TEST_CASE("quaternion conversion round trips through matrices") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        double qx = rng.normal(), qy = rng.normal(), qz = rng.normal(), qw = rng.normal();
        Mat3 m = quaternion_to_matrix(qx, qy, qz, qw);
        CHECK(std::abs(determinant(m) - 1.0) < 1e-12);
        double rx, ry, rz, rw;
        matrix_to_quaternion(m, rx, ry, rz, rw);
        Mat3 m2 = quaternion_to_matrix(rx, ry, rz, rw);
        CHECK(length(m.r0 - m2.r0) < 1e-9);
        CHECK(length(m.r1 - m2.r1) < 1e-9);
        CHECK(length(m.r2 - m2.r2) < 1e-9);
    }
}

TEST_CASE("raw float and u32 arrays round trip") {
    TempDir dir;
    std::vector<float> f = {0.f, -1.5f, 3.25e-7f, 1e9f};
    write_floats(dir.file("f.bin"), f);
    CHECK(read_floats(dir.file("f.bin")) == f);

    std::vector<uint32_t> u = {0, 1, 0xffffffffu, 42};
    write_u32(dir.file("u.bin"), u);
    CHECK(read_u32(dir.file("u.bin")) == u);
}
