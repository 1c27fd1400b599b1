#include "doctest.h"

#include "support.hpp"

#include "esa/errors.hpp"
#include "esa/surface_io.hpp"

#include <fstream>
#include <sstream>

using namespace esa;

namespace {

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

} // namespace

TEST_CASE("json and binary round trips are bit exact") {
    const auto dir = test::scratch_dir("io_roundtrip");
    const SphericalGrid g(8, 10);
    Surface f = test::wobbly_surface(g);
    f = translate(f, Eigen::Vector3d(1.0 / 3.0, 1e-300, -7.123456789012345));
    for (SurfaceFormat fmt : {SurfaceFormat::Json, SurfaceFormat::Binary}) {
        const auto p = dir / (fmt == SurfaceFormat::Json ? "f.json" : "f.bin");
        save_surface(f, p, fmt);
        const Surface back = load_surface(p);
        CHECK(back.grid() == g);
        CHECK((back.points().array() == f.points().array()).all());
    }
}

TEST_CASE("malformed surface files name the offending field") {
    const auto dir = test::scratch_dir("io_bad");
    write_text(dir / "a.json", R"({"n_u": "eight", "n_v": 8, "points": []})");
    try {
        load_surface(dir / "a.json");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("n_u") != std::string::npos);
    }
    write_text(dir / "b.json", R"({"n_u": 8, "n_v": 8})");
    try {
        load_surface(dir / "b.json");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("points") != std::string::npos);
    }
    write_text(dir / "c.json", R"({"n_u": 8, "n_v": 8, "points": [1, 2, 3]})");
    CHECK_THROWS_AS(load_surface(dir / "c.json"), DimensionError);
    write_text(dir / "d.json", "{ not json");
    CHECK_THROWS_AS(load_surface(dir / "d.json"), ParseError);
    CHECK_THROWS_AS(load_surface(dir / "missing.json"), InputError);

    const SphericalGrid g(8, 8);
    save_surface(test::analytic_sphere(g), dir / "e.bin", SurfaceFormat::Binary);
    std::string bytes = read_text(dir / "e.bin");
    write_text(dir / "f.bin", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(load_surface(dir / "f.bin"), DimensionError);
}

TEST_CASE("OBJ export of an 8x8 sphere") {
    const auto dir = test::scratch_dir("io_obj");
    const SphericalGrid g(8, 8);
    export_obj(test::analytic_sphere(g), dir / "s.obj");
    std::istringstream in(read_text(dir / "s.obj"));
    std::string line;
    int vertices = 0, faces = 0, max_index = 0, min_index = 1 << 30;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++vertices;
        if (line.rfind("f ", 0) == 0) {
            ++faces;
            std::istringstream f(line.substr(2));
            int a;
            while (f >> a) {
                max_index = std::max(max_index, a);
                min_index = std::min(min_index, a);
            }
        }
    }
    CHECK(vertices == 64);
    // two per quad between adjacent rows, plus a fan of n_u - 2 triangles per pole
    CHECK(faces == 2 * 8 * (8 - 1) + 2 * (8 - 2));
    CHECK(faces == obj_triangle_count(g));
    CHECK(min_index == 1);
    CHECK(max_index == 64);
}

TEST_CASE("OBJ faces are consistently oriented outward on a sphere") {
    const auto dir = test::scratch_dir("io_obj_orient");
    const SphericalGrid g(12, 9);
    const Surface s = test::analytic_sphere(g);
    export_obj(s, dir / "s.obj");
    std::istringstream in(read_text(dir / "s.obj"));
    std::string line;
    int outward = 0, inward = 0;
    while (std::getline(in, line)) {
        if (line.rfind("f ", 0) != 0) continue;
        std::istringstream f(line.substr(2));
        int a, b, c;
        f >> a >> b >> c;
        const Eigen::Vector3d pa = s.point(a - 1), pb = s.point(b - 1), pc = s.point(c - 1);
        const double o = (pb - pa).cross(pc - pa).dot(pa + pb + pc);
        (o > 0 ? outward : inward)++;
    }
    CHECK((outward == 0 || inward == 0));
}

TEST_CASE("node scalar sidecar has one row per node") {
    const auto dir = test::scratch_dir("io_csv");
    const SphericalGrid g(8, 8);
    std::vector<double> v(64);
    for (int k = 0; k < 64; ++k) v[k] = k * 0.5;
    write_node_scalars_csv(g, v, "diff", dir / "d.csv");
    std::istringstream in(read_text(dir / "d.csv"));
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "node,i_u,j_v,theta,phi,diff");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 64);
    CHECK_THROWS_AS(write_node_scalars_csv(g, std::vector<double>(5), "x", dir / "e.csv"), DimensionError);
}
