#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "rc/mesh.hpp"

using namespace rc;

namespace {

Rect benchmark_rect() { return {-0.25, -0.25, 0.25, 0.25}; }

}  // namespace

TEST_CASE("unperturbed 2x2 grid has the constructed counts") {
    Mesh m = generate_perturbed_grid(benchmark_rect(), 0.25, 0.0, 1);
    CHECK(m.n_vertices() == 9);
    CHECK(m.n_edges() == 16);
    CHECK(m.n_triangles() == 8);
    CHECK(m.euler_characteristic() == 1);

    // Boundary loop closes with one step per boundary vertex.
    int nb_vertices = 0;
    for (int v = 0; v < m.n_vertices(); ++v)
        if (m.boundary_vertex(v)) ++nb_vertices;
    int nb_edges = 0;
    for (const auto& e : m.edges())
        if (e.boundary) ++nb_edges;
    CHECK(nb_edges == nb_vertices);
    CHECK(static_cast<int>(m.boundary_loop().size()) == nb_edges);

    // The four rectangle corners are flagged, nothing else.
    int corners = 0;
    for (int v = 0; v < m.n_vertices(); ++v)
        if (m.corner_vertex(v)) ++corners;
    CHECK(corners == 4);
}

TEST_CASE("unperturbed grid triangles fall in two congruence classes") {
    Mesh m = generate_perturbed_grid(benchmark_rect(), 0.25, 0.0, 1);
    // Within each of the two split classes all affine maps agree.
    AffineMap first_lower = m.affine_map(0), first_upper = m.affine_map(1);
    for (int t = 0; t < m.n_triangles(); ++t) {
        AffineMap a = m.affine_map(t);
        const AffineMap& ref = (t % 2 == 0) ? first_lower : first_upper;
        CHECK(a.b11 == doctest::Approx(ref.b11));
        CHECK(a.b12 == doctest::Approx(ref.b12));
        CHECK(a.b21 == doctest::Approx(ref.b21));
        CHECK(a.b22 == doctest::Approx(ref.b22));
    }
}

TEST_CASE("affine maps have positive determinant and h^2 cell area") {
    Mesh m = generate_perturbed_grid(benchmark_rect(), 0.25, 0.25, 7);
    for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.affine_map(t).det() > 0.0);

    Mesh u = generate_perturbed_grid(benchmark_rect(), 0.25, 0.0, 7);
    for (int t = 0; t < u.n_triangles(); ++t)
        CHECK(u.affine_map(t).det() == doctest::Approx(0.25 * 0.25));
}

TEST_CASE("affine map of the reference triangle is the identity") {
    Mesh m = build_topology({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    AffineMap a = m.affine_map(0);
    CHECK(a.b11 == doctest::Approx(1.0));
    CHECK(a.b12 == doctest::Approx(0.0));
    CHECK(a.b21 == doctest::Approx(0.0));
    CHECK(a.b22 == doctest::Approx(1.0));
    CHECK(a.offset.x == doctest::Approx(0.0));

    Mesh s = build_topology({{0, 0}, {2, 0}, {0, 2}}, {{{0, 1, 2}}});
    AffineMap b = s.affine_map(0);
    CHECK(b.b11 == doctest::Approx(2.0));
    CHECK(b.b22 == doctest::Approx(2.0));
    CHECK(b.b12 == doctest::Approx(0.0));
}

TEST_CASE("perturbation determinism and displacement bound") {
    Mesh a = generate_perturbed_grid(benchmark_rect(), 0.25, 0.25, 1);
    Mesh b = generate_perturbed_grid(benchmark_rect(), 0.25, 0.25, 1);
    REQUIRE(a.n_vertices() == b.n_vertices());
    for (int v = 0; v < a.n_vertices(); ++v) {
        CHECK(a.vertex(v).x == b.vertex(v).x);
        CHECK(a.vertex(v).y == b.vertex(v).y);
    }

    Mesh c = generate_perturbed_grid(benchmark_rect(), 0.25, 0.25, 2);
    bool moved = false;
    Mesh u = generate_perturbed_grid(benchmark_rect(), 0.25, 0.0, 2);
    for (int v = 0; v < c.n_vertices(); ++v) {
        double dx = std::abs(c.vertex(v).x - u.vertex(v).x);
        double dy = std::abs(c.vertex(v).y - u.vertex(v).y);
        if (dx > 0 || dy > 0) moved = true;
        CHECK(dx < 0.25 * 0.25);
        CHECK(dy < 0.25 * 0.25);
        if (u.boundary_vertex(v)) {
            CHECK(dx == 0.0);
            CHECK(dy == 0.0);
        }
    }
    CHECK(moved);
}

TEST_CASE("invariants hold across the benchmark sweep") {
    for (double h : {2.5e-1, 1.3e-1, 6.3e-2}) {
        Mesh m = generate_perturbed_grid(benchmark_rect(), h, 0.25, 1);
        CHECK(m.euler_characteristic() == 1);
        for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.affine_map(t).det() > 0.0);
        for (const auto& e : m.edges()) CHECK((e.n_tri == 1 || e.n_tri == 2));
    }
}

TEST_CASE("single triangle and pair topology") {
    Mesh one = build_topology({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    CHECK(one.n_edges() == 3);
    CHECK(one.euler_characteristic() == 1);
    for (const auto& e : one.edges()) CHECK(e.boundary);

    Mesh two = build_topology({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}});
    int interior = 0, boundary = 0;
    for (const auto& e : two.edges()) (e.boundary ? boundary : interior)++;
    CHECK(interior == 1);
    CHECK(boundary == 4);
}

TEST_CASE("clockwise input is repaired to counterclockwise") {
    Mesh m = build_topology({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}}});
    CHECK(m.affine_map(0).det() > 0.0);
    const auto& tri = m.triangle(0);
    Vec2 a = m.vertex(tri[0]), b = m.vertex(tri[1]), c = m.vertex(tri[2]);
    CHECK((b - a).cross(c - a) > 0.0);
}

TEST_CASE("non-manifold and malformed input is rejected") {
    CHECK_THROWS_AS(build_topology({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 1}},
                                   {{{0, 1, 2}}, {{0, 1, 3}}, {{0, 1, 4}}}),
                    Error);
    CHECK_THROWS_AS(build_topology({{0, 0}, {1, 0}, {0, 1}, {5, 5}}, {{{0, 1, 2}}}), Error);
    CHECK_THROWS_AS(build_topology({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 3}}}), Error);
    CHECK_THROWS_AS(build_topology({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}, {{2, 0, 1}}}), Error);
}

TEST_CASE("save and load round-trip") {
    Mesh m = generate_perturbed_grid(benchmark_rect(), 0.125, 0.25, 3);
    std::string path = "roundtrip_mesh.txt";
    save_mesh(m, path);
    Mesh r = load_mesh(path);
    REQUIRE(r.n_vertices() == m.n_vertices());
    REQUIRE(r.n_triangles() == m.n_triangles());
    CHECK(r.n_edges() == m.n_edges());
    for (int v = 0; v < m.n_vertices(); ++v) {
        CHECK(r.vertex(v).x == m.vertex(v).x);
        CHECK(r.vertex(v).y == m.vertex(v).y);
    }
    for (int t = 0; t < m.n_triangles(); ++t) CHECK(r.triangle(t) == m.triangle(t));
    std::remove(path.c_str());
}

TEST_CASE("loader reports malformed files with line numbers") {
    {
        std::ofstream f("empty_mesh.txt");
    }
    CHECK_THROWS_WITH_AS(load_mesh("empty_mesh.txt"), doctest::Contains(":1:"), Error);
    std::remove("empty_mesh.txt");

    {
        std::ofstream f("bad_mesh.txt");
        f << "regge-mesh v1\n3 3 1\n0 0\n1 0\nnot-a-number 1\n0 1 2\n";
    }
    CHECK_THROWS_WITH_AS(load_mesh("bad_mesh.txt"), doctest::Contains(":5:"), Error);
    std::remove("bad_mesh.txt");

    {
        std::ofstream f("nonmanifold_mesh.txt");
        f << "regge-mesh v1\n5 7 3\n0 0\n1 0\n0 1\n1 1\n-1 1\n0 1 2\n0 1 3\n0 1 4\n";
    }
    CHECK_THROWS_WITH_AS(load_mesh("nonmanifold_mesh.txt"), doctest::Contains("non-manifold"),
                         Error);
    std::remove("nonmanifold_mesh.txt");
}

TEST_CASE("generation rejects bad parameters") {
    CHECK_THROWS_AS(generate_perturbed_grid(benchmark_rect(), -0.1, 0.0, 1), Error);
    CHECK_THROWS_AS(generate_perturbed_grid(benchmark_rect(), 0.25, 0.5, 1), Error);
    CHECK_THROWS_AS(generate_perturbed_grid({0, 0, 0, 1}, 0.25, 0.0, 1), Error);
}
