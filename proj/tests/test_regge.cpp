#include <doctest.h>

#include <cmath>
#include <random>

#include "rc/regge.hpp"

using namespace rc;

namespace {

std::mt19937_64 rng(777);
double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Global-coordinate polynomial symmetric field with exact derivatives.
struct PolyField final : MetricField {
    // coeff[k] multiplies x^a y^b with (a, b) = expo[k].
    std::vector<std::array<int, 2>> expo;
    std::vector<SymMat2> coeff;

    static PolyField random(int degree) {
        PolyField f;
        for (int tot = 0; tot <= degree; ++tot)
            for (int a = tot; a >= 0; --a) {
                f.expo.push_back({a, tot - a});
                f.coeff.push_back({uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)});
            }
        return f;
    }

    MetricSample sample(int, Vec2 p, int order) const override {
        auto ip = [](double v, int e) {
            double r = 1.0;
            for (int i = 0; i < e; ++i) r *= v;
            return r;
        };
        MetricSample s;
        s.order = order;
        for (size_t k = 0; k < expo.size(); ++k) {
            int a = expo[k][0], b = expo[k][1];
            double xa = ip(p.x, a), yb = ip(p.y, b);
            s.G = s.G + xa * yb * coeff[k];
            s.dG[0] = s.dG[0] + (a > 0 ? a * ip(p.x, a - 1) * yb : 0.0) * coeff[k];
            s.dG[1] = s.dG[1] + (b > 0 ? xa * b * ip(p.y, b - 1) : 0.0) * coeff[k];
            s.d2G[0] = s.d2G[0] + (a > 1 ? a * (a - 1) * ip(p.x, a - 2) * yb : 0.0) * coeff[k];
            s.d2G[1] = s.d2G[1] +
                       ((a > 0 && b > 0) ? a * b * ip(p.x, a - 1) * ip(p.y, b - 1) : 0.0) * coeff[k];
            s.d2G[2] = s.d2G[2] + (b > 1 ? xa * b * (b - 1) * ip(p.y, b - 2) : 0.0) * coeff[k];
        }
        return s;
    }
};

Mesh bench_mesh(double h, double perturb = 0.25, uint64_t seed = 5) {
    return generate_perturbed_grid({-0.25, -0.25, 0.25, 0.25}, h, perturb, seed);
}

double entry_gap(const SymMat2& a, const SymMat2& b) {
    return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12), std::abs(a.a22 - b.a22)});
}

Vec2 random_point_in(const Mesh& mesh, int t) {
    double u = uniform(0, 1), v = uniform(0, 1);
    if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    return mesh.affine_map(t).apply({u, v});
}

}  // namespace

TEST_CASE("regge dof counts") {
    Mesh one = build_topology({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    CHECK(ReggeSpace(one, 0).ndof() == 3);
    CHECK(ReggeSpace(one, 1).ndof() == 9);
    CHECK(ReggeSpace(one, 2).ndof() == 18);

    Mesh grid = bench_mesh(0.25, 0.0);
    REQUIRE(grid.n_edges() == 16);
    CHECK(ReggeSpace(grid, 0).ndof() == 16);
    CHECK(ReggeSpace(grid, 1).ndof() == 2 * 16 + 3 * 8);
}

TEST_CASE("local interpolation matrices are unisolvent for r = 0..3") {
    for (int r = 0; r <= 3; ++r) {
        double cond = local_matrix_condition(r);
        CHECK(std::isfinite(cond));
        CHECK(cond < 1e8);
    }
}

TEST_CASE("constant metric is reproduced exactly at every order") {
    Mesh mesh = bench_mesh(0.25);
    for (int r = 0; r <= 3; ++r) {
        ReggeSpace space(mesh, r);
        PolyField constant;
        constant.expo = {{0, 0}};
        constant.coeff = {{2.0, 0.3, 1.5}};
        ReggeMetric gh = interpolate_metric(space, constant, QuadSpec::for_orders(1, r));
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            MetricSample s = gh.sample(t, random_point_in(mesh, t), 2);
            CHECK(entry_gap(s.G, constant.coeff[0]) < 1e-12);
            CHECK(entry_gap(s.dG[0], SymMat2{}) < 1e-11);
            CHECK(entry_gap(s.dG[1], SymMat2{}) < 1e-11);
        }
    }
}

TEST_CASE("polynomial metrics of degree <= r are reproduced") {
    Mesh mesh = bench_mesh(0.25);
    for (int r = 1; r <= 3; ++r) {
        ReggeSpace space(mesh, r);
        PolyField poly = PolyField::random(r);
        ReggeMetric gh = interpolate_metric(space, poly, QuadSpec::for_orders(1, r));
        for (int probe = 0; probe < 20; ++probe) {
            int t = static_cast<int>(uniform(0, mesh.n_triangles() - 1e-9));
            Vec2 p = random_point_in(mesh, t);
            MetricSample a = gh.sample(t, p, 2);
            MetricSample b = poly.sample(t, p, 2);
            CHECK(entry_gap(a.G, b.G) < 1e-10);
            CHECK(entry_gap(a.dG[0], b.dG[0]) < 1e-9);
            CHECK(entry_gap(a.dG[1], b.dG[1]) < 1e-9);
            if (r >= 2) {
                CHECK(entry_gap(a.d2G[0], b.d2G[0]) < 1e-8);
                CHECK(entry_gap(a.d2G[1], b.d2G[1]) < 1e-8);
                CHECK(entry_gap(a.d2G[2], b.d2G[2]) < 1e-8);
            }
        }
    }
}

TEST_CASE("linear-in-x metric is exact at r = 1") {
    Mesh mesh = bench_mesh(0.125);
    ReggeSpace space(mesh, 1);
    PolyField lin;
    lin.expo = {{0, 0}, {1, 0}};
    lin.coeff = {{2.0, 0.1, 1.8}, {0.5, -0.2, 0.7}};
    ReggeMetric gh = interpolate_metric(space, lin, QuadSpec::for_orders(1, 1));
    for (int probe = 0; probe < 20; ++probe) {
        int t = static_cast<int>(uniform(0, mesh.n_triangles() - 1e-9));
        Vec2 p = random_point_in(mesh, t);
        CHECK(entry_gap(gh.sample(t, p, 0).G, lin.sample(t, p, 0).G) < 1e-12);
    }
}

TEST_CASE("interpolants are tt-continuous; corruption is detected") {
    Mesh mesh = bench_mesh(0.125);
    AnalyticMetric cap = spherical_cap();
    for (int r = 0; r <= 2; ++r) {
        ReggeSpace space(mesh, r);
        ReggeMetric gh = interpolate_metric(space, cap, QuadSpec::for_orders(1, r));
        CHECK(check_tt_continuity(gh, 1e-10).empty());

        gh.coeffs(3)[0] += 0.05;
        CHECK(!check_tt_continuity(gh, 1e-10).empty());
    }
}

TEST_CASE("r = 0 interpolant of the cap is piecewise constant and positive") {
    Mesh mesh = bench_mesh(0.125);
    ReggeSpace space(mesh, 0);
    AnalyticMetric cap = spherical_cap();
    ReggeMetric gh = interpolate_metric(space, cap, QuadSpec::for_orders(1, 0));
    CHECK(check_positivity(gh, QuadSpec::for_orders(1, 0)).empty());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        MetricSample s = gh.sample(t, random_point_in(mesh, t), 2);
        CHECK(entry_gap(s.dG[0], SymMat2{}) == 0.0);
        CHECK(entry_gap(s.dG[1], SymMat2{}) == 0.0);
    }
}

TEST_CASE("flat metric at r = 0 is positive everywhere") {
    Mesh mesh = bench_mesh(0.25);
    ReggeSpace space(mesh, 0);
    ReggeMetric gh = interpolate_metric(space, flat_metric(), QuadSpec::for_orders(1, 0));
    CHECK(check_positivity(gh, QuadSpec::for_orders(1, 0)).empty());
}

TEST_CASE("interpolation error decays at order r + 1") {
    // Measured on the unperturbed self-similar family: the sup norm over
    // independently perturbed meshes carries extreme-value noise that
    // obscures the element's approximation order.
    AnalyticMetric cap = spherical_cap();
    for (int r = 0; r <= 2; ++r) {
        std::vector<double> errs;
        std::vector<double> hs{0.25, 0.125, 0.0625, 0.03125};
        for (double h : hs) {
            Mesh mesh = bench_mesh(h, 0.0);
            ReggeSpace space(mesh, r);
            ReggeMetric gh = interpolate_metric(space, cap, QuadSpec::for_orders(1, r));
            double err = 0.0;
            for (int t = 0; t < mesh.n_triangles(); ++t) {
                AffineMap map = mesh.affine_map(t);
                for (const TrianglePoint& qp : triangle_rule(6)) {
                    Vec2 p = map.apply({qp.x, qp.y});
                    err = std::max(err, metric_gap(gh.sample(t, p, 0).G, cap(p.x, p.y).G));
                }
                for (int v : mesh.triangle(t))
                    err = std::max(err, metric_gap(gh.sample(t, mesh.vertex(v), 0).G,
                                                   cap(mesh.vertex(v).x, mesh.vertex(v).y).G));
            }
            errs.push_back(err);
        }
        double fitted = std::log(errs[2] / errs[3]) / std::log(hs[2] / hs[3]);
        CHECK(fitted > r + 0.7);
        if (r == 1) {
            // One halving drops the sup error by roughly 2^(r+1) = 4.
            double drop = errs[2] / errs[3];
            CHECK(drop > 3.0);
            CHECK(drop < 5.5);
        }
    }
}
