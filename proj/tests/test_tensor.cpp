#include <doctest.h>

#include <cmath>
#include <random>

#include "rc/tensor.hpp"

using namespace rc;

namespace {

std::mt19937_64 rng(12345);

double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

SymMat2 random_spd() {
    double a = uniform(-1, 1), b = uniform(-1, 1), c = uniform(-1, 1), d = uniform(-1, 1);
    // A^T A + 0.1 I
    return {a * a + c * c + 0.1, a * b + c * d, b * b + d * d + 0.1};
}

// Metric-value-only finite differences; an oracle path that never touches
// the closed-form derivative code.
MetricSample fd_sample(const std::function<SymMat2(double, double)>& G, double x, double y,
                       double step) {
    MetricSample s;
    s.G = G(x, y);
    s.dG[0] = (G(x + step, y) - G(x - step, y)) * (0.5 / step);
    s.dG[1] = (G(x, y + step) - G(x, y - step)) * (0.5 / step);
    s.d2G[0] = (G(x + step, y) - 2.0 * s.G + G(x - step, y)) * (1.0 / (step * step));
    s.d2G[2] = (G(x, y + step) - 2.0 * s.G + G(x, y - step)) * (1.0 / (step * step));
    s.d2G[1] = (G(x + step, y + step) - G(x + step, y - step) - G(x - step, y + step) +
                G(x - step, y - step)) *
               (0.25 / (step * step));
    s.order = 2;
    return s;
}

// Pullback metric of the radius-R sphere under (x, y, sqrt(R^2 - x^2 - y^2)).
SymMat2 sphere_metric(double R, double x, double y) {
    double z2 = R * R - x * x - y * y;
    return {1.0 + x * x / z2, x * y / z2, 1.0 + y * y / z2};
}

double max_entry_diff(const SymMat2& a, const SymMat2& b) {
    return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12), std::abs(a.a22 - b.a22)});
}

}  // namespace

TEST_CASE("spherical cap closed form at reference points") {
    AnalyticMetric cap = spherical_cap();
    MetricSample s = cap(0.0, 0.0);
    CHECK(max_entry_diff(s.G, SymMat2::identity()) < 1e-15);

    FrameSample fr = cap.frame(0.0, 0.0);
    CHECK(fr.e1.x == doctest::Approx(1.0));
    CHECK(fr.e1.y == doctest::Approx(0.0));
    CHECK(fr.e2.x == doctest::Approx(0.0));
    CHECK(fr.e2.y == doctest::Approx(1.0));

    // G(1/4, 0) = diag(16/15, 1)
    MetricSample q = cap(0.25, 0.0);
    CHECK(q.G.a11 == doctest::Approx(16.0 / 15.0).epsilon(1e-14));
    CHECK(q.G.a12 == doctest::Approx(0.0));
    CHECK(q.G.a22 == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(cap(0.8, 0.7), Error);
}

TEST_CASE("cap derivatives agree with metric-only finite differences") {
    AnalyticMetric cap = spherical_cap();
    auto value_only = [&cap](double x, double y) { return cap(x, y).G; };
    for (auto [x, y] : {std::pair{0.1, 0.2}, {-0.22, 0.17}, {0.05, -0.24}}) {
        MetricSample exact = cap(x, y);
        MetricSample fd = fd_sample(value_only, x, y, 1e-5);
        for (int k = 0; k < 2; ++k) CHECK(max_entry_diff(exact.dG[k], fd.dG[k]) < 1e-9);
        for (int k = 0; k < 3; ++k) CHECK(max_entry_diff(exact.d2G[k], fd.d2G[k]) < 1e-5);
    }
}

TEST_CASE("cap frame is orthonormal and oriented") {
    AnalyticMetric cap = spherical_cap();
    for (int i = 0; i < 50; ++i) {
        double x = uniform(-0.24, 0.24), y = uniform(-0.24, 0.24);
        SymMat2 G = cap(x, y).G;
        FrameSample fr = cap.frame(x, y);
        CHECK(G(fr.e1, fr.e1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(G(fr.e2, fr.e2) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(G(fr.e1, fr.e2)) < 1e-12);
        CHECK(fr.e1.cross(fr.e2) > 0.0);
    }
}

TEST_CASE("cap frame derivatives agree with finite differences") {
    AnalyticMetric cap = spherical_cap();
    double x = 0.12, y = -0.18, h = 1e-6;
    FrameSample fr = cap.frame(x, y);
    FrameSample fxp = cap.frame(x + h, y), fxm = cap.frame(x - h, y);
    FrameSample fyp = cap.frame(x, y + h), fym = cap.frame(x, y - h);
    CHECK(fr.de1[0].x == doctest::Approx((fxp.e1.x - fxm.e1.x) / (2 * h)).epsilon(1e-6));
    CHECK(fr.de1[1].x == doctest::Approx((fyp.e1.x - fym.e1.x) / (2 * h)).epsilon(1e-6));
    CHECK(fr.de2[0].x == doctest::Approx((fxp.e2.x - fxm.e2.x) / (2 * h)).epsilon(1e-6));
    CHECK(fr.de2[1].x == doctest::Approx((fyp.e2.x - fym.e2.x) / (2 * h)).epsilon(1e-6));
    CHECK(fr.de2[1].y == doctest::Approx((fyp.e2.y - fym.e2.y) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("christoffel symbols: flat and constant metrics vanish") {
    MetricSample flat = flat_metric()(0.3, 0.4);
    Christoffel g = christoffel(flat);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) CHECK(g[i][j][k] == 0.0);

    MetricSample scaled;
    scaled.G = 3.7 * SymMat2::identity();
    scaled.order = 2;
    Christoffel gs = christoffel(scaled);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) CHECK(gs[i][j][k] == 0.0);
}

TEST_CASE("christoffel of the cap matches the finite-difference oracle") {
    AnalyticMetric cap = spherical_cap();
    auto value_only = [&cap](double x, double y) { return cap(x, y).G; };
    MetricSample exact = cap(0.1, 0.2);
    MetricSample fd = fd_sample(value_only, 0.1, 0.2, 1e-5);
    Christoffel ge = christoffel(exact);
    Christoffel gf = christoffel(fd);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                CHECK(std::abs(ge[i][j][k] - gf[i][j][k]) < 1e-6);
                CHECK(ge[i][j][k] == ge[i][k][j]);  // symmetry in lower indices
            }
}

TEST_CASE("gauss curvature: flat zero, cap one, sphere 1/R^2") {
    CHECK(gauss_curvature(flat_metric()(0.1, -0.2)) == 0.0);

    MetricSample scaled;
    scaled.G = 2.5 * SymMat2::identity();
    scaled.order = 2;
    CHECK(gauss_curvature(scaled) == 0.0);

    AnalyticMetric cap = spherical_cap();
    for (int i = 0; i < 100; ++i) {
        double x = uniform(-0.24, 0.24), y = uniform(-0.24, 0.24);
        CHECK(std::abs(gauss_curvature(cap(x, y)) - 1.0) < 1e-9);
    }

    // Radius-R sphere through value-only finite differences.
    for (double R : {2.0, 0.5}) {
        auto g = [R](double x, double y) { return sphere_metric(R, x, y); };
        MetricSample s = fd_sample(g, 0.07, -0.04, 1e-4);
        CHECK(gauss_curvature(s) == doctest::Approx(1.0 / (R * R)).epsilon(1e-5));
    }
}

TEST_CASE("hodge star: euclidean axes, involution, defining identity") {
    SymMat2 I = SymMat2::identity();
    Cov2 sdx = hodge_star(I, {1.0, 0.0});
    CHECK(sdx.x == doctest::Approx(0.0));
    CHECK(sdx.y == doctest::Approx(1.0));
    Cov2 sdy = hodge_star(I, {0.0, 1.0});
    CHECK(sdy.x == doctest::Approx(-1.0));
    CHECK(sdy.y == doctest::Approx(0.0));

    for (int i = 0; i < 200; ++i) {
        SymMat2 G = random_spd();
        Cov2 a{uniform(-2, 2), uniform(-2, 2)};
        Cov2 ssa = hodge_star(G, hodge_star(G, a));
        CHECK(std::abs(ssa.x + a.x) < 1e-12);
        CHECK(std::abs(ssa.y + a.y) < 1e-12);

        // beta ^ star(a) = <beta, a> dV for basis beta.
        Cov2 sa = hodge_star(G, a);
        double vol = volume_density(G);
        SymMat2 Ginv = G.inverse();
        Cov2 basis[2] = {{1.0, 0.0}, {0.0, 1.0}};
        for (const Cov2& b : basis) {
            double wedge = b.x * sa.y - b.y * sa.x;
            double inner = b.x * (Ginv.a11 * a.x + Ginv.a12 * a.y) +
                           b.y * (Ginv.a12 * a.x + Ginv.a22 * a.y);
            CHECK(std::abs(wedge - inner * vol) < 1e-12);
        }
    }

    // Cap metric star of dx against the defining-identity linear solve.
    SymMat2 G = spherical_cap()(0.0, 0.25).G;
    Cov2 a{1.0, 0.0};
    Cov2 sa = hodge_star(G, a);
    SymMat2 Ginv = G.inverse();
    double vol = volume_density(G);
    // From beta = dx: sa.y = <dx,a> vol; from beta = dy: -sa.x = <dy,a> vol.
    double expect_y = (Ginv.a11 * a.x + Ginv.a12 * a.y) * vol;
    double expect_x = -(Ginv.a12 * a.x + Ginv.a22 * a.y) * vol;
    CHECK(sa.y == doctest::Approx(expect_y).epsilon(1e-14));
    CHECK(sa.x == doctest::Approx(expect_x).epsilon(1e-14));
}

TEST_CASE("volume density") {
    CHECK(volume_density(SymMat2::identity()) == doctest::Approx(1.0));
    CHECK(volume_density(3.0 * SymMat2::identity()) == doctest::Approx(3.0));
    AnalyticMetric cap = spherical_cap();
    double x = 0.2, y = -0.1;
    CHECK(volume_density(cap(x, y).G) ==
          doctest::Approx(1.0 / std::sqrt(1.0 - x * x - y * y)).epsilon(1e-14));
}

TEST_CASE("norms and the dual-norm identity") {
    SymMat2 I = SymMat2::identity();
    CHECK(vec_norm(I, {3.0, 4.0}) == doctest::Approx(5.0));
    for (int i = 0; i < 20; ++i) {
        SymMat2 G = random_spd();
        CHECK(covec_norm(G, {1.0, 0.0}) == doctest::Approx(std::sqrt(G.inverse().a11)));
    }

    // sup |alpha|_{g1*} / |alpha|_{g2*} = sup |v|_{g2} / |v|_{g1}.
    for (int i = 0; i < 1000; ++i) {
        SymMat2 G1 = random_spd(), G2 = random_spd();
        double lhs = std::sqrt(generalized_eigs(G1.inverse(), G2.inverse()).max);
        double rhs = std::sqrt(generalized_eigs(G2, G1).max);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("quasi-isometry ratio") {
    SymMat2 G = random_spd();
    CHECK(quasi_isometry_ratio(G, G) == doctest::Approx(1.0));
    CHECK(quasi_isometry_ratio(4.0 * G, G) == doctest::Approx(2.0));
    CHECK(quasi_isometry_ratio(G, 4.0 * G) == doctest::Approx(0.5));

    for (int i = 0; i < 25; ++i) {
        SymMat2 G1 = random_spd(), G2 = random_spd();
        double fast = quasi_isometry_ratio(G1, G2);
        // Direct maximization: 360-direction scan, then golden-section polish.
        auto ratio_at = [&](double th) {
            Vec2 v{std::cos(th), std::sin(th)};
            return vec_norm(G1, v) / vec_norm(G2, v);
        };
        double best_th = 0.0, sampled = 0.0;
        for (int k = 0; k < 360; ++k) {
            double th = M_PI * k / 360.0;
            double val = ratio_at(th);
            if (val > sampled) {
                sampled = val;
                best_th = th;
            }
        }
        double lo = best_th - M_PI / 360.0, hi = best_th + M_PI / 360.0;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 80; ++it) {
            double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
            if (ratio_at(m1) < ratio_at(m2)) lo = m1; else hi = m2;
        }
        sampled = std::max(sampled, ratio_at(0.5 * (lo + hi)));
        CHECK(fast == doctest::Approx(sampled).epsilon(1e-6));
        CHECK(quasi_isometry_ratio(G1, G2) * quasi_isometry_ratio(G2, G1) >= 1.0 - 1e-12);
    }
}

TEST_CASE("volume ratio sits between the quasi-isometry bounds") {
    for (int i = 0; i < 500; ++i) {
        SymMat2 G1 = random_spd(), G2 = random_spd();
        double c12 = quasi_isometry_ratio(G1, G2);
        double c21 = quasi_isometry_ratio(G2, G1);
        double vol = std::sqrt(G1.det() / G2.det());
        CHECK(vol >= 1.0 / (c21 * c21) - 1e-12);
        CHECK(vol <= c12 * c12 + 1e-12);
    }
}

TEST_CASE("metric gap measures the operator-norm difference") {
    SymMat2 G = random_spd();
    CHECK(metric_gap(G, G) == doctest::Approx(0.0));
    CHECK(metric_gap(2.0 * G, G) == doctest::Approx(1.0));
    // Sampled check of sup |(g - gh)(v, w)| / (|v| |w|): the max over the
    // eigen-directions of the pencil bounds all sampled pairs.
    for (int i = 0; i < 50; ++i) {
        SymMat2 G1 = random_spd(), G2 = random_spd();
        double gap = metric_gap(G1, G2);
        SymMat2 diff = G1 - G2;
        for (int k = 0; k < 90; ++k) {
            double th = M_PI * k / 90.0;
            Vec2 v{std::cos(th), std::sin(th)};
            CHECK(std::abs(diff(v, v)) / (vec_norm(G2, v) * vec_norm(G2, v)) <= gap + 1e-12);
        }
    }
}

TEST_CASE("cap connection form matches the covariant derivative of the frame") {
    // alpha(X) = <grad_X e2, e1>_g computed with finite differences of the
    // frame plus Christoffel terms.
    AnalyticMetric cap = spherical_cap();
    double x = 0.11, y = -0.07, h = 1e-6;
    MetricSample ms = cap(x, y);
    Christoffel gamma = christoffel(ms);
    FrameSample fr = cap.frame(x, y);

    for (int dir = 0; dir < 2; ++dir) {
        Vec2 X = dir == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
        FrameSample plus = cap.frame(x + h * X.x, y + h * X.y);
        FrameSample minus = cap.frame(x - h * X.x, y - h * X.y);
        Vec2 de2{(plus.e2.x - minus.e2.x) / (2 * h), (plus.e2.y - minus.e2.y) / (2 * h)};
        // (nabla_X e2)^i = de2^i + Gamma^i_{jk} X^j e2^k
        double xv[2] = {X.x, X.y}, e2v[2] = {fr.e2.x, fr.e2.y};
        Vec2 cov = de2;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    (i == 0 ? cov.x : cov.y) += gamma[i][j][k] * xv[j] * e2v[k];
        double alpha_X = ms.G(cov, fr.e1);
        Cov2 alpha = cap.connection_form(x, y);
        CHECK(alpha_X == doctest::Approx(alpha.apply(X)).epsilon(1e-6));
    }
}
