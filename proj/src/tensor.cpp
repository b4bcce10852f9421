#include "rc/tensor.hpp"

#include <algorithm>

namespace rc {

namespace {

// Value and derivatives of f = N / w where N is a quadratic polynomial and
// w = 1 - x^2 - y^2. Recurrences follow from w_x = -2x, w_y = -2y:
//   f_x  = (N_x + 2 x f) / w
//   f_xx = (N_xx + 2 f + 4 x f_x) / w
//   f_xy = (N_xy + 2 x f_y + 2 y f_x) / w
struct RationalOverCap {
    double f, fx, fy, fxx, fxy, fyy;

    RationalOverCap(double x, double y, double n, double nx, double ny, double nxx, double nxy,
                    double nyy) {
        double w = 1.0 - x * x - y * y;
        if (w <= 0.0) throw Error("spherical_cap: point outside the unit chart disc");
        f = n / w;
        fx = (nx + 2.0 * x * f) / w;
        fy = (ny + 2.0 * y * f) / w;
        fxx = (nxx + 2.0 * f + 4.0 * x * fx) / w;
        fxy = (nxy + 2.0 * x * fy + 2.0 * y * fx) / w;
        fyy = (nyy + 2.0 * f + 4.0 * y * fy) / w;
    }
};

MetricSample cap_sample(double x, double y) {
    // G = 1/(1 - x^2 - y^2) [[1 - y^2, x y], [x y, 1 - x^2]]
    RationalOverCap g11(x, y, 1.0 - y * y, 0.0, -2.0 * y, 0.0, 0.0, -2.0);
    RationalOverCap g12(x, y, x * y, y, x, 0.0, 1.0, 0.0);
    RationalOverCap g22(x, y, 1.0 - x * x, -2.0 * x, 0.0, -2.0, 0.0, 0.0);

    MetricSample s;
    s.G = {g11.f, g12.f, g22.f};
    s.dG[0] = {g11.fx, g12.fx, g22.fx};
    s.dG[1] = {g11.fy, g12.fy, g22.fy};
    s.d2G[0] = {g11.fxx, g12.fxx, g22.fxx};
    s.d2G[1] = {g11.fxy, g12.fxy, g22.fxy};
    s.d2G[2] = {g11.fyy, g12.fyy, g22.fyy};
    s.order = 2;
    return s;
}

FrameSample cap_frame(double x, double y) {
    double w = 1.0 - x * x - y * y;
    if (w <= 0.0) throw Error("spherical_cap: point outside the unit chart disc");
    double b2 = 1.0 - y * y;
    double a = std::sqrt(w);
    double b = std::sqrt(b2);

    FrameSample fr;
    fr.e1 = {a / b, 0.0};
    fr.e2 = {-x * y / b, b};

    // d(a/b) and the E2 components, from a_x = -x/a, b_y = -y/b.
    fr.de1[0] = {-x / (a * b), 0.0};
    fr.de1[1] = {y * (a * a - b2) / (a * b * b2), 0.0};
    fr.de2[0] = {-y / b, 0.0};
    fr.de2[1] = {-x / (b * b2), -y / b};
    fr.has_derivs = true;
    return fr;
}

Cov2 cap_alpha(double x, double y) {
    double w = 1.0 - x * x - y * y;
    if (w <= 0.0) throw Error("spherical_cap: point outside the unit chart disc");
    double rw = std::sqrt(w);
    return {-y / rw, -x * y * y / ((1.0 - y * y) * rw)};
}

}  // namespace

AnalyticMetric spherical_cap() {
    AnalyticMetric m;
    m.eval = cap_sample;
    m.frame = cap_frame;
    m.connection_form = cap_alpha;
    m.name = "cap";
    return m;
}

AnalyticMetric flat_metric() {
    AnalyticMetric m;
    m.eval = [](double, double) {
        MetricSample s;
        s.G = SymMat2::identity();
        s.order = 2;
        return s;
    };
    m.frame = [](double, double) {
        FrameSample fr;
        fr.e1 = {1.0, 0.0};
        fr.e2 = {0.0, 1.0};
        fr.has_derivs = true;
        return fr;
    };
    m.connection_form = [](double, double) { return Cov2{0.0, 0.0}; };
    m.name = "flat";
    return m;
}

Christoffel christoffel(const MetricSample& s) {
    if (!s.G.spd()) throw Error("christoffel: metric value is not positive definite");
    SymMat2 inv = s.G.inverse();
    Christoffel g{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = j; k < 2; ++k) {
                double sum = 0.0;
                for (int l = 0; l < 2; ++l) {
                    double t = s.dG[k].entry(l, j) + s.dG[j].entry(l, k) - s.dG[l].entry(j, k);
                    sum += inv.entry(i, l) * t;
                }
                g[i][j][k] = 0.5 * sum;
                g[i][k][j] = g[i][j][k];
            }
    return g;
}

ChristoffelDerivs christoffel_with_derivs(const MetricSample& s) {
    if (s.order < 2) throw Error("christoffel_with_derivs: second derivatives required");
    ChristoffelDerivs out;
    out.gamma = christoffel(s);

    SymMat2 inv = s.G.inverse();
    // d_m G^{-1} = -G^{-1} (d_m G) G^{-1}
    std::array<std::array<std::array<double, 2>, 2>, 2> dinv{};
    for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 2; ++i)
            for (int l = 0; l < 2; ++l) {
                double sum = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        sum += inv.entry(i, a) * s.dG[m].entry(a, b) * inv.entry(b, l);
                dinv[m][i][l] = -sum;
            }

    auto d2 = [&s](int m, int k, int l, int j) {
        // d_m d_k G_{lj}
        return s.d2G[m + k].entry(l, j);
    };

    for (int m = 0; m < 2; ++m) {
        Christoffel dg{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = j; k < 2; ++k) {
                    double sum = 0.0;
                    for (int l = 0; l < 2; ++l) {
                        double t = s.dG[k].entry(l, j) + s.dG[j].entry(l, k) - s.dG[l].entry(j, k);
                        double dt = d2(m, k, l, j) + d2(m, j, l, k) - d2(m, l, j, k);
                        sum += dinv[m][i][l] * t + inv.entry(i, l) * dt;
                    }
                    dg[i][j][k] = 0.5 * sum;
                    dg[i][k][j] = dg[i][j][k];
                }
        out.dgamma[m] = dg;
    }
    return out;
}

double gauss_curvature(const MetricSample& s) {
    ChristoffelDerivs cd = christoffel_with_derivs(s);
    const Christoffel& g = cd.gamma;
    // R^l_{212} = d_1 Gamma^l_{22} - d_2 Gamma^l_{12} + Gamma^l_{1m} Gamma^m_{22}
    //             - Gamma^l_{2m} Gamma^m_{12}
    double Rl[2];
    for (int l = 0; l < 2; ++l) {
        double term = cd.dgamma[0][l][1][1] - cd.dgamma[1][l][0][1];
        for (int m = 0; m < 2; ++m) term += g[l][0][m] * g[m][1][1] - g[l][1][m] * g[m][0][1];
        Rl[l] = term;
    }
    double r1212 = s.G.entry(0, 0) * Rl[0] + s.G.entry(0, 1) * Rl[1];
    return r1212 / s.G.det();
}

Cov2 hodge_star(const SymMat2& G, Cov2 alpha) {
    if (!G.spd()) throw Error("hodge_star: metric value is not positive definite");
    // star(a) = sqrt(det G) J G^{-1} a with J the quarter turn.
    Vec2 ga = G.solve({alpha.x, alpha.y});
    double vol = std::sqrt(G.det());
    return {-vol * ga.y, vol * ga.x};
}

double covec_norm(const SymMat2& G, Cov2 alpha) {
    Vec2 sharp = G.solve({alpha.x, alpha.y});
    return std::sqrt(alpha.x * sharp.x + alpha.y * sharp.y);
}

EigPair generalized_eigs(const SymMat2& G1, const SymMat2& G2) {
    // Roots of det(G1 - lambda G2) = 0.
    double a = G2.det();
    if (a <= 0.0) throw Error("generalized_eigs: reference metric is not positive definite");
    double b = G1.a11 * G2.a22 + G1.a22 * G2.a11 - 2.0 * G1.a12 * G2.a12;
    double c = G1.det();
    double disc = b * b - 4.0 * a * c;
    disc = disc > 0.0 ? std::sqrt(disc) : 0.0;
    double lo = (b - disc) / (2.0 * a);
    double hi = (b + disc) / (2.0 * a);
    return {lo, hi};
}

double quasi_isometry_ratio(const SymMat2& G1, const SymMat2& G2) {
    if (!G1.spd() || !G2.spd())
        throw Error("quasi_isometry_ratio: both metrics must be positive definite");
    return std::sqrt(generalized_eigs(G1, G2).max);
}

double metric_gap(const SymMat2& G, const SymMat2& Gh) {
    if (!Gh.spd()) throw Error("metric_gap: reference metric is not positive definite");
    EigPair e = generalized_eigs(G - Gh, Gh);
    return std::max(std::abs(e.min), std::abs(e.max));
}

}  // namespace rc
