#ifndef RC_TENSOR_HPP
#define RC_TENSOR_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

// Pointwise Riemannian algebra on a 2D chart: metric values and their
// coordinate derivatives, Christoffel symbols, Gauss curvature, Hodge star,
// norms, and quasi-isometry ratios. Everything here is a pure function of
// plain value types so that analytic metrics and piecewise-polynomial
// (Regge) metrics share one code path.

namespace rc {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {c * x, c * y}; }
    Vec2 operator/(double c) const { return {x / c, y / c}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double c, Vec2 v) { return v * c; }

// Covectors carry chart components like vectors do, but transform dually;
// keeping a separate type catches index mishaps at compile time.
struct Cov2 {
    double x = 0.0, y = 0.0;

    Cov2() = default;
    Cov2(double x_, double y_) : x(x_), y(y_) {}

    Cov2 operator+(Cov2 o) const { return {x + o.x, y + o.y}; }
    Cov2 operator-(Cov2 o) const { return {x - o.x, y - o.y}; }
    Cov2 operator*(double c) const { return {c * x, c * y}; }
    double apply(Vec2 v) const { return x * v.x + y * v.y; }
};

inline Cov2 operator*(double c, Cov2 a) { return a * c; }

// Symmetric 2x2 bilinear form in chart coordinates.
struct SymMat2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    SymMat2() = default;
    SymMat2(double g11, double g12, double g22) : a11(g11), a12(g12), a22(g22) {}

    static SymMat2 identity() { return {1.0, 0.0, 1.0}; }

    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }
    bool spd() const { return a11 > 0.0 && det() > 0.0; }

    double operator()(Vec2 u, Vec2 v) const {
        return u.x * (a11 * v.x + a12 * v.y) + u.y * (a12 * v.x + a22 * v.y);
    }

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }

    SymMat2 inverse() const {
        double d = det();
        if (d == 0.0) throw Error("tensor: singular symmetric 2x2 matrix");
        return {a22 / d, -a12 / d, a11 / d};
    }

    // Solve G w = rhs.
    Vec2 solve(Vec2 rhs) const {
        double d = det();
        if (d == 0.0) throw Error("tensor: singular symmetric 2x2 matrix");
        return {(a22 * rhs.x - a12 * rhs.y) / d, (a11 * rhs.y - a12 * rhs.x) / d};
    }

    SymMat2 operator+(SymMat2 o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
    SymMat2 operator-(SymMat2 o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
    SymMat2 operator*(double c) const { return {c * a11, c * a12, c * a22}; }

    double entry(int i, int j) const {
        if (i == 0) return j == 0 ? a11 : a12;
        return j == 0 ? a12 : a22;
    }
};

inline SymMat2 operator*(double c, SymMat2 m) { return m * c; }

// Metric value plus coordinate derivatives. `order` records how many
// derivative levels are populated (0, 1 or 2). dG[k] is d/dx^k of G;
// d2G holds xx, xy, yy in that order.
struct MetricSample {
    SymMat2 G;
    std::array<SymMat2, 2> dG{};
    std::array<SymMat2, 3> d2G{};
    int order = 0;

    const SymMat2& dG2(int i, int j) const { return d2G[i + j]; }
};

inline MetricSample lincomb(double a, const MetricSample& A, double b, const MetricSample& B) {
    MetricSample r;
    r.G = a * A.G + b * B.G;
    for (int k = 0; k < 2; ++k) r.dG[k] = a * A.dG[k] + b * B.dG[k];
    for (int k = 0; k < 3; ++k) r.d2G[k] = a * A.d2G[k] + b * B.d2G[k];
    r.order = std::min(A.order, B.order);
    return r;
}

// Orthonormal frame value at a chart point; de1[k], de2[k] are d/dx^k.
// `has_derivs` gates closed-form differentiation of boundary angles.
struct FrameSample {
    Vec2 e1, e2;
    std::array<Vec2, 2> de1{}, de2{};
    bool has_derivs = false;
};

// A chart-defined metric with optional frame and connection-form data.
struct AnalyticMetric {
    std::function<MetricSample(double, double)> eval;
    std::function<FrameSample(double, double)> frame;       // may be empty
    std::function<Cov2(double, double)> connection_form;    // may be empty
    std::string name;

    bool has_frame() const { return static_cast<bool>(frame); }

    MetricSample operator()(double x, double y) const { return eval(x, y); }
    MetricSample operator()(Vec2 p) const { return eval(p.x, p.y); }
};

// Benchmark metric of the unit-sphere cap parameterized over the chart
// (valid for x^2 + y^2 < 1), with its orthonormal frame and connection form.
AnalyticMetric spherical_cap();

// Euclidean chart metric with the standard constant frame; test oracle.
AnalyticMetric flat_metric();

// Christoffel symbols of the second kind; gamma[i][j][k] = Gamma^i_{jk}.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

Christoffel christoffel(const MetricSample& s);

// Gamma and its coordinate derivatives dgamma[m][i][j][k] = d_m Gamma^i_{jk}.
struct ChristoffelDerivs {
    Christoffel gamma;
    std::array<Christoffel, 2> dgamma;
};

ChristoffelDerivs christoffel_with_derivs(const MetricSample& s);

// Gauss curvature from the full second-order sample via R_1212.
double gauss_curvature(const MetricSample& s);

// Hodge star on 1-forms: beta ^ star(alpha) = <beta,alpha> dV for all beta.
Cov2 hodge_star(const SymMat2& G, Cov2 alpha);

// sqrt(det G): the coefficient of the volume form against dx ^ dy.
inline double volume_density(const SymMat2& G) {
    double d = G.det();
    if (d <= 0.0) throw Error("tensor: volume density of a non-SPD metric");
    return std::sqrt(d);
}

inline double vec_norm(const SymMat2& G, Vec2 v) { return std::sqrt(G(v, v)); }

// Norm of a covector: dual pairing through the inverse metric.
double covec_norm(const SymMat2& G, Cov2 alpha);

// sup over v != 0 of |v|_{G1} / |v|_{G2}; the pointwise quasi-isometry ratio.
double quasi_isometry_ratio(const SymMat2& G1, const SymMat2& G2);

// Pointwise operator-norm distance sup |(G - Gh)(V, W)| / (|V|_{Gh} |W|_{Gh}).
double metric_gap(const SymMat2& G, const SymMat2& Gh);

// Extremal generalized eigenvalues of G1 v = lambda G2 v for SPD G2.
struct EigPair {
    double min, max;
};
EigPair generalized_eigs(const SymMat2& G1, const SymMat2& G2);

}  // namespace rc

#endif
