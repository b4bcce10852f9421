#ifndef RC_DIAGNOSTICS_HPP
#define RC_DIAGNOSTICS_HPP

#include <vector>

#include "rc/curvature.hpp"
#include "rc/fem.hpp"
#include "rc/metric_field.hpp"

// Intrinsic mesh-quality and consistency diagnostics: quasi-isometry
// constants, Riemannian shape-regularity measures, the deviation of the
// two-metric Hodge-star composition from the identity, the metric
// shape-derivative form b_h, and empirical trace / inverse inequality ratios.
// Essential suprema are approximated by maxima over a fixed sampling
// (quadrature nodes plus vertices and edge midpoints), so every reported
// constant is a lower bound on the analytic one.

namespace rc {

struct TriangleQuality {
    double h_T = 0.0;     // sup |v|_{gh} / |v|_{ref} over the triangle
    double rho = 0.0;     // 1 / sup |v|_{ref} / |v|_{gh}
    double ratio = 0.0;   // h_T / rho
    double C_g_gh = 0.0;  // quasi-isometry constants between g and gh
    double C_gh_g = 0.0;
    double Kv = 0.0;      // volume deformation against the reference metric
};

struct QualityReport {
    std::vector<TriangleQuality> per_triangle;
    double K = 0.0;        // max h_T / rho
    double K_prime = 0.0;  // max h / rho (quasi-uniformity witness)
    double K_V = 0.0;
    double C_g_gh = 0.0, C_gh_g = 0.0;
    double D_g_gh = 0.0, D_gh_g = 0.0;
    double metric_gap_inf = 0.0;  // sup |gh - g| measured in g
};

QualityReport quality_report(const Mesh& mesh, const MetricField& g, const MetricField& gh,
                             double h_nominal);

struct JhReport {
    double sup_deviation = 0.0;     // sup over samples of |Id - Jh| in gh operator norm
    double adjoint_residual = 0.0;  // worst |<u,v>_g - <u, Jh v>_gh| over random pairs
};

JhReport jh_report(const MetricField& g, const MetricField& gh, const Mesh& mesh,
                   int sample_degree = 10, int pairs = 8, uint64_t seed = 7);

// b_h(g; sigma, v): Hessian pairing on triangles minus tangential-sigma
// times normal-derivative jumps on edges (boundary edges use their single
// side). All metric quantities are measured in g.
double assemble_bh(const MetricField& g, const MetricField& sigma, const ScalarField& v,
                   const QuadSpec& quad);

struct ShapeDerivativeResult {
    double fd_derivative = 0.0;  // central difference of F(t) v
    double bh_value = 0.0;       // b_h(g(t); gh - g, v)
    double residual = 0.0;       // |fd + bh / 2|
};

// Consistency of d/dt F(g(t)) v = -b_h(g(t); gh - g, v) / 2 along the
// straight metric path g(t) = t gh + (1 - t) g.
ShapeDerivativeResult shape_derivative_check(const AnalyticMetric& g, const MetricField& gh,
                                             const ScalarField& v, double t, double dt,
                                             const QuadSpec& quad);

// Per-triangle max over basis functions of
//   |phi|_{L2(dT,gh)} / (rho^{-1/2} |phi|_{L2(T,gh)} + h_T^{1/2} |grad phi|_{L2(T,gh)}).
std::vector<double> trace_ratio_report(const LagrangeSpace& space, const MetricField& gh,
                                       const QuadSpec& quad);

// Per-triangle max over basis functions of rho |d phi| / |phi| in gh norms.
std::vector<double> inverse_ratio_report(const LagrangeSpace& space, const MetricField& gh,
                                         const QuadSpec& quad);

}  // namespace rc

#endif
