#ifndef RC_REGGE_HPP
#define RC_REGGE_HPP

#include <vector>

#include "rc/mesh.hpp"
#include "rc/metric_field.hpp"
#include "rc/quadrature.hpp"

// Degree-r Regge finite elements: piecewise-polynomial symmetric-matrix
// fields whose tangential-tangential component is continuous across edges.
// Degrees of freedom are r+1 Legendre moments of sigma(tau, tau) per edge
// (Euclidean chart arclength, oriented from the lower vertex index) and
// componentwise interior moments against a degree r-1 monomial basis.

namespace rc {

class ReggeSpace {
public:
    ReggeSpace(const Mesh& mesh, int degree);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }

    int edge_block(int e) const { return e * (degree_ + 1); }
    int interior_block(int t) const { return interior_offset_ + t * interior_per_tri_; }
    int dofs_per_edge() const { return degree_ + 1; }
    int dofs_per_interior() const { return interior_per_tri_; }
    int ndof() const { return ndof_; }

    // Monomial exponents (a, b), a + b <= degree, shared by all triangles.
    const std::vector<std::array<int, 2>>& monomials() const { return monomials_; }
    int n_monomials() const { return static_cast<int>(monomials_.size()); }

private:
    const Mesh* mesh_;
    int degree_;
    int interior_per_tri_;
    int interior_offset_;
    int ndof_;
    std::vector<std::array<int, 2>> monomials_;
};

// Per-triangle polynomial coefficients in centroid-scaled local coordinates
// xi = (x - c) / scale. coeff(t)[3 * k + c] multiplies monomial k for
// component c in (11, 12, 22) order.
class ReggeMetric final : public MetricField {
public:
    explicit ReggeMetric(const ReggeSpace& space);

    const ReggeSpace& space() const { return *space_; }

    MetricSample sample(int tri, Vec2 p, int deriv_order) const override;

    std::vector<double>& coeffs(int t) { return coeffs_[t]; }
    const std::vector<double>& coeffs(int t) const { return coeffs_[t]; }

    Vec2 centroid(int t) const { return centroids_[t]; }
    double scale(int t) const { return scales_[t]; }

private:
    const ReggeSpace* space_;
    std::vector<std::vector<double>> coeffs_;
    std::vector<Vec2> centroids_;
    std::vector<double> scales_;
};

// Canonical interpolant: matches the edge and interior moments of the given
// field. Throws if a local interpolation matrix is singular.
ReggeMetric interpolate_metric(const ReggeSpace& space, const MetricField& g,
                               const QuadSpec& quad);

inline ReggeMetric interpolate_metric(const ReggeSpace& space, const AnalyticMetric& g,
                                      const QuadSpec& quad) {
    AnalyticField f(g);
    return interpolate_metric(space, f, quad);
}

struct TtViolation {
    int edge;
    double s;         // Euclidean arclength along the edge
    double mismatch;  // |sigma(tau,tau)+ - sigma(tau,tau)-|
};

std::vector<TtViolation> check_tt_continuity(const ReggeMetric& gh, double tol,
                                             int samples_per_edge = 10);

struct PositivityViolation {
    int tri;
    Vec2 point;
    double min_eig;
};

std::vector<PositivityViolation> check_positivity(const ReggeMetric& gh, const QuadSpec& quad);

// Condition number of the local interpolation matrix on the reference-like
// triangle; finite for the supported degrees.
double local_matrix_condition(int degree);

}  // namespace rc

#endif
