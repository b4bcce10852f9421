#ifndef RC_FEM_HPP
#define RC_FEM_HPP

#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "rc/mesh.hpp"
#include "rc/metric_field.hpp"
#include "rc/quadrature.hpp"

// Continuous degree-p Lagrange elements on the chart triangulation,
// metric-weighted assembly of the stiffness form <du, dv>_{L2(M, g_h)},
// the mean-value constraint, and the bordered constrained solve.

namespace rc {

class LagrangeSpace {
public:
    LagrangeSpace(const Mesh& mesh, int degree);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int ndof() const { return ndof_; }
    int local_ndof() const { return static_cast<int>(ref_nodes_.size()); }

    const std::vector<int>& tri_dofs(int t) const { return tri_dofs_[t]; }
    Vec2 dof_coord(int dof) const { return dof_coords_[dof]; }

    // All basis values / reference derivatives at a reference point.
    void eval_ref(Vec2 ref, std::vector<double>* values, std::vector<Cov2>* grads,
                  std::vector<SymMat2>* hessians) const;

private:
    const Mesh* mesh_;
    int degree_;
    int ndof_;
    std::vector<Vec2> ref_nodes_;
    std::vector<std::array<int, 2>> monomials_;
    std::vector<std::vector<double>> nodal_coeffs_;  // [basis][monomial]
    std::vector<std::vector<int>> tri_dofs_;
    std::vector<Vec2> dof_coords_;
};

struct ScalarField {
    const LagrangeSpace* space = nullptr;
    Eigen::VectorXd coeffs;

    double value(int tri, Vec2 p) const;
    Cov2 gradient(int tri, Vec2 p) const;
    SymMat2 chart_hessian(int tri, Vec2 p) const;
};

Eigen::SparseMatrix<double> assemble_stiffness(const LagrangeSpace& space, const MetricField& g,
                                               const QuadSpec& quad);

// m_i = integral of phi_i against the g-volume form; sums to the g-area.
Eigen::VectorXd assemble_volume_functional(const LagrangeSpace& space, const MetricField& g,
                                           const QuadSpec& quad);

enum class SolverKind { Direct, ConjugateGradient };

struct SolveResult {
    ScalarField u;
    double lambda = 0.0;      // multiplier of the mean-value constraint
    double residual = 0.0;    // max_i |A u + lambda m - F| / max |F|
    int iterations = 0;       // CG only
};

// Solve A u + lambda m = F subject to m . u = 0 via the symmetric bordered
// system. F must satisfy the compatibility condition |F . 1| <= tol |F|_1;
// an incompatible F indicates a broken discrete Gauss-Bonnet identity in the
// right-hand side assembly and is reported as an error.
SolveResult solve_constrained(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& m,
                              const Eigen::VectorXd& F, const LagrangeSpace& space,
                              SolverKind kind = SolverKind::Direct,
                              double compat_tol = 1e-8);

struct GradErrorResult {
    double abs = 0.0;
    double rel = 0.0;
    bool zero_denominator = false;
};

// Relative L2(M, g) error of du against the gradient determined by the
// closed-form connection 1-form alpha (du = -star_g alpha under this
// project's star and orientation conventions).
GradErrorResult l2_error_grad(const ScalarField& u, const std::function<Cov2(double, double)>& alpha,
                              const AnalyticMetric& g, const QuadSpec& quad);

}  // namespace rc

#endif
