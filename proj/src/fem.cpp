#include "rc/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>

namespace rc {

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= base;
    return r;
}

// du = -star_g alpha: with beta ^ star alpha = <beta, alpha> dV and the
// counterclockwise chart orientation, star du recovers +alpha.
constexpr double kGradFromAlphaSign = -1.0;

}  // namespace

LagrangeSpace::LagrangeSpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree) {
    if (degree < 1) throw Error("fem: Lagrange degree must be at least 1");
    const int p = degree;

    // Reference nodes: vertices, then p-1 nodes per side (in side order),
    // then the interior grid.
    ref_nodes_ = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    const Vec2 rv[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (int side = 0; side < 3; ++side) {
        Vec2 a = rv[side], b = rv[(side + 1) % 3];
        for (int k = 1; k < p; ++k) ref_nodes_.push_back(a + (static_cast<double>(k) / p) * (b - a));
    }
    for (int j = 1; j < p; ++j)
        for (int i = 1; i + j < p; ++i)
            ref_nodes_.push_back({static_cast<double>(i) / p, static_cast<double>(j) / p});

    for (int total = 0; total <= p; ++total)
        for (int a = total; a >= 0; --a) monomials_.push_back({a, total - a});

    const int n = local_ndof();
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            V(i, j) = ipow(ref_nodes_[i].x, monomials_[j][0]) * ipow(ref_nodes_[i].y, monomials_[j][1]);
    Eigen::MatrixXd C = V.inverse();
    nodal_coeffs_.assign(n, std::vector<double>(n));
    for (int basis = 0; basis < n; ++basis)
        for (int mono = 0; mono < n; ++mono) nodal_coeffs_[basis][mono] = C(mono, basis);

    // Global numbering: vertices, then (p-1) dofs per edge ordered from the
    // lower vertex index, then per-triangle interiors.
    const int V_count = mesh.n_vertices();
    const int E_count = mesh.n_edges();
    const int per_edge = p - 1;
    const int per_int = (p - 1) * (p - 2) / 2;
    ndof_ = V_count + per_edge * E_count + per_int * mesh.n_triangles();
    dof_coords_.assign(ndof_, Vec2{});

    tri_dofs_.resize(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        AffineMap map = mesh.affine_map(t);
        std::vector<int>& dofs = tri_dofs_[t];
        dofs.resize(local_ndof());
        for (int i = 0; i < 3; ++i) dofs[i] = tri[i];
        int local = 3;
        for (int side = 0; side < 3; ++side) {
            int e = mesh.triangle_edges(t)[side];
            const MeshEdge& edge = mesh.edges()[e];
            bool forward = (edge.v0 == tri[side]);
            for (int k = 0; k < per_edge; ++k, ++local) {
                int slot = forward ? k : per_edge - 1 - k;
                dofs[local] = V_count + e * per_edge + slot;
            }
        }
        int base = V_count + E_count * per_edge + t * per_int;
        for (int k = 0; k < per_int; ++k, ++local) dofs[local] = base + k;
        for (int i = 0; i < local_ndof(); ++i) dof_coords_[dofs[i]] = map.apply(ref_nodes_[i]);
    }
}

void LagrangeSpace::eval_ref(Vec2 ref, std::vector<double>* values, std::vector<Cov2>* grads,
                             std::vector<SymMat2>* hessians) const {
    const int n = local_ndof();
    const int nm = static_cast<int>(monomials_.size());
    std::vector<double> mv(nm), mdx(nm), mdy(nm), mdxx(nm), mdxy(nm), mdyy(nm);
    for (int j = 0; j < nm; ++j) {
        int a = monomials_[j][0], b = monomials_[j][1];
        double xa = ipow(ref.x, a), yb = ipow(ref.y, b);
        mv[j] = xa * yb;
        mdx[j] = a > 0 ? a * ipow(ref.x, a - 1) * yb : 0.0;
        mdy[j] = b > 0 ? xa * b * ipow(ref.y, b - 1) : 0.0;
        if (hessians) {
            mdxx[j] = a > 1 ? a * (a - 1) * ipow(ref.x, a - 2) * yb : 0.0;
            mdxy[j] = (a > 0 && b > 0) ? a * b * ipow(ref.x, a - 1) * ipow(ref.y, b - 1) : 0.0;
            mdyy[j] = b > 1 ? xa * b * (b - 1) * ipow(ref.y, b - 2) : 0.0;
        }
    }
    if (values) values->assign(n, 0.0);
    if (grads) grads->assign(n, Cov2{});
    if (hessians) hessians->assign(n, SymMat2{});
    for (int i = 0; i < n; ++i) {
        const std::vector<double>& c = nodal_coeffs_[i];
        double v = 0, gx = 0, gy = 0, hxx = 0, hxy = 0, hyy = 0;
        for (int j = 0; j < nm; ++j) {
            v += c[j] * mv[j];
            gx += c[j] * mdx[j];
            gy += c[j] * mdy[j];
            if (hessians) {
                hxx += c[j] * mdxx[j];
                hxy += c[j] * mdxy[j];
                hyy += c[j] * mdyy[j];
            }
        }
        if (values) (*values)[i] = v;
        if (grads) (*grads)[i] = {gx, gy};
        if (hessians) (*hessians)[i] = {hxx, hxy, hyy};
    }
}

double ScalarField::value(int tri, Vec2 p) const {
    AffineMap map = space->mesh().affine_map(tri);
    std::vector<double> vals;
    space->eval_ref(map.pull_back(p), &vals, nullptr, nullptr);
    const auto& dofs = space->tri_dofs(tri);
    double acc = 0.0;
    for (size_t i = 0; i < vals.size(); ++i) acc += coeffs[dofs[i]] * vals[i];
    return acc;
}

Cov2 ScalarField::gradient(int tri, Vec2 p) const {
    AffineMap map = space->mesh().affine_map(tri);
    std::vector<Cov2> grads;
    space->eval_ref(map.pull_back(p), nullptr, &grads, nullptr);
    const auto& dofs = space->tri_dofs(tri);
    Cov2 acc;
    for (size_t i = 0; i < grads.size(); ++i) acc = acc + coeffs[dofs[i]] * map.push_gradient(grads[i]);
    return acc;
}

SymMat2 ScalarField::chart_hessian(int tri, Vec2 p) const {
    AffineMap map = space->mesh().affine_map(tri);
    std::vector<SymMat2> hess;
    space->eval_ref(map.pull_back(p), nullptr, nullptr, &hess);
    const auto& dofs = space->tri_dofs(tri);

    // H_chart = B^{-T} H_ref B^{-1} (affine map: no second-order terms).
    double d = map.det();
    double i11 = map.b22 / d, i12 = -map.b12 / d, i21 = -map.b21 / d, i22 = map.b11 / d;
    SymMat2 acc;
    for (size_t i = 0; i < hess.size(); ++i) {
        const SymMat2& H = hess[i];
        double c = coeffs[dofs[i]];
        // rows of B^{-1} are (i11 i12), (i21 i22); chart H = Binv^T H Binv.
        double h11 = i11 * (H.a11 * i11 + H.a12 * i21) + i21 * (H.a12 * i11 + H.a22 * i21);
        double h12 = i11 * (H.a11 * i12 + H.a12 * i22) + i21 * (H.a12 * i12 + H.a22 * i22);
        double h22 = i12 * (H.a11 * i12 + H.a12 * i22) + i22 * (H.a12 * i12 + H.a22 * i22);
        acc = acc + c * SymMat2{h11, h12, h22};
    }
    return acc;
}

Eigen::SparseMatrix<double> assemble_stiffness(const LagrangeSpace& space, const MetricField& g,
                                               const QuadSpec& quad) {
    const Mesh& mesh = space.mesh();
    const auto& rule = triangle_rule(quad.tri_degree);
    const int nl = space.local_ndof();

    std::vector<std::vector<Cov2>> ref_grads(rule.size());
    for (size_t q = 0; q < rule.size(); ++q)
        space.eval_ref({rule[q].x, rule[q].y}, nullptr, &ref_grads[q], nullptr);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(mesh.n_triangles()) * nl * nl);
    std::vector<Cov2> chart_grads(nl);
    Eigen::MatrixXd local(nl, nl);

    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        local.setZero();
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec2 p = map.apply({rule[q].x, rule[q].y});
            SymMat2 G = g.sample(t, p, 0).G;
            if (!G.spd())
                throw Error("fem: metric is not positive definite at a quadrature point of "
                            "triangle " + std::to_string(t));
            SymMat2 Ginv = G.inverse();
            double w = rule[q].w * map.det() * std::sqrt(G.det());
            for (int i = 0; i < nl; ++i) chart_grads[i] = map.push_gradient(ref_grads[q][i]);
            for (int i = 0; i < nl; ++i) {
                Vec2 gi = Ginv.apply({chart_grads[i].x, chart_grads[i].y});
                for (int j = 0; j <= i; ++j) {
                    double v = w * (gi.x * chart_grads[j].x + gi.y * chart_grads[j].y);
                    local(i, j) += v;
                }
            }
        }
        const auto& dofs = space.tri_dofs(t);
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j) {
                double v = j <= i ? local(i, j) : local(j, i);
                trips.emplace_back(dofs[i], dofs[j], v);
            }
    }

    Eigen::SparseMatrix<double> A(space.ndof(), space.ndof());
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

Eigen::VectorXd assemble_volume_functional(const LagrangeSpace& space, const MetricField& g,
                                           const QuadSpec& quad) {
    const Mesh& mesh = space.mesh();
    const auto& rule = triangle_rule(quad.tri_degree);
    const int nl = space.local_ndof();

    std::vector<std::vector<double>> ref_vals(rule.size());
    for (size_t q = 0; q < rule.size(); ++q)
        space.eval_ref({rule[q].x, rule[q].y}, &ref_vals[q], nullptr, nullptr);

    Eigen::VectorXd m = Eigen::VectorXd::Zero(space.ndof());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        const auto& dofs = space.tri_dofs(t);
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec2 p = map.apply({rule[q].x, rule[q].y});
            double w = rule[q].w * map.det() * volume_density(g.sample(t, p, 0).G);
            for (int i = 0; i < nl; ++i) m(dofs[i]) += w * ref_vals[q][i];
        }
    }
    return m;
}

SolveResult solve_constrained(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& m,
                              const Eigen::VectorXd& F, const LagrangeSpace& space,
                              SolverKind kind, double compat_tol) {
    const int n = static_cast<int>(F.size());
    double f_dot_one = F.sum();
    double f_l1 = F.lpNorm<1>();
    if (f_l1 > 0.0 && std::abs(f_dot_one) > compat_tol * f_l1)
        throw Error("fem: compatibility violated: |F . 1| = " + std::to_string(std::abs(f_dot_one)) +
                    " exceeds " + std::to_string(compat_tol) + " * |F|_1; the discrete "
                    "Gauss-Bonnet identity for the right-hand side does not hold");

    SolveResult out;
    out.u.space = &space;

    if (kind == SolverKind::Direct) {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(A.nonZeros() + 2 * n);
        for (int k = 0; k < A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                   it.value());
        for (int i = 0; i < n; ++i) {
            trips.emplace_back(i, n, m(i));
            trips.emplace_back(n, i, m(i));
        }
        Eigen::SparseMatrix<double> B(n + 1, n + 1);
        B.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(B);
        if (lu.info() != Eigen::Success) throw Error("fem: sparse factorization failed");
        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = F;
        rhs(n) = 0.0;
        Eigen::VectorXd sol = lu.solve(rhs);
        out.u.coeffs = sol.head(n);
        out.lambda = sol(n);
    } else {
        // CG on the m-orthogonal complement: P A P with P = I - m m^T / (m.m).
        double mm = m.squaredNorm();
        auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
            return v - (m.dot(v) / mm) * m;
        };
        Eigen::VectorXd b = project(F);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd r = b;
        Eigen::VectorXd p = r;
        double rr = r.squaredNorm();
        double tol2 = 1e-24 * std::max(b.squaredNorm(), 1e-300);
        int it = 0;
        for (; it < 10 * n && rr > tol2; ++it) {
            Eigen::VectorXd Ap = project(A * project(p));
            double alpha = rr / p.dot(Ap);
            if (!std::isfinite(alpha)) throw Error("fem: CG breakdown");
            x += alpha * p;
            r -= alpha * Ap;
            double rr_new = r.squaredNorm();
            p = r + (rr_new / rr) * p;
            rr = rr_new;
        }
        out.u.coeffs = project(x);
        out.iterations = it;
        out.lambda = m.dot(F - A * out.u.coeffs) / mm;
    }

    Eigen::VectorXd res = A * out.u.coeffs + out.lambda * m - F;
    double scale = std::max(F.lpNorm<Eigen::Infinity>(), 1e-300);
    out.residual = res.lpNorm<Eigen::Infinity>() / scale;
    return out;
}

GradErrorResult l2_error_grad(const ScalarField& u, const std::function<Cov2(double, double)>& alpha,
                              const AnalyticMetric& g, const QuadSpec& quad) {
    const LagrangeSpace& space = *u.space;
    const Mesh& mesh = space.mesh();
    const auto& rule = triangle_rule(quad.tri_degree);
    const int nl = space.local_ndof();

    std::vector<std::vector<Cov2>> ref_grads(rule.size());
    for (size_t q = 0; q < rule.size(); ++q)
        space.eval_ref({rule[q].x, rule[q].y}, nullptr, &ref_grads[q], nullptr);

    double err2 = 0.0, den2 = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        const auto& dofs = space.tri_dofs(t);
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec2 p = map.apply({rule[q].x, rule[q].y});
            SymMat2 G = g.eval(p.x, p.y).G;
            double w = rule[q].w * map.det() * std::sqrt(G.det());

            Cov2 du;
            for (int i = 0; i < nl; ++i)
                du = du + u.coeffs[dofs[i]] * map.push_gradient(ref_grads[q][i]);
            Cov2 a = alpha(p.x, p.y);
            Cov2 target = kGradFromAlphaSign * hodge_star(G, a);
            Cov2 diff = du - target;

            Vec2 sharp_diff = G.solve({diff.x, diff.y});
            Vec2 sharp_a = G.solve({a.x, a.y});
            err2 += w * (diff.x * sharp_diff.x + diff.y * sharp_diff.y);
            den2 += w * (a.x * sharp_a.x + a.y * sharp_a.y);
        }
    }

    GradErrorResult out;
    out.abs = std::sqrt(std::max(err2, 0.0));
    if (den2 <= 0.0) {
        out.zero_denominator = true;
        out.rel = out.abs;
    } else {
        out.rel = out.abs / std::sqrt(den2);
    }
    return out;
}

}  // namespace rc
