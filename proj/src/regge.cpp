#include "rc/regge.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rc {

namespace {

// Legendre P_i mapped to [0, L] and normalized to unit L2 norm there.
double edge_legendre(int i, double s, double L) {
    double x = 2.0 * s / L - 1.0;
    double p0 = 1.0, p1 = x;
    if (i == 0) return std::sqrt(1.0 / L);
    for (int k = 2; k <= i; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return std::sqrt((2.0 * i + 1.0) / L) * p1;
}

// sigma(d, d) for the component basis matrices e11, e12, e22.
double tangent_pairing(int comp, Vec2 d) {
    switch (comp) {
        case 0: return d.x * d.x;
        case 1: return 2.0 * d.x * d.y;
        default: return d.y * d.y;
    }
}

double ipow(double base, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= base;
    return r;
}

struct TriFrame {
    Vec2 centroid;
    double scale;
};

TriFrame tri_frame(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangle(t);
    Vec2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
    return {{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0}, mesh.chart_diameter(t)};
}

// Local interpolation matrix: rows are dof functionals (3 sides x (r+1) edge
// moments, then interior moments), columns the monomial-component basis.
Eigen::MatrixXd local_matrix(const Mesh& mesh, const ReggeSpace& space, int t,
                             const TriFrame& frame) {
    const int r = space.degree();
    const int nmono = space.n_monomials();
    const int n = 3 * nmono;
    const auto& monos = space.monomials();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);

    const GaussRule& gl = gauss_legendre(r + 2);
    int row = 0;
    for (int side = 0; side < 3; ++side) {
        int e = mesh.triangle_edges(t)[side];
        const MeshEdge& edge = mesh.edges()[e];
        Vec2 p0 = mesh.vertex(edge.v0), p1 = mesh.vertex(edge.v1);
        double L = (p1 - p0).norm();
        Vec2 d = (p1 - p0) / L;
        for (int mom = 0; mom < r + 1; ++mom, ++row) {
            for (size_t q = 0; q < gl.nodes.size(); ++q) {
                double s = gl.nodes[q] * L;
                double w = gl.weights[q] * L;
                Vec2 p = p0 + s * d;
                double xi = (p.x - frame.centroid.x) / frame.scale;
                double eta = (p.y - frame.centroid.y) / frame.scale;
                double leg = edge_legendre(mom, s, L);
                for (int k = 0; k < nmono; ++k) {
                    double mval = ipow(xi, monos[k][0]) * ipow(eta, monos[k][1]);
                    for (int c = 0; c < 3; ++c)
                        M(row, 3 * k + c) += w * leg * mval * tangent_pairing(c, d);
                }
            }
        }
    }

    if (r >= 1) {
        const auto& rule = triangle_rule(2 * r);
        AffineMap map = mesh.affine_map(t);
        double area = 0.5 * map.det();
        for (int mi = 0; mi < nmono; ++mi) {
            if (monos[mi][0] + monos[mi][1] > r - 1) continue;
            for (int c = 0; c < 3; ++c, ++row) {
                for (const TrianglePoint& qp : rule) {
                    Vec2 p = map.apply({qp.x, qp.y});
                    double w = qp.w * map.det() / area;
                    double xi = (p.x - frame.centroid.x) / frame.scale;
                    double eta = (p.y - frame.centroid.y) / frame.scale;
                    double test = ipow(xi, monos[mi][0]) * ipow(eta, monos[mi][1]);
                    for (int k = 0; k < nmono; ++k) {
                        double mval = ipow(xi, monos[k][0]) * ipow(eta, monos[k][1]);
                        M(row, 3 * k + c) += w * test * mval;
                    }
                }
            }
        }
    }
    return M;
}

}  // namespace

ReggeSpace::ReggeSpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree) {
    if (degree < 0) throw Error("regge: degree must be nonnegative");
    interior_per_tri_ = 3 * (degree * (degree + 1)) / 2;
    interior_offset_ = (degree + 1) * mesh.n_edges();
    ndof_ = interior_offset_ + interior_per_tri_ * mesh.n_triangles();
    for (int total = 0; total <= degree; ++total)
        for (int a = total; a >= 0; --a) monomials_.push_back({a, total - a});
}

ReggeMetric::ReggeMetric(const ReggeSpace& space) : space_(&space) {
    const Mesh& mesh = space.mesh();
    coeffs_.resize(mesh.n_triangles());
    centroids_.resize(mesh.n_triangles());
    scales_.resize(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        coeffs_[t].assign(3 * space.n_monomials(), 0.0);
        TriFrame f = tri_frame(mesh, t);
        centroids_[t] = f.centroid;
        scales_[t] = f.scale;
    }
}

MetricSample ReggeMetric::sample(int tri, Vec2 p, int deriv_order) const {
    const auto& monos = space_->monomials();
    const std::vector<double>& c = coeffs_[tri];
    double inv_scale = 1.0 / scales_[tri];
    double xi = (p.x - centroids_[tri].x) * inv_scale;
    double eta = (p.y - centroids_[tri].y) * inv_scale;

    MetricSample s;
    s.order = std::min(deriv_order, 2);
    for (size_t k = 0; k < monos.size(); ++k) {
        int a = monos[k][0], b = monos[k][1];
        SymMat2 C{c[3 * k], c[3 * k + 1], c[3 * k + 2]};
        double xa = ipow(xi, a), yb = ipow(eta, b);
        s.G = s.G + xa * yb * C;
        if (deriv_order >= 1) {
            double dxa = a > 0 ? a * ipow(xi, a - 1) : 0.0;
            double dyb = b > 0 ? b * ipow(eta, b - 1) : 0.0;
            s.dG[0] = s.dG[0] + (dxa * yb * inv_scale) * C;
            s.dG[1] = s.dG[1] + (xa * dyb * inv_scale) * C;
            if (deriv_order >= 2) {
                double d2xa = a > 1 ? a * (a - 1) * ipow(xi, a - 2) : 0.0;
                double d2yb = b > 1 ? b * (b - 1) * ipow(eta, b - 2) : 0.0;
                double is2 = inv_scale * inv_scale;
                s.d2G[0] = s.d2G[0] + (d2xa * yb * is2) * C;
                s.d2G[1] = s.d2G[1] + (dxa * dyb * is2) * C;
                s.d2G[2] = s.d2G[2] + (xa * d2yb * is2) * C;
            }
        }
    }
    return s;
}

ReggeMetric interpolate_metric(const ReggeSpace& space, const MetricField& g,
                               const QuadSpec& quad) {
    const Mesh& mesh = space.mesh();
    const int r = space.degree();
    const auto& monos = space.monomials();

    // Edge moments of g(tau, tau), evaluated once per edge from its first
    // adjacent triangle; sharing the values is what makes the interpolant
    // tt-continuous.
    const GaussRule& gl = gauss_legendre(std::max(quad.edge_points, r + 2));
    std::vector<double> edge_dofs(static_cast<size_t>(mesh.n_edges()) * (r + 1), 0.0);
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& edge = mesh.edges()[e];
        Vec2 p0 = mesh.vertex(edge.v0), p1 = mesh.vertex(edge.v1);
        double L = (p1 - p0).norm();
        Vec2 d = (p1 - p0) / L;
        int t = edge.tri[0];
        for (size_t q = 0; q < gl.nodes.size(); ++q) {
            double s = gl.nodes[q] * L;
            Vec2 p = p0 + s * d;
            SymMat2 G = g.sample(t, p, 0).G;
            double gtt = G(d, d);
            for (int mom = 0; mom <= r; ++mom)
                edge_dofs[e * (r + 1) + mom] += gl.weights[q] * L * gtt * edge_legendre(mom, s, L);
        }
    }

    ReggeMetric gh(space);
    const auto& rule = triangle_rule(std::max(quad.tri_degree, 2 * r));
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        TriFrame frame{gh.centroid(t), gh.scale(t)};
        Eigen::MatrixXd M = local_matrix(mesh, space, t, frame);
        Eigen::VectorXd rhs(M.rows());

        int row = 0;
        for (int side = 0; side < 3; ++side) {
            int e = mesh.triangle_edges(t)[side];
            for (int mom = 0; mom <= r; ++mom, ++row) rhs(row) = edge_dofs[e * (r + 1) + mom];
        }
        if (r >= 1) {
            AffineMap map = mesh.affine_map(t);
            double area = 0.5 * map.det();
            for (int mi = 0; mi < space.n_monomials(); ++mi) {
                if (monos[mi][0] + monos[mi][1] > r - 1) continue;
                for (int c = 0; c < 3; ++c, ++row) {
                    double acc = 0.0;
                    for (const TrianglePoint& qp : rule) {
                        Vec2 p = map.apply({qp.x, qp.y});
                        double w = qp.w * map.det() / area;
                        double xi = (p.x - frame.centroid.x) / frame.scale;
                        double eta = (p.y - frame.centroid.y) / frame.scale;
                        SymMat2 G = g.sample(t, p, 0).G;
                        double comp = c == 0 ? G.a11 : (c == 1 ? G.a12 : G.a22);
                        acc += w * comp * ipow(xi, monos[mi][0]) * ipow(eta, monos[mi][1]);
                    }
                    rhs(row) = acc;
                }
            }
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
        if (lu.rcond() < 1e-14)
            throw Error("regge: singular local interpolation matrix on triangle " +
                        std::to_string(t));
        Eigen::VectorXd coef = lu.solve(rhs);
        for (int k = 0; k < coef.size(); ++k) gh.coeffs(t)[k] = coef(k);
    }
    return gh;
}

std::vector<TtViolation> check_tt_continuity(const ReggeMetric& gh, double tol,
                                             int samples_per_edge) {
    const Mesh& mesh = gh.space().mesh();
    std::vector<TtViolation> out;
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& edge = mesh.edges()[e];
        if (edge.n_tri != 2) continue;
        Vec2 p0 = mesh.vertex(edge.v0), p1 = mesh.vertex(edge.v1);
        double L = (p1 - p0).norm();
        Vec2 d = (p1 - p0) / L;
        for (int i = 0; i < samples_per_edge; ++i) {
            double s = L * (i + 0.5) / samples_per_edge;
            Vec2 p = p0 + s * d;
            double a = gh.sample(edge.tri[0], p, 0).G(d, d);
            double b = gh.sample(edge.tri[1], p, 0).G(d, d);
            if (std::abs(a - b) > tol) out.push_back({e, s, std::abs(a - b)});
        }
    }
    return out;
}

std::vector<PositivityViolation> check_positivity(const ReggeMetric& gh, const QuadSpec& quad) {
    const Mesh& mesh = gh.space().mesh();
    const auto& rule = triangle_rule(quad.tri_degree);
    std::vector<PositivityViolation> out;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        auto probe = [&](Vec2 p) {
            SymMat2 G = gh.sample(t, p, 0).G;
            double tr = G.trace(), det = G.det();
            double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
            double mineig = 0.5 * (tr - disc);
            if (mineig <= 0.0) out.push_back({t, p, mineig});
        };
        for (const TrianglePoint& qp : rule) probe(map.apply({qp.x, qp.y}));
        for (int v : mesh.triangle(t)) probe(mesh.vertex(v));
    }
    return out;
}

double local_matrix_condition(int degree) {
    std::vector<Vec2> verts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    std::vector<std::array<int, 3>> tris{{0, 1, 2}};
    Mesh mesh = build_topology(std::move(verts), std::move(tris));
    ReggeSpace space(mesh, degree);
    TriFrame frame = tri_frame(mesh, 0);
    Eigen::MatrixXd M = local_matrix(mesh, space, 0, frame);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace rc
