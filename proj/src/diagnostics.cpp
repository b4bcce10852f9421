#include "rc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rc {

namespace {

// Sample points of a triangle in reference coordinates: quadrature nodes
// plus vertices and edge midpoints, so extremes at corners are seen.
std::vector<Vec2> sample_points(int degree) {
    std::vector<Vec2> pts;
    for (const TrianglePoint& qp : triangle_rule(degree)) pts.push_back({qp.x, qp.y});
    pts.push_back({0.0, 0.0});
    pts.push_back({1.0, 0.0});
    pts.push_back({0.0, 1.0});
    pts.push_back({0.5, 0.0});
    pts.push_back({0.5, 0.5});
    pts.push_back({0.0, 0.5});
    return pts;
}

struct Mat2 {
    double m11, m12, m21, m22;

    static Mat2 from_sym(const SymMat2& s) { return {s.a11, s.a12, s.a12, s.a22}; }

    Mat2 operator*(const Mat2& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }
    Mat2 operator-(const Mat2& o) const {
        return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22};
    }
    double trace() const { return m11 + m22; }

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    // Largest singular value.
    double norm2() const {
        double a = m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22;
        double d = m11 * m22 - m12 * m21;
        double disc = std::sqrt(std::max(a * a - 4.0 * d * d, 0.0));
        return std::sqrt(0.5 * (a + disc));
    }
};

// Hodge star on 1-forms as a matrix on covector components.
Mat2 star_matrix(const SymMat2& G) {
    SymMat2 inv = G.inverse();
    double vol = std::sqrt(G.det());
    Mat2 ginv = Mat2::from_sym(inv);
    Mat2 J{0.0, -1.0, 1.0, 0.0};
    Mat2 s = J * ginv;
    return {vol * s.m11, vol * s.m12, vol * s.m21, vol * s.m22};
}

// Jh = star_h^{-1} star; on 1-forms in 2D star^{-1} = -star.
Mat2 jh_matrix(const SymMat2& G, const SymMat2& Gh) {
    Mat2 sh = star_matrix(Gh);
    Mat2 s = star_matrix(G);
    Mat2 m = sh * s;
    return {-m.m11, -m.m12, -m.m21, -m.m22};
}

// Operator norm of M on covectors measured in the Gh dual norm.
double covector_op_norm(const Mat2& M, const SymMat2& Gh) {
    SymMat2 inv = Gh.inverse();
    double r11 = std::sqrt(inv.a11);
    double r12 = inv.a12 / r11;
    double r22 = std::sqrt(inv.a22 - r12 * r12);
    Mat2 R{r11, r12, 0.0, r22};
    Mat2 Rinv{1.0 / r11, -r12 / (r11 * r22), 0.0, 1.0 / r22};
    return (R * M * Rinv).norm2();
}

double tensor_inner(const SymMat2& G, const SymMat2& A, const SymMat2& B) {
    Mat2 ginv = Mat2::from_sym(G.inverse());
    Mat2 m = ginv * Mat2::from_sym(A) * ginv * Mat2::from_sym(B);
    return m.trace();
}

double metric_trace(const SymMat2& G, const SymMat2& S) {
    SymMat2 inv = G.inverse();
    return inv.a11 * S.a11 + 2.0 * inv.a12 * S.a12 + inv.a22 * S.a22;
}

Vec2 outward_euclid_normal_of(const Mesh& mesh, int tri, int edge) {
    const MeshEdge& e = mesh.edges()[edge];
    Vec2 p0 = mesh.vertex(e.v0), p1 = mesh.vertex(e.v1);
    Vec2 d = p1 - p0;
    Vec2 n{d.y, -d.x};
    int opp = -1;
    for (int v : mesh.triangle(tri))
        if (v != e.v0 && v != e.v1) opp = v;
    if (n.dot(mesh.vertex(opp) - 0.5 * (p0 + p1)) > 0.0) n = -1.0 * n;
    return n / n.norm();
}

}  // namespace

QualityReport quality_report(const Mesh& mesh, const MetricField& g, const MetricField& gh,
                             double h_nominal) {
    QualityReport rep;
    rep.per_triangle.resize(mesh.n_triangles());
    std::vector<Vec2> ref_pts = sample_points(10);

    double min_rho = 1e300;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        SymMat2 ref = map.reference_metric();
        TriangleQuality& q = rep.per_triangle[t];
        double sup_gh_ref = 0.0, sup_ref_gh = 0.0;
        double sup_vol_gh_ref = 0.0, sup_vol_ref_gh = 0.0;
        for (const Vec2& rp : ref_pts) {
            Vec2 p = map.apply(rp);
            SymMat2 G = g.sample(t, p, 0).G;
            SymMat2 Gh = gh.sample(t, p, 0).G;
            if (!G.spd() || !Gh.spd())
                throw Error("diagnostics: non-SPD metric sample in quality report");
            sup_gh_ref = std::max(sup_gh_ref, quasi_isometry_ratio(Gh, ref));
            sup_ref_gh = std::max(sup_ref_gh, quasi_isometry_ratio(ref, Gh));
            double vol_ratio = std::sqrt(Gh.det() / ref.det());
            sup_vol_gh_ref = std::max(sup_vol_gh_ref, vol_ratio);
            sup_vol_ref_gh = std::max(sup_vol_ref_gh, 1.0 / vol_ratio);
            q.C_g_gh = std::max(q.C_g_gh, quasi_isometry_ratio(G, Gh));
            q.C_gh_g = std::max(q.C_gh_g, quasi_isometry_ratio(Gh, G));
            rep.D_g_gh = std::max(rep.D_g_gh, std::sqrt(G.det() / Gh.det()));
            rep.D_gh_g = std::max(rep.D_gh_g, std::sqrt(Gh.det() / G.det()));
            rep.metric_gap_inf = std::max(rep.metric_gap_inf, metric_gap(Gh, G));
        }
        q.h_T = sup_gh_ref;
        q.rho = 1.0 / sup_ref_gh;
        q.ratio = q.h_T / q.rho;
        q.Kv = sup_vol_gh_ref * sup_vol_ref_gh;
        rep.K = std::max(rep.K, q.ratio);
        rep.K_V = std::max(rep.K_V, q.Kv);
        rep.C_g_gh = std::max(rep.C_g_gh, q.C_g_gh);
        rep.C_gh_g = std::max(rep.C_gh_g, q.C_gh_g);
        min_rho = std::min(min_rho, q.rho);
    }
    rep.K_prime = h_nominal / min_rho;
    return rep;
}

JhReport jh_report(const MetricField& g, const MetricField& gh, const Mesh& mesh,
                   int sample_degree, int pairs, uint64_t seed) {
    JhReport rep;
    std::vector<Vec2> ref_pts = sample_points(sample_degree);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        for (const Vec2& rp : ref_pts) {
            Vec2 p = map.apply(rp);
            SymMat2 G = g.sample(t, p, 0).G;
            SymMat2 Gh = gh.sample(t, p, 0).G;
            if (!G.spd() || !Gh.spd()) throw Error("diagnostics: non-SPD metric sample");
            Mat2 dev = Mat2::identity() - jh_matrix(G, Gh);
            rep.sup_deviation = std::max(rep.sup_deviation, covector_op_norm(dev, Gh));
        }
    }

    // Adjointness: <u, v>_{L2, g} equals <u, Jh v>_{L2, gh} pointwise by the
    // defining identity; integrate random piecewise-linear covector fields
    // with a shared rule and compare.
    std::mt19937_64 rng(seed);
    auto coef = [&rng]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
    const auto& rule = triangle_rule(8);
    for (int pair = 0; pair < pairs; ++pair) {
        double lhs = 0.0, rhs = 0.0;
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            AffineMap map = mesh.affine_map(t);
            double ax = coef(), bx = coef(), cx = coef(), ay = coef(), by = coef(), cy = coef();
            double dx = coef(), ex = coef(), fx = coef(), dy = coef(), ey = coef(), fy = coef();
            for (const TrianglePoint& qp : rule) {
                Vec2 p = map.apply({qp.x, qp.y});
                Cov2 u{ax + bx * qp.x + cx * qp.y, ay + by * qp.x + cy * qp.y};
                Cov2 v{dx + ex * qp.x + fx * qp.y, dy + ey * qp.x + fy * qp.y};
                SymMat2 G = g.sample(t, p, 0).G;
                SymMat2 Gh = gh.sample(t, p, 0).G;
                Mat2 jh = jh_matrix(G, Gh);
                Cov2 jv{jh.m11 * v.x + jh.m12 * v.y, jh.m21 * v.x + jh.m22 * v.y};
                double w = qp.w * map.det();

                Vec2 sharp_g = G.solve({v.x, v.y});
                lhs += w * std::sqrt(G.det()) * (u.x * sharp_g.x + u.y * sharp_g.y);
                Vec2 sharp_h = Gh.solve({jv.x, jv.y});
                rhs += w * std::sqrt(Gh.det()) * (u.x * sharp_h.x + u.y * sharp_h.y);
            }
        }
        rep.adjoint_residual =
            std::max(rep.adjoint_residual, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    return rep;
}

double assemble_bh(const MetricField& g, const MetricField& sigma, const ScalarField& v,
                   const QuadSpec& quad) {
    const Mesh& mesh = v.space->mesh();
    double total = 0.0;

    const auto& rule = triangle_rule(quad.tri_degree);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        for (const TrianglePoint& qp : rule) {
            Vec2 p = map.apply({qp.x, qp.y});
            MetricSample ms = g.sample(t, p, 1);
            SymMat2 S = sigma.sample(t, p, 0).G;
            SymMat2 Ssharp = S - metric_trace(ms.G, S) * ms.G;

            Christoffel gamma = christoffel(ms);
            Cov2 grad = v.gradient(t, p);
            SymMat2 hess = v.chart_hessian(t, p);
            SymMat2 cov_hess;
            cov_hess.a11 = hess.a11 - gamma[0][0][0] * grad.x - gamma[1][0][0] * grad.y;
            cov_hess.a12 = hess.a12 - gamma[0][0][1] * grad.x - gamma[1][0][1] * grad.y;
            cov_hess.a22 = hess.a22 - gamma[0][1][1] * grad.x - gamma[1][1][1] * grad.y;

            double w = qp.w * map.det() * std::sqrt(ms.G.det());
            total += w * tensor_inner(ms.G, Ssharp, cov_hess);
        }
    }

    const GaussRule& gl = gauss_legendre(quad.edge_points);
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& edge = mesh.edges()[e];
        Vec2 p0 = mesh.vertex(edge.v0), p1 = mesh.vertex(edge.v1);
        double L = (p1 - p0).norm();
        Vec2 dir = (p1 - p0) / L;
        for (size_t q = 0; q < gl.nodes.size(); ++q) {
            Vec2 p = p0 + (gl.nodes[q] * L) * dir;
            // sigma(tau, tau) and ds are continuous across the edge; the
            // normal-derivative pairing sums the outward contributions.
            SymMat2 G0 = g.sample(edge.tri[0], p, 0).G;
            double stt = sigma.sample(edge.tri[0], p, 0).G(dir, dir) / G0(dir, dir);
            double ds = std::sqrt(G0(dir, dir));
            double jump = 0.0;
            for (int side = 0; side < edge.n_tri; ++side) {
                int t = edge.tri[side];
                SymMat2 G = g.sample(t, p, 0).G;
                Vec2 n = outward_euclid_normal_of(mesh, t, e);
                Vec2 w = n - (G(n, dir) / G(dir, dir)) * dir;
                Vec2 nh = w / std::sqrt(G(w, w));
                jump += v.gradient(t, p).apply(nh);
            }
            total -= gl.weights[q] * L * ds * (-stt) * jump;
        }
    }
    return total;
}

ShapeDerivativeResult shape_derivative_check(const AnalyticMetric& g, const MetricField& gh,
                                             const ScalarField& v, double t, double dt,
                                             const QuadSpec& quad) {
    AnalyticField gf(g);
    const LagrangeSpace& space = *v.space;

    auto F_at = [&](double tv) {
        LinCombField blend(tv, gh, 1.0 - tv, gf);
        Eigen::VectorXd F = rhs_functional(g, blend, space, quad);
        return F.dot(v.coeffs);
    };

    ShapeDerivativeResult out;
    out.fd_derivative = (F_at(t + dt) - F_at(t - dt)) / (2.0 * dt);
    LinCombField path(t, gh, 1.0 - t, gf);
    LinCombField sigma(1.0, gh, -1.0, gf);
    out.bh_value = assemble_bh(path, sigma, v, quad);
    out.residual = std::abs(out.fd_derivative + 0.5 * out.bh_value);
    return out;
}

std::vector<double> trace_ratio_report(const LagrangeSpace& space, const MetricField& gh,
                                       const QuadSpec& quad) {
    const Mesh& mesh = space.mesh();
    const int nl = space.local_ndof();
    const auto& rule = triangle_rule(quad.tri_degree);
    const GaussRule& gl = gauss_legendre(quad.edge_points);
    std::vector<Vec2> ref_pts = sample_points(10);

    std::vector<double> out(mesh.n_triangles(), 0.0);
    std::vector<double> vals;
    std::vector<Cov2> grads;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        SymMat2 ref = map.reference_metric();

        double sup_gh_ref = 0.0, sup_ref_gh = 0.0;
        for (const Vec2& rp : ref_pts) {
            SymMat2 Gh = gh.sample(t, map.apply(rp), 0).G;
            sup_gh_ref = std::max(sup_gh_ref, quasi_isometry_ratio(Gh, ref));
            sup_ref_gh = std::max(sup_ref_gh, quasi_isometry_ratio(ref, Gh));
        }
        double h_T = sup_gh_ref, rho = 1.0 / sup_ref_gh;

        std::vector<double> vol_l2(nl, 0.0), grad_l2(nl, 0.0), bdry_l2(nl, 0.0);
        for (const TrianglePoint& qp : rule) {
            Vec2 p = map.apply({qp.x, qp.y});
            SymMat2 G = gh.sample(t, p, 0).G;
            SymMat2 Ginv = G.inverse();
            double w = qp.w * map.det() * std::sqrt(G.det());
            space.eval_ref({qp.x, qp.y}, &vals, &grads, nullptr);
            for (int i = 0; i < nl; ++i) {
                vol_l2[i] += w * vals[i] * vals[i];
                Cov2 gchart = map.push_gradient(grads[i]);
                Vec2 sharp = Ginv.apply({gchart.x, gchart.y});
                grad_l2[i] += w * (gchart.x * sharp.x + gchart.y * sharp.y);
            }
        }
        for (int side = 0; side < 3; ++side) {
            int e = mesh.triangle_edges(t)[side];
            const MeshEdge& edge = mesh.edges()[e];
            Vec2 p0 = mesh.vertex(edge.v0), p1 = mesh.vertex(edge.v1);
            double L = (p1 - p0).norm();
            Vec2 dir = (p1 - p0) / L;
            for (size_t q = 0; q < gl.nodes.size(); ++q) {
                Vec2 p = p0 + (gl.nodes[q] * L) * dir;
                SymMat2 G = gh.sample(t, p, 0).G;
                double w = gl.weights[q] * L * std::sqrt(G(dir, dir));
                space.eval_ref(map.pull_back(p), &vals, nullptr, nullptr);
                for (int i = 0; i < nl; ++i) bdry_l2[i] += w * vals[i] * vals[i];
            }
        }
        for (int i = 0; i < nl; ++i) {
            double denom = std::sqrt(vol_l2[i]) / std::sqrt(rho) +
                           std::sqrt(h_T) * std::sqrt(grad_l2[i]);
            if (denom > 0.0) out[t] = std::max(out[t], std::sqrt(bdry_l2[i]) / denom);
        }
    }
    return out;
}

std::vector<double> inverse_ratio_report(const LagrangeSpace& space, const MetricField& gh,
                                         const QuadSpec& quad) {
    const Mesh& mesh = space.mesh();
    const int nl = space.local_ndof();
    const auto& rule = triangle_rule(quad.tri_degree);
    std::vector<Vec2> ref_pts = sample_points(10);

    std::vector<double> out(mesh.n_triangles(), 0.0);
    std::vector<double> vals;
    std::vector<Cov2> grads;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        SymMat2 ref = map.reference_metric();
        double sup_ref_gh = 0.0;
        for (const Vec2& rp : ref_pts)
            sup_ref_gh = std::max(sup_ref_gh,
                                  quasi_isometry_ratio(ref, gh.sample(t, map.apply(rp), 0).G));
        double rho = 1.0 / sup_ref_gh;

        std::vector<double> vol_l2(nl, 0.0), grad_l2(nl, 0.0);
        for (const TrianglePoint& qp : rule) {
            Vec2 p = map.apply({qp.x, qp.y});
            SymMat2 G = gh.sample(t, p, 0).G;
            SymMat2 Ginv = G.inverse();
            double w = qp.w * map.det() * std::sqrt(G.det());
            space.eval_ref({qp.x, qp.y}, &vals, &grads, nullptr);
            for (int i = 0; i < nl; ++i) {
                vol_l2[i] += w * vals[i] * vals[i];
                Cov2 gchart = map.push_gradient(grads[i]);
                Vec2 sharp = Ginv.apply({gchart.x, gchart.y});
                grad_l2[i] += w * (gchart.x * sharp.x + gchart.y * sharp.y);
            }
        }
        for (int i = 0; i < nl; ++i)
            if (vol_l2[i] > 0.0)
                out[t] = std::max(out[t], rho * std::sqrt(grad_l2[i] / vol_l2[i]));
    }
    return out;
}

}  // namespace rc
