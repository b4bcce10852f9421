#include "rc/curvature.hpp"

#include <cmath>

namespace rc {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Outward Euclidean normal candidate for an edge of a triangle: the rotation
// of the edge direction that points away from the opposite vertex.
Vec2 outward_euclid_normal(const Mesh& mesh, int tri, int edge) {
    const MeshEdge& e = mesh.edges()[edge];
    Vec2 p0 = mesh.vertex(e.v0), p1 = mesh.vertex(e.v1);
    Vec2 d = p1 - p0;
    Vec2 n{d.y, -d.x};
    int opp = -1;
    for (int v : mesh.triangle(tri))
        if (v != e.v0 && v != e.v1) opp = v;
    Vec2 mid = 0.5 * (p0 + p1);
    if (n.dot(mesh.vertex(opp) - mid) > 0.0) n = -1.0 * n;
    return n / n.norm();
}

// G-unit normal with the orientation of the Euclidean candidate m0,
// G-orthogonal to the edge direction d.
Vec2 metric_unit_normal(const SymMat2& G, Vec2 d, Vec2 m0) {
    Vec2 w = m0 - (G(m0, d) / G(d, d)) * d;
    double len = std::sqrt(G(w, w));
    if (!(len > 0.0)) throw Error("curvature: degenerate metric normal");
    return w / len;
}

double reduce_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -M_PI) r += kTwoPi;
    return r;
}

struct EdgeGeometry {
    Vec2 p0, p1;
    Vec2 dir;  // unit Euclidean direction from v0 to v1
    double length;
};

EdgeGeometry edge_geometry(const Mesh& mesh, int edge) {
    const MeshEdge& e = mesh.edges()[edge];
    Vec2 p0 = mesh.vertex(e.v0), p1 = mesh.vertex(e.v1);
    double L = (p1 - p0).norm();
    return {p0, p1, (p1 - p0) / L, L};
}

Vec2 christoffel_accel(const Christoffel& gamma, Vec2 d) {
    Vec2 a;
    double dd[2] = {d.x, d.y};
    for (int i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) acc += gamma[i][j][k] * dd[j] * dd[k];
        (i == 0 ? a.x : a.y) = acc;
    }
    return a;
}

// Basis values of the Lagrange space at a chart point seen from a triangle.
void basis_values_at(const LagrangeSpace& space, int tri, Vec2 p, std::vector<double>* vals) {
    AffineMap map = space.mesh().affine_map(tri);
    space.eval_ref(map.pull_back(p), vals, nullptr, nullptr);
}

}  // namespace

double interior_angle(const MetricField& gh, const Mesh& mesh, int tri, int vertex) {
    const auto& t = mesh.triangle(tri);
    int slot = -1;
    for (int i = 0; i < 3; ++i)
        if (t[i] == vertex) slot = i;
    if (slot < 0) throw Error("curvature: vertex does not belong to triangle");

    Vec2 p = mesh.vertex(vertex);
    Vec2 t1 = mesh.vertex(t[(slot + 1) % 3]) - p;
    Vec2 t2 = mesh.vertex(t[(slot + 2) % 3]) - p;
    SymMat2 G = gh.sample(tri, p, 0).G;
    if (!G.spd()) throw Error("curvature: metric not positive definite at vertex");
    double n1 = std::sqrt(G(t1, t1)), n2 = std::sqrt(G(t2, t2));
    if (n1 == 0.0 || n2 == 0.0) throw Error("curvature: degenerate edge vector at vertex");
    double cosv = G(t1, t2) / (n1 * n2);
    double sinv = std::sqrt(G.det()) * std::abs(t1.cross(t2)) / (n1 * n2);
    return std::atan2(sinv, cosv);
}

double vertex_defect(const MetricField& gh, const Mesh& mesh, int vertex) {
    if (mesh.boundary_vertex(vertex))
        throw Error("curvature: angle defect is defined at interior vertices only");
    double sum = 0.0;
    for (int t : mesh.vertex_triangles(vertex)) sum += interior_angle(gh, mesh, t, vertex);
    return kTwoPi - sum;
}

double geodesic_curvature(const MetricField& gh, const Mesh& mesh, int tri, int edge, double s) {
    bool found = false;
    for (int e : mesh.triangle_edges(tri)) found = found || (e == edge);
    if (!found) throw Error("curvature: edge does not belong to triangle");

    EdgeGeometry geo = edge_geometry(mesh, edge);
    Vec2 p = geo.p0 + s * geo.dir;
    MetricSample ms = gh.sample(tri, p, 1);
    Christoffel gamma = christoffel(ms);
    Vec2 accel = christoffel_accel(gamma, geo.dir);
    Vec2 n_out = metric_unit_normal(ms.G, geo.dir, outward_euclid_normal(mesh, tri, edge));
    return ms.G(accel, n_out) / ms.G(geo.dir, geo.dir);
}

CurvatureBreakdown kda_dist(const MetricField& gh, const LagrangeSpace& space,
                            const QuadSpec& quad, const CurvatureOptions& opts) {
    const Mesh& mesh = space.mesh();
    CurvatureBreakdown out;
    out.triangle = Eigen::VectorXd::Zero(space.ndof());
    out.interior_edge = Eigen::VectorXd::Zero(space.ndof());
    out.interior_vertex = Eigen::VectorXd::Zero(space.ndof());
    out.boundary_edge = Eigen::VectorXd::Zero(space.ndof());
    out.boundary_vertex = Eigen::VectorXd::Zero(space.ndof());

    // Triangle curvature: integral of v K_h dA_h with exact derivatives of gh.
    const auto& rule = triangle_rule(quad.tri_degree);
    std::vector<std::vector<double>> ref_vals(rule.size());
    for (size_t q = 0; q < rule.size(); ++q)
        space.eval_ref({rule[q].x, rule[q].y}, &ref_vals[q], nullptr, nullptr);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        AffineMap map = mesh.affine_map(t);
        const auto& dofs = space.tri_dofs(t);
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec2 p = map.apply({rule[q].x, rule[q].y});
            MetricSample ms = gh.sample(t, p, 2);
            double K = gauss_curvature(ms);
            double w = rule[q].w * map.det() * volume_density(ms.G) * K;
            for (size_t i = 0; i < dofs.size(); ++i)
                out.triangle(dofs[i]) += w * ref_vals[q][i];
        }
    }

    // Interior edges: jump of the inward-normal geodesic curvature, i.e. the
    // negated sum of the outward-normal values from the two sides.
    const GaussRule& gl = gauss_legendre(quad.edge_points);
    std::vector<double> vals;
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& edge = mesh.edges()[e];
        if (edge.n_tri != 2) continue;
        EdgeGeometry geo = edge_geometry(mesh, e);
        for (size_t q = 0; q < gl.nodes.size(); ++q) {
            double s = gl.nodes[q] * geo.length;
            Vec2 p = geo.p0 + s * geo.dir;
            double k_sum = 0.0;
            for (int side = 0; side < 2; ++side)
                k_sum -= geodesic_curvature(gh, mesh, edge.tri[side], e, s);
            double ds_h = std::sqrt(gh.sample(edge.tri[0], p, 0).G(geo.dir, geo.dir));
            double w = gl.weights[q] * geo.length * ds_h * k_sum * opts.interior_jump_sign;
            basis_values_at(space, edge.tri[0], p, &vals);
            const auto& dofs = space.tri_dofs(edge.tri[0]);
            for (size_t i = 0; i < dofs.size(); ++i) out.interior_edge(dofs[i]) += w * vals[i];
        }
    }

    // Interior vertices: angle defects hit the nodal dof at the vertex.
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (mesh.boundary_vertex(v)) continue;
        out.interior_vertex(v) += vertex_defect(gh, mesh, v);
    }

    return out;
}

BoundaryFrameAngle boundary_frame_angle(const AnalyticMetric& g, const Mesh& mesh,
                                        int points_per_edge) {
    if (!g.has_frame()) throw Error("curvature: metric carries no frame data");
    const auto& loop = mesh.boundary_loop();
    const GaussRule& gl = gauss_legendre(points_per_edge);

    BoundaryFrameAngle out;
    out.edges.resize(loop.size());

    for (size_t step = 0; step < loop.size(); ++step) {
        const BoundaryStep& st = loop[step];
        Vec2 a = mesh.vertex(st.from), b = mesh.vertex(st.to);
        double L = (b - a).norm();
        Vec2 dir = (b - a) / L;
        // Outward side is to the right of the ccw traversal direction.
        Vec2 m0{dir.y, -dir.x};

        auto mu_principal = [&](double s) {
            Vec2 p = a + s * dir;
            MetricSample ms = g.eval(p.x, p.y);
            FrameSample fr = g.frame(p.x, p.y);
            double o11 = std::abs(ms.G(fr.e1, fr.e1) - 1.0);
            double o22 = std::abs(ms.G(fr.e2, fr.e2) - 1.0);
            double o12 = std::abs(ms.G(fr.e1, fr.e2));
            if (o11 > 1e-8 || o22 > 1e-8 || o12 > 1e-8)
                throw Error("curvature: frame is not orthonormal for the metric");
            Vec2 n = metric_unit_normal(ms.G, dir, m0);
            return std::atan2(ms.G(n, fr.e2), ms.G(n, fr.e1));
        };

        auto mu_derivative = [&](double s) {
            Vec2 p = a + s * dir;
            MetricSample ms = g.eval(p.x, p.y);
            FrameSample fr = g.frame(p.x, p.y);
            if (!fr.has_derivs) {
                // Centered differences on locally aligned principal values.
                double h = 1e-6 * L;
                double m0v = mu_principal(s);
                double mp = m0v + reduce_angle(mu_principal(std::min(s + h, L)) - m0v);
                double mm = m0v + reduce_angle(mu_principal(std::max(s - h, 0.0)) - m0v);
                double span = std::min(s + h, L) - std::max(s - h, 0.0);
                return (mp - mm) / span;
            }
            SymMat2 A = ms.G;
            SymMat2 Ap = dir.x * ms.dG[0] + dir.y * ms.dG[1];
            Vec2 e1p = dir.x * fr.de1[0] + dir.y * fr.de1[1];
            Vec2 e2p = dir.x * fr.de2[0] + dir.y * fr.de2[1];

            double tAt = A(dir, dir), tApt = Ap(dir, dir);
            double rho = A(m0, dir) / tAt;
            double rho_p = (Ap(m0, dir) * tAt - A(m0, dir) * tApt) / (tAt * tAt);
            Vec2 w = m0 - rho * dir;
            Vec2 wp = -rho_p * dir;
            double qv = A(w, w);
            double qp = 2.0 * A(w, wp) + Ap(w, w);
            double rq = std::sqrt(qv);
            Vec2 n = w / rq;
            Vec2 np = wp / rq - (qp / (2.0 * qv * rq)) * w;

            double c = A(n, fr.e1), sv = A(n, fr.e2);
            double cp = A(np, fr.e1) + Ap(n, fr.e1) + A(n, e1p);
            double sp = A(np, fr.e2) + Ap(n, fr.e2) + A(n, e2p);
            return (sp * c - cp * sv) / (c * c + sv * sv);
        };

        BoundaryFrameAngle::EdgeData data;
        data.edge = st.edge;
        data.from = st.from;
        data.to = st.to;
        data.length = L;
        data.s.push_back(0.0);
        for (size_t q = 0; q < gl.nodes.size(); ++q) data.s.push_back(gl.nodes[q] * L);
        data.s.push_back(L);

        double prev = 0.0;
        for (size_t i = 0; i < data.s.size(); ++i) {
            double principal = mu_principal(data.s[i]);
            double unwrapped;
            if (i == 0) {
                unwrapped = principal;
            } else {
                double delta = reduce_angle(principal - prev);
                if (std::abs(delta) >= 0.95 * M_PI)
                    throw Error("curvature: frame angle unwrap failed; boundary quadrature is "
                                "too coarse on edge " + std::to_string(st.edge));
                unwrapped = prev + delta;
            }
            data.mu.push_back(unwrapped);
            data.dmu.push_back(mu_derivative(data.s[i]));
            prev = unwrapped;
        }
        data.mu_start = data.mu.front();
        data.mu_end = data.mu.back();
        out.edges[step] = std::move(data);
    }

    out.corner_jumps.resize(loop.size());
    for (size_t i = 0; i < loop.size(); ++i) {
        const auto& in = out.edges[i];
        const auto& next = out.edges[(i + 1) % loop.size()];
        out.corner_jumps[i] = reduce_angle(next.mu_start - in.mu_end);
    }
    return out;
}

CurvatureBreakdown alpha_dist(const AnalyticMetric& g, const MetricField& gh,
                              const LagrangeSpace& space, const QuadSpec& quad) {
    const Mesh& mesh = space.mesh();
    CurvatureBreakdown out;
    out.triangle = Eigen::VectorXd::Zero(space.ndof());
    out.interior_edge = Eigen::VectorXd::Zero(space.ndof());
    out.interior_vertex = Eigen::VectorXd::Zero(space.ndof());
    out.boundary_edge = Eigen::VectorXd::Zero(space.ndof());
    out.boundary_vertex = Eigen::VectorXd::Zero(space.ndof());

    BoundaryFrameAngle bfa = boundary_frame_angle(g, mesh, quad.edge_points);
    const auto& loop = mesh.boundary_loop();
    const GaussRule& gl = gauss_legendre(quad.edge_points);

    std::vector<double> vals;
    for (size_t step = 0; step < loop.size(); ++step) {
        const BoundaryStep& st = loop[step];
        const auto& data = bfa.edges[step];
        Vec2 a = mesh.vertex(st.from);
        Vec2 dir = (mesh.vertex(st.to) - a) / data.length;
        const auto& dofs = space.tri_dofs(st.tri);

        // Quadrature samples sit at indices 1 .. n in the edge data (index 0
        // and n+1 are the endpoints used for corner jumps). The loop may
        // traverse the edge against its stored orientation, so the geodesic
        // curvature gets the arclength measured from the stored endpoint.
        bool forward = (mesh.edges()[st.edge].v0 == st.from);
        for (size_t q = 0; q < gl.nodes.size(); ++q) {
            double s = gl.nodes[q] * data.length;
            Vec2 p = a + s * dir;
            double s_edge = forward ? s : data.length - s;
            double k_in = -geodesic_curvature(gh, mesh, st.tri, st.edge, s_edge);
            double ds_h = std::sqrt(gh.sample(st.tri, p, 0).G(dir, dir));
            double integrand = data.dmu[q + 1] - k_in * ds_h;
            double w = gl.weights[q] * data.length * integrand;
            basis_values_at(space, st.tri, p, &vals);
            for (size_t i = 0; i < dofs.size(); ++i) out.boundary_edge(dofs[i]) += w * vals[i];
        }
    }

    // Vertex terms: -v(p) (pi - [[mu]] - sum of gh-angles at p).
    for (size_t i = 0; i < loop.size(); ++i) {
        int p = loop[i].to;
        double angle_sum = 0.0;
        for (int t : mesh.vertex_triangles(p)) angle_sum += interior_angle(gh, mesh, t, p);
        out.boundary_vertex(p) -= M_PI - bfa.corner_jumps[i] - angle_sum;
    }

    return out;
}

Eigen::VectorXd rhs_functional(const AnalyticMetric& g, const MetricField& gh,
                               const LagrangeSpace& space, const QuadSpec& quad,
                               const CurvatureOptions& opts) {
    CurvatureBreakdown a = alpha_dist(g, gh, space, quad);
    CurvatureBreakdown k = kda_dist(gh, space, quad, opts);
    return a.total() - k.total();
}

}  // namespace rc
