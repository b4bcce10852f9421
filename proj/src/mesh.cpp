#include "rc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace rc {

namespace {

double signed_area2(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

// 53-bit uniform in [0, 1); independent of libstdc++ distribution internals
// so seeded runs reproduce across platforms.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

AffineMap Mesh::affine_map(int t) const {
    const auto& tri = triangles_[t];
    Vec2 a = vertices_[tri[0]], b = vertices_[tri[1]], c = vertices_[tri[2]];
    AffineMap m{b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y, a};
    return m;
}

double Mesh::chart_diameter(int t) const {
    const auto& tri = triangles_[t];
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec2 u = vertices_[tri[i]], v = vertices_[tri[(i + 1) % 3]];
        d = std::max(d, (v - u).norm());
    }
    return d;
}

Mesh build_topology(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles) {
    const int nv = static_cast<int>(vertices.size());
    for (auto& tri : triangles) {
        for (int v : tri)
            if (v < 0 || v >= nv) throw Error("mesh: triangle vertex index out of range");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw Error("mesh: degenerate triangle with repeated vertex");
        double s = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        if (s == 0.0) throw Error("mesh: zero-area triangle");
        if (s < 0.0) std::swap(tri[1], tri[2]);
    }
    {
        std::map<std::array<int, 3>, int> seen;
        for (const auto& tri : triangles) {
            std::array<int, 3> key = tri;
            std::sort(key.begin(), key.end());
            if (++seen[key] > 1) throw Error("mesh: duplicate triangle");
        }
    }

    Mesh m;
    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);

    std::map<std::pair<int, int>, int> edge_ids;
    m.tri_edges_.resize(m.triangles_.size());
    for (int t = 0; t < m.n_triangles(); ++t) {
        const auto& tri = m.triangles_[t];
        for (int side = 0; side < 3; ++side) {
            int a = tri[side], b = tri[(side + 1) % 3];
            std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            auto it = edge_ids.find(key);
            int e;
            if (it == edge_ids.end()) {
                e = static_cast<int>(m.edges_.size());
                edge_ids.emplace(key, e);
                MeshEdge edge;
                edge.v0 = key.first;
                edge.v1 = key.second;
                m.edges_.push_back(edge);
            } else {
                e = it->second;
            }
            MeshEdge& edge = m.edges_[e];
            if (edge.n_tri >= 2)
                throw Error("mesh: non-manifold edge (" + std::to_string(edge.v0) + "," +
                            std::to_string(edge.v1) + ") with more than two triangles");
            edge.tri[edge.n_tri++] = t;
            m.tri_edges_[t][side] = e;
        }
    }

    m.boundary_vertex_.assign(m.n_vertices(), false);
    for (auto& e : m.edges_) {
        e.boundary = (e.n_tri == 1);
        if (e.boundary) {
            m.boundary_vertex_[e.v0] = true;
            m.boundary_vertex_[e.v1] = true;
        }
    }

    m.vertex_tris_.assign(m.n_vertices(), {});
    for (int t = 0; t < m.n_triangles(); ++t)
        for (int v : m.triangles_[t]) m.vertex_tris_[v].push_back(t);
    for (int v = 0; v < m.n_vertices(); ++v)
        if (m.vertex_tris_[v].empty())
            throw Error("mesh: isolated vertex " + std::to_string(v));

    // Boundary loop: a boundary edge of ccw triangle (i,j,k) traversed in
    // triangle order keeps the interior on the left.
    std::map<int, BoundaryStep> step_from;
    for (int t = 0; t < m.n_triangles(); ++t) {
        const auto& tri = m.triangles_[t];
        for (int side = 0; side < 3; ++side) {
            int e = m.tri_edges_[t][side];
            if (!m.edges_[e].boundary) continue;
            BoundaryStep st;
            st.edge = e;
            st.from = tri[side];
            st.to = tri[(side + 1) % 3];
            st.tri = t;
            step_from[st.from] = st;
        }
    }
    if (!step_from.empty()) {
        int start = step_from.begin()->first;
        int cur = start;
        do {
            auto it = step_from.find(cur);
            if (it == step_from.end()) throw Error("mesh: broken boundary loop");
            m.boundary_loop_.push_back(it->second);
            cur = it->second.to;
        } while (cur != start && m.boundary_loop_.size() <= step_from.size());
        if (cur != start || m.boundary_loop_.size() != step_from.size())
            throw Error("mesh: boundary is not a single closed loop");
    }

    // Corners: boundary vertices where the incoming and outgoing boundary
    // directions disagree.
    m.corner_vertex_.assign(m.n_vertices(), false);
    const auto& loop = m.boundary_loop_;
    for (size_t i = 0; i < loop.size(); ++i) {
        const BoundaryStep& prev = loop[i];
        const BoundaryStep& next = loop[(i + 1) % loop.size()];
        Vec2 d0 = m.vertices_[prev.to] - m.vertices_[prev.from];
        Vec2 d1 = m.vertices_[next.to] - m.vertices_[next.from];
        double sine = d0.cross(d1) / (d0.norm() * d1.norm());
        double cosine = d0.dot(d1) / (d0.norm() * d1.norm());
        if (std::abs(std::atan2(sine, cosine)) > 1e-9) m.corner_vertex_[prev.to] = true;
    }

    return m;
}

Mesh generate_perturbed_grid(const Rect& rect, double h, double perturb_frac, uint64_t seed) {
    if (h <= 0.0) throw Error("mesh: grid spacing must be positive");
    if (perturb_frac < 0.0 || perturb_frac >= 0.5)
        throw Error("mesh: perturbation fraction must lie in [0, 0.5)");
    if (rect.width() <= 0.0 || rect.height() <= 0.0) throw Error("mesh: degenerate rectangle");

    int nx = std::max(1, static_cast<int>(std::lround(rect.width() / h)));
    int ny = std::max(1, static_cast<int>(std::lround(rect.height() / h)));
    double hx = rect.width() / nx, hy = rect.height() / ny;

    std::vector<Vec2> verts;
    verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            verts.push_back({rect.x0 + i * hx, rect.y0 + j * hy});

    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<size_t>(nx) * ny * 2);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }

    if (perturb_frac > 0.0) {
        std::vector<std::vector<int>> incident(verts.size());
        for (int t = 0; t < static_cast<int>(tris.size()); ++t)
            for (int v : tris[t]) incident[v].push_back(t);

        // Displacements that would invert a triangle or squash it below a
        // fixed fraction of its unperturbed area are retried with half the
        // displacement; this keeps the shape-regularity of the family
        // bounded across refinements.
        double min_area2 = 0.3 * hx * hy;
        std::mt19937_64 rng(seed);
        for (int j = 1; j < ny; ++j)
            for (int i = 1; i < nx; ++i) {
                int v = vid(i, j);
                Vec2 base = verts[v];
                double dx = (2.0 * uniform01(rng) - 1.0) * perturb_frac * h;
                double dy = (2.0 * uniform01(rng) - 1.0) * perturb_frac * h;
                bool placed = false;
                for (int attempt = 0; attempt < 100; ++attempt) {
                    verts[v] = {base.x + dx, base.y + dy};
                    bool ok = true;
                    for (int t : incident[v]) {
                        const auto& tri = tris[t];
                        if (signed_area2(verts[tri[0]], verts[tri[1]], verts[tri[2]]) <= min_area2) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) {
                        placed = true;
                        break;
                    }
                    dx *= 0.5;
                    dy *= 0.5;
                }
                if (!placed) {
                    verts[v] = base;
                    throw Error("mesh: perturbation kept inverting triangles at vertex " +
                                std::to_string(v));
                }
            }
    }

    return build_topology(std::move(verts), std::move(tris));
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("mesh: cannot open '" + path + "' for writing");
    out << "regge-mesh v1\n";
    out << mesh.n_vertices() << " " << mesh.n_edges() << " " << mesh.n_triangles() << "\n";
    char buf[80];
    for (const Vec2& v : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    if (!out) throw Error("mesh: write to '" + path + "' failed");
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("mesh: cannot open '" + path + "'");
    auto fail = [&path](int line, const std::string& what) {
        throw Error("mesh: " + path + ":" + std::to_string(line) + ": " + what);
    };

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) fail(1, "empty file");
    ++lineno;
    if (line != "regge-mesh v1") fail(lineno, "bad header, expected 'regge-mesh v1'");

    int nv = 0, ne = 0, nt = 0;
    if (!std::getline(in, line)) fail(lineno + 1, "missing count line");
    ++lineno;
    {
        std::istringstream ss(line);
        if (!(ss >> nv >> ne >> nt) || nv <= 0 || nt <= 0) fail(lineno, "bad 'V E T' counts");
    }

    std::vector<Vec2> verts(nv);
    for (int i = 0; i < nv; ++i) {
        if (!std::getline(in, line)) fail(lineno + 1, "unexpected end of file in vertex block");
        ++lineno;
        std::istringstream ss(line);
        if (!(ss >> verts[i].x >> verts[i].y)) fail(lineno, "bad vertex line");
    }
    std::vector<std::array<int, 3>> tris(nt);
    for (int i = 0; i < nt; ++i) {
        if (!std::getline(in, line)) fail(lineno + 1, "unexpected end of file in triangle block");
        ++lineno;
        std::istringstream ss(line);
        if (!(ss >> tris[i][0] >> tris[i][1] >> tris[i][2])) fail(lineno, "bad triangle line");
    }

    Mesh m = build_topology(std::move(verts), std::move(tris));
    if (m.n_edges() != ne)
        fail(2, "edge count " + std::to_string(ne) + " does not match recomputed topology (" +
                    std::to_string(m.n_edges()) + ")");
    return m;
}

}  // namespace rc
