#ifndef RC_MESH_HPP
#define RC_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rc/tensor.hpp"

// Oriented 2D triangulations of a rectangular chart with full edge topology
// and boundary classification, plus the randomly perturbed benchmark grids.
// A Mesh is immutable once built and safe for concurrent reads.

namespace rc {

struct Rect {
    double x0 = -0.25, y0 = -0.25, x1 = 0.25, y1 = 0.25;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

// Map from the reference triangle (0,0)-(1,0)-(0,1) onto a chart triangle:
// x = B xhat + b with det B > 0.
struct AffineMap {
    double b11, b12, b21, b22;
    Vec2 offset;

    Vec2 apply(Vec2 ref) const {
        return {b11 * ref.x + b12 * ref.y + offset.x, b21 * ref.x + b22 * ref.y + offset.y};
    }
    Vec2 pull_back(Vec2 chart) const {
        double d = det();
        double px = chart.x - offset.x, py = chart.y - offset.y;
        return {(b22 * px - b12 * py) / d, (b11 * py - b21 * px) / d};
    }
    // Pull a chart gradient back: grad_chart = B^{-T} grad_ref.
    Cov2 push_gradient(Cov2 ref_grad) const {
        double d = det();
        return {(b22 * ref_grad.x - b21 * ref_grad.y) / d,
                (b11 * ref_grad.y - b12 * ref_grad.x) / d};
    }
    double det() const { return b11 * b22 - b12 * b21; }

    // Flat metric induced by pulling the reference Euclidean metric through
    // the inverse map: components (B^{-1})^T B^{-1}, constant on the triangle.
    SymMat2 reference_metric() const {
        double d = det();
        double i11 = b22 / d, i12 = -b12 / d, i21 = -b21 / d, i22 = b11 / d;
        return {i11 * i11 + i21 * i21, i11 * i12 + i21 * i22, i12 * i12 + i22 * i22};
    }
};

struct MeshEdge {
    int v0, v1;                  // v0 < v1
    std::array<int, 2> tri{-1, -1};
    int n_tri = 0;
    bool boundary = false;
};

// One directed step of the counterclockwise boundary loop.
struct BoundaryStep {
    int edge = -1;
    int from = -1, to = -1;
    int tri = -1;  // unique adjacent triangle
};

class Mesh {
public:
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<MeshEdge>& edges() const { return edges_; }

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(triangles_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    Vec2 vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }

    // Edge ids of triangle t; side i connects local vertices i and (i+1) % 3.
    const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }

    bool boundary_vertex(int v) const { return boundary_vertex_[v]; }
    bool corner_vertex(int v) const { return corner_vertex_[v]; }
    bool boundary_edge(int e) const { return edges_[e].boundary; }

    const std::vector<int>& vertex_triangles(int v) const { return vertex_tris_[v]; }

    // Counterclockwise boundary loop (domain interior on the left).
    const std::vector<BoundaryStep>& boundary_loop() const { return boundary_loop_; }

    AffineMap affine_map(int t) const;

    int euler_characteristic() const { return n_vertices() - n_edges() + n_triangles(); }

    // Longest Euclidean edge of triangle t in chart units.
    double chart_diameter(int t) const;

    friend Mesh build_topology(std::vector<Vec2> vertices,
                               std::vector<std::array<int, 3>> triangles);

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<MeshEdge> edges_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<bool> boundary_vertex_;
    std::vector<bool> corner_vertex_;
    std::vector<std::vector<int>> vertex_tris_;
    std::vector<BoundaryStep> boundary_loop_;
};

// Deduplicate edges, fix orientation to counterclockwise, classify the
// boundary and corners. Throws on non-manifold edges and isolated vertices.
Mesh build_topology(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

// Structured right-triangle grid over rect with spacing about h; interior
// vertices displaced uniformly in [-frac h, frac h]^2. Deterministic in seed.
Mesh generate_perturbed_grid(const Rect& rect, double h, double perturb_frac, uint64_t seed);

void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace rc

#endif
