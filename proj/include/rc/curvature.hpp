#ifndef RC_CURVATURE_HPP
#define RC_CURVATURE_HPP

#include <Eigen/Dense>

#include <vector>

#include "rc/fem.hpp"
#include "rc/metric_field.hpp"

// Right-hand side of the discrete connection-form problem: the distributional
// Gaussian curvature of the piecewise metric (triangle curvature, geodesic
// curvature jumps across interior edges, vertex angle defects) and the
// boundary functional built from the frame angle against the outward normal.
//
// Sign conventions, pinned by the flat-disc null test and by the requirement
// that the assembled functional annihilate constants on every mesh:
//  - the boundary loop runs counterclockwise (interior on the left);
//  - mu is the angle of the outward normal measured in the frame (e1, e2),
//    i.e. n = cos(mu) e1 + sin(mu) e2, unwrapped along each edge, with corner
//    jumps reduced to (-pi, pi];
//  - edge terms enter with the geodesic curvature taken against the inward
//    normal (positive for a convex boundary in a flat metric), realized as
//    the negative of geodesic_curvature() below; interior-edge jumps are the
//    sum of the inward-normal curvatures seen from the two sides.

namespace rc {

struct CurvatureBreakdown {
    Eigen::VectorXd triangle;
    Eigen::VectorXd interior_edge;
    Eigen::VectorXd interior_vertex;
    Eigen::VectorXd boundary_edge;
    Eigen::VectorXd boundary_vertex;

    Eigen::VectorXd total() const {
        return triangle + interior_edge + interior_vertex + boundary_edge + boundary_vertex;
    }
};

// Interior angle of triangle tri at one of its vertices, measured in gh.
double interior_angle(const MetricField& gh, const Mesh& mesh, int tri, int vertex);

// 2 pi minus the angle sum around an interior vertex.
double vertex_defect(const MetricField& gh, const Mesh& mesh, int vertex);

// Geodesic curvature of the straight chart edge at Euclidean arclength s from
// its lower-index endpoint, measured in gh from within tri with respect to
// the outward unit conormal. Zero for gh-geodesic edges.
double geodesic_curvature(const MetricField& gh, const Mesh& mesh, int tri, int edge, double s);

struct CurvatureOptions {
    // Multiplies the interior-edge jump term; tests flip it to confirm the
    // compatibility check catches a mis-signed jump.
    double interior_jump_sign = 1.0;
};

// <<KdA_dist(gh), v>> over all Lagrange basis functions v.
CurvatureBreakdown kda_dist(const MetricField& gh, const LagrangeSpace& space,
                            const QuadSpec& quad, const CurvatureOptions& opts = {});

// Frame angle data along the counterclockwise boundary loop.
struct BoundaryFrameAngle {
    struct EdgeData {
        int edge = -1;
        int from = -1, to = -1;
        std::vector<double> s;    // Euclidean arclength from `from`
        std::vector<double> mu;   // unwrapped samples
        std::vector<double> dmu;  // d mu / ds
        double mu_start = 0.0, mu_end = 0.0;
        double length = 0.0;
    };
    std::vector<EdgeData> edges;        // one per boundary loop step
    std::vector<double> corner_jumps;   // at loop vertex edges[i].to, in (-pi, pi]
};

BoundaryFrameAngle boundary_frame_angle(const AnalyticMetric& g, const Mesh& mesh,
                                        int points_per_edge);

// <<alpha_dist(gh), v>>; mu data comes from the exact metric g, the geodesic
// curvature and angle terms from gh.
CurvatureBreakdown alpha_dist(const AnalyticMetric& g, const MetricField& gh,
                              const LagrangeSpace& space, const QuadSpec& quad);

// F = alpha_dist - KdA_dist, the functional driving the constrained solve.
Eigen::VectorXd rhs_functional(const AnalyticMetric& g, const MetricField& gh,
                               const LagrangeSpace& space, const QuadSpec& quad,
                               const CurvatureOptions& opts = {});

}  // namespace rc

#endif
