#ifndef RC_QUADRATURE_HPP
#define RC_QUADRATURE_HPP

#include <vector>

namespace rc {

// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int npts);

// Quadrature on the reference triangle (0,0)-(1,0)-(0,1); weights sum to 1/2.
struct TrianglePoint {
    double x, y, w;
};

// Rule exact for all polynomials of total degree <= degree (collapsed
// Gauss-Legendre product on the square).
const std::vector<TrianglePoint>& triangle_rule(int degree);

// Quadrature resolution used across assembly. Triangle integrands involve
// G^{-1} and sqrt(det G), so the degree carries headroom beyond 2p + 2r.
struct QuadSpec {
    int tri_degree = 10;
    int edge_points = 8;

    static QuadSpec for_orders(int p, int r, int boost = 0) {
        QuadSpec q;
        q.tri_degree = 2 * p + 2 * r + 6 + boost;
        q.edge_points = std::max(2 * p + 2 * r + 4 + boost, 8);
        return q;
    }
};

}  // namespace rc

#endif
