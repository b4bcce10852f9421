#include "rc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace rc {

namespace {

// Nodes of the n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on
// P_n, seeded with the Chebyshev estimate. Converges to machine precision.
GaussRule build_gauss(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // Map [-1,1] -> [0,1] (nodes ascend with i descending in x).
        r.nodes[n - 1 - i] = 0.5 * (x + 1.0);
        r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

std::vector<TrianglePoint> build_triangle(int degree) {
    // Duffy collapse x = u, y = v (1 - u): a monomial of total degree d picks
    // up one degree from the Jacobian, so m points per direction need
    // 2m - 1 >= d + 1.
    int m = (degree + 3) / 2;
    const GaussRule& g = gauss_legendre(m);
    std::vector<TrianglePoint> pts;
    pts.reserve(static_cast<size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double u = g.nodes[i], v = g.nodes[j];
            pts.push_back({u, v * (1.0 - u), g.weights[i] * g.weights[j] * (1.0 - u)});
        }
    return pts;
}

}  // namespace

const GaussRule& gauss_legendre(int npts) {
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(npts);
    if (it == cache.end()) it = cache.emplace(npts, build_gauss(npts)).first;
    return it->second;
}

const std::vector<TrianglePoint>& triangle_rule(int degree) {
    static std::mutex mtx;
    static std::map<int, std::vector<TrianglePoint>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, build_triangle(degree)).first;
    return it->second;
}

}  // namespace rc
