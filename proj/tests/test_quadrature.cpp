#include <doctest.h>

#include <cmath>

#include "rc/quadrature.hpp"

using namespace rc;

namespace {

// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double tri_monomial_integral(int a, int b) {
    auto fact = [](int n) {
        double f = 1.0;
        for (int k = 2; k <= n; ++k) f *= k;
        return f;
    };
    return fact(a) * fact(b) / fact(a + b + 2);
}

}  // namespace

TEST_CASE("gauss-legendre rules integrate monomials on [0,1]") {
    for (int n = 1; n <= 16; ++n) {
        const GaussRule& g = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : g.weights) wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double acc = 0.0;
            for (size_t i = 0; i < g.nodes.size(); ++i) acc += g.weights[i] * std::pow(g.nodes[i], k);
            CHECK(acc == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("triangle rules are exact to their stated degree") {
    for (int degree : {1, 2, 4, 6, 8, 10, 14, 18, 20}) {
        const auto& rule = triangle_rule(degree);
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                double acc = 0.0;
                for (const TrianglePoint& qp : rule)
                    acc += qp.w * std::pow(qp.x, a) * std::pow(qp.y, b);
                double exact = tri_monomial_integral(a, b);
                CHECK(std::abs(acc - exact) <= 1e-14 + 1e-13 * exact);
            }
    }
}

TEST_CASE("quad spec carries headroom for the metric nonlinearity") {
    QuadSpec q = QuadSpec::for_orders(2, 1, 0);
    CHECK(q.tri_degree == 12);
    CHECK(q.edge_points == 10);
    CHECK(QuadSpec::for_orders(1, 0, 0).edge_points == 8);
}
