#ifndef RC_METRIC_FIELD_HPP
#define RC_METRIC_FIELD_HPP

#include <utility>

#include "rc/mesh.hpp"
#include "rc/tensor.hpp"

// A symmetric 2-tensor field evaluated per triangle. Piecewise fields
// (Regge metrics, blends along a metric path, differences g - g_h) and
// globally smooth analytic metrics all assemble through this interface;
// sampling on an edge or vertex uses the named triangle's extension.

namespace rc {

class MetricField {
public:
    virtual ~MetricField() = default;

    // deriv_order in {0, 1, 2}; the returned sample has at least that order.
    virtual MetricSample sample(int tri, Vec2 p, int deriv_order) const = 0;
};

class AnalyticField final : public MetricField {
public:
    explicit AnalyticField(AnalyticMetric m) : metric_(std::move(m)) {}

    MetricSample sample(int, Vec2 p, int) const override { return metric_.eval(p.x, p.y); }

private:
    AnalyticMetric metric_;
};

// a * A + b * B, componentwise on values and derivatives. With
// a = t, b = 1 - t this is the straight-line metric path used by the
// shape-derivative checks; with a = 1, b = -1 it is the tensor g_A - g_B.
class LinCombField final : public MetricField {
public:
    LinCombField(double a, const MetricField& A, double b, const MetricField& B)
        : a_(a), b_(b), A_(&A), B_(&B) {}

    MetricSample sample(int tri, Vec2 p, int deriv_order) const override {
        return lincomb(a_, A_->sample(tri, p, deriv_order), b_, B_->sample(tri, p, deriv_order));
    }

private:
    double a_, b_;
    const MetricField* A_;
    const MetricField* B_;
};

}  // namespace rc

#endif
