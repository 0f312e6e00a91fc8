#ifndef KINEXP_PL_FUNCTION_HPP
#define KINEXP_PL_FUNCTION_HPP

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include "kinexp/jsonio.hpp"
#include "kinexp/tower.hpp"

namespace kinexp {

// An exact piecewise-linear function on the circle: breakpoints sorted in
// [0,1), the exact value at each, and the rational slope on the arc to the
// next breakpoint (wrapping).  A function with no breakpoints is identically
// zero.  Continuity is enforced at construction: each value must equal the
// linear extension from the previous breakpoint.
class PLFunction {
  public:
    struct Node {
        CirclePoint x;
        QuadElem value;
        QuadElem slope;  // on the arc from x to the next breakpoint
    };

    PLFunction() = default;

    explicit PLFunction(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.empty()) return;
        for (size_t k = 0; k + 1 < nodes_.size(); ++k)
            if (!circle_less(nodes_[k].x, nodes_[k + 1].x))
                throw std::invalid_argument("breakpoints must be strictly sorted");
        verify_continuity();
    }

    // Builds from sorted unique breakpoint positions and an exact value
    // oracle.  The positions must include every true breakpoint of the
    // intended function; slopes are then derived by exact finite differences.
    static PLFunction from_positions(const std::vector<CirclePoint>& xs,
                                     const std::function<QuadElem(const CirclePoint&)>& value_at) {
        std::vector<Node> nodes;
        nodes.reserve(xs.size());
        for (const auto& x : xs) nodes.push_back({x, value_at(x), QuadElem()});
        for (size_t k = 0; k < nodes.size(); ++k) {
            const size_t k1 = (k + 1) % nodes.size();
            QuadElem gap = circle_sub(nodes[k1].x, nodes[k].x).value();
            if (k1 == 0) gap = gap.is_zero() ? QuadElem(nodes[k].x.a(), Rat(1), Rat(0)) : gap;
            if (gap.is_zero()) throw std::invalid_argument("duplicate breakpoint positions");
            nodes[k].slope = (nodes[k1].value - nodes[k].value) / gap;
        }
        PLFunction f;
        f.nodes_ = std::move(nodes);
        return f;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    bool is_zero_function() const { return nodes_.empty(); }
    long a() const { return nodes_.empty() ? 0 : nodes_.front().x.a(); }

    QuadElem eval(const CirclePoint& z) const {
        if (nodes_.empty()) return QuadElem(z.a(), Rat(0), Rat(0));
        size_t idx = last_leq(z);
        const Node& nd = nodes_[idx];
        QuadElem d = circle_sub(z, nd.x).value();
        return nd.value + nd.slope * d;
    }

    // Exact extrema: a piecewise-linear circle function attains them at
    // breakpoints.
    QuadElem min_value() const {
        if (nodes_.empty()) throw std::domain_error("min of empty function");
        QuadElem m = nodes_.front().value;
        for (const auto& nd : nodes_) m = quad_min(m, nd.value);
        return m;
    }
    QuadElem max_value() const {
        if (nodes_.empty()) throw std::domain_error("max of empty function");
        QuadElem m = nodes_.front().value;
        for (const auto& nd : nodes_) m = quad_max(m, nd.value);
        return m;
    }
    QuadElem sup_norm() const { return quad_max(quad_abs(min_value()), quad_abs(max_value())); }

    Rat lipschitz() const {
        Rat L(0);
        for (const auto& nd : nodes_) {
            if (!nd.slope.is_rational())
                throw std::logic_error("irrational slope in piecewise-linear function");
            Rat s = rat_abs(nd.slope.p());
            if (s > L) L = s;
        }
        return L;
    }

    PLFunction operator+(const QuadElem& c) const {
        PLFunction out = *this;
        if (out.nodes_.empty()) {
            out.nodes_.push_back({CirclePoint(QuadElem(c.a(), Rat(0), Rat(0))), c,
                                  QuadElem(c.a(), Rat(0), Rat(0))});
            return out;
        }
        for (auto& nd : out.nodes_) nd.value = nd.value + c;
        return out;
    }

    PLFunction operator+(const PLFunction& o) const {
        if (nodes_.empty()) return o;
        if (o.nodes_.empty()) return *this;
        std::vector<CirclePoint> xs;
        xs.reserve(nodes_.size() + o.nodes_.size());
        for (const auto& nd : nodes_) xs.push_back(nd.x);
        for (const auto& nd : o.nodes_) xs.push_back(nd.x);
        std::sort(xs.begin(), xs.end(), circle_less);
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        return from_positions(
            xs, [&](const CirclePoint& x) { return eval(x) + o.eval(x); });
    }

    void verify_continuity() const {
        for (size_t k = 0; k < nodes_.size(); ++k) {
            const size_t k1 = (k + 1) % nodes_.size();
            QuadElem gap = circle_sub(nodes_[k1].x, nodes_[k].x).value();
            if (k1 == 0 && gap.is_zero() && nodes_.size() == 1)
                gap = QuadElem(nodes_[k].x.a(), Rat(1), Rat(0));
            if (nodes_[k1].value != nodes_[k].value + nodes_[k].slope * gap)
                throw std::logic_error("piecewise-linear function is discontinuous");
        }
    }

  private:
    // Index of the last breakpoint with position <= z, wrapping to the final
    // breakpoint when z precedes all of them.
    size_t last_leq(const CirclePoint& z) const {
        size_t lo = 0, hi = nodes_.size();
        if (circle_less(z, nodes_.front().x)) return nodes_.size() - 1;
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            if (circle_less(z, nodes_[mid].x))
                hi = mid;
            else
                lo = mid;
        }
        return lo;
    }

    std::vector<Node> nodes_;
};

// Closed-form trapezoid value over an arbitrary interval: rises with slope 1
// on the first third, holds the plateau length/3 on the middle third, falls
// with slope -1 on the last third, 0 outside.
inline QuadElem bump_value(const CircleInterval& I, const CirclePoint& z) {
    QuadElem d = I.offset(z);
    if (quad_less(I.length(), d)) return QuadElem(d.a(), Rat(0), Rat(0));
    return bump_canonical(I.length(), d);
}

// Materialized trapezoid bump.
inline PLFunction bump(const CircleInterval& I) {
    if (quad_sign(I.length()) <= 0) throw std::domain_error("degenerate interval");
    QuadElem third = I.length() / Rat(3);
    std::vector<CirclePoint> xs = {I.left(), circle_add(I.left(), third),
                                   circle_add(I.left(), third * Rat(2)), I.right()};
    std::sort(xs.begin(), xs.end(), circle_less);
    return PLFunction::from_positions(xs, [&](const CirclePoint& x) { return bump_value(I, x); });
}

// Shifts f by a constant so that its exact minimum becomes 1.  Differences of
// Birkhoff sums are invariant under this shift.
inline std::pair<PLFunction, QuadElem> positivize(const PLFunction& f) {
    if (f.is_zero_function()) {
        QuadElem one(f.a(), Rat(1), Rat(0));
        return {f + one, one};
    }
    QuadElem offset = QuadElem(f.a(), Rat(1), Rat(0)) - f.min_value();
    return {f + offset, offset};
}

inline json to_json(const PLFunction& f) {
    json nodes = json::array();
    for (const auto& nd : f.nodes())
        nodes.push_back(json{{"x", to_json(nd.x)}, {"value", to_json(nd.value)},
                             {"slope", to_json(nd.slope)}});
    return json{{"breakpoints", std::move(nodes)}};
}

inline PLFunction pl_from_json(const json& j) {
    std::vector<PLFunction::Node> nodes;
    for (const auto& nj : j.at("breakpoints"))
        nodes.push_back({circle_from_json(nj.at("x")), quad_from_json(nj.at("value")),
                         quad_from_json(nj.at("slope"))});
    return PLFunction(std::move(nodes));
}

}  // namespace kinexp

#endif  // KINEXP_PL_FUNCTION_HPP
