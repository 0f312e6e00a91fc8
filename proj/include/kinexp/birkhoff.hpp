#ifndef KINEXP_BIRKHOFF_HPP
#define KINEXP_BIRKHOFF_HPP

#include <string>
#include <vector>

#include "kinexp/layers.hpp"
#include "kinexp/pl_function.hpp"

namespace kinexp {

// Exact Birkhoff sum with a certified enclosure when the summed function is a
// truncation: the sum of the full series over i iterates lies within `tail`
// of `value`.
struct BirkhoffReport {
    QuadElem value;
    QuadElem tail;   // i * tail_bound(N); zero for single layers / plain functions
    Int i;
    std::string evaluator;  // "naive", "stream" or "fast"
};

// Literal evaluation: sum_{k<i} f(x + k*alpha), one PLFunction lookup per
// iterate.  The independent oracle for everything faster.
inline QuadElem birkhoff_naive(const PLFunction& f, const RotationParams& params,
                               const CirclePoint& x, const Int& i,
                               const Int& guard = Int(10000000)) {
    if (i < 0) throw std::invalid_argument("birkhoff_naive: negative iterate count");
    if (i > guard) throw guard_error("birkhoff_naive: iterate count exceeds guard; use the fast evaluator");
    QuadElem acc = params.zero();
    CirclePoint pt = x;
    for (Int k = 0; k < i; ++k) {
        acc += f.eval(pt);
        pt = circle_add(pt, params.alpha());
    }
    return acc;
}

namespace detail {

// Incremental tower state of one layer along an orbit.  Advancing one rotation
// step moves one floor up; wrapping past the top re-enters the base, where a
// single exact comparison decides long vs short stack.
struct LayerCursor {
    int n = 0;
    bool is_long = true;
    Int index;
    QuadElem canon;  // canonical base position
    QuadElem chi;    // cached bump value of the base (long stacks only)

    void reset_from(const LayerSystem& sys, const FloorCoord& fc) {
        is_long = fc.is_long;
        index = fc.index;
        canon = fc.canon;
        chi = is_long ? bump_canonical(sys.params().alpha_pow(n + 1), canon) : sys.params().zero();
    }

    void advance(const LayerSystem& sys) {
        const QuadElem L = sys.params().alpha_pow(n + 1);
        const QuadElem aL = sys.params().alpha_pow(n + 2);
        index += 1;
        if (is_long) {
            if (index == sys.q(n + 1)) {
                // from the top long floor the orbit re-enters the base
                canon = canon - aL;
                index = 0;
                if (quad_sign(canon) >= 0) {
                    is_long = true;
                    chi = bump_canonical(L, canon);
                } else {
                    is_long = false;
                }
            }
        } else if (index == sys.q(n)) {
            canon = canon + L;  // short stack tops out inside the long base
            index = 0;
            is_long = true;
            chi = bump_canonical(L, canon);
        }
    }
};

}  // namespace detail

// Literal evaluation of layers through tower coordinates: still one term per
// iterate, but each term costs O(1) exact operations.  Used where the merged
// PLFunction is too large to materialize.
inline QuadElem birkhoff_stream(const LayerSystem& sys, int n_lo, int n_hi, const CirclePoint& x,
                                const Int& i, const Int& guard = Int(10000000)) {
    if (i < 0) throw std::invalid_argument("birkhoff_stream: negative iterate count");
    if (i > guard) throw guard_error("birkhoff_stream: iterate count exceeds guard; use the fast evaluator");
    if (n_lo < 1 || n_hi > sys.max_level() || n_lo > n_hi)
        throw std::invalid_argument("birkhoff_stream: bad layer range");

    TowerProfile prof = sys.locator().locate(x);
    std::vector<detail::LayerCursor> cursors;
    cursors.reserve(static_cast<size_t>(n_hi - n_lo) + 1);
    for (int n = n_lo; n <= n_hi; ++n) {
        detail::LayerCursor c;
        c.n = n;
        c.reset_from(sys, prof.coords[static_cast<size_t>(n)]);
        cursors.push_back(std::move(c));
    }

    // accumulate full-weight and half-weight bump values separately per layer
    std::vector<QuadElem> acc_full(cursors.size(), sys.params().zero());
    std::vector<QuadElem> acc_half(cursors.size(), sys.params().zero());
    for (Int k = 0; k < i; ++k) {
        for (size_t c = 0; c < cursors.size(); ++c) {
            auto& cur = cursors[c];
            if (cur.is_long && !cur.chi.is_zero()) {
                const LayerSpec& s = sys.spec(cur.n);
                if (cur.index < s.full_bumps)
                    acc_full[c] += cur.chi;
                else if (cur.index >= s.half_start)
                    acc_half[c] += cur.chi;
            }
            cur.advance(sys);
        }
    }
    QuadElem total = sys.params().zero();
    for (size_t c = 0; c < cursors.size(); ++c) {
        int lead = sys.spec(cursors[c].n).leading_sign;
        total += (acc_full[c] - acc_half[c] / Rat(2)) * Rat(lead);
    }
    return total;
}

// Fast exact evaluation of one layer's Birkhoff sum.  Writing the layer as a
// weighted sum of bumps over the long floors, the double sum collapses to
//     sum over t of chi(x + t*alpha) * [P(clamp(i-t)) - P(clamp(-t))],
// and the bracket vanishes unless t lies within one stack height of 0 or i.
// Each of those two windows contains at most one visit to the base interval,
// found directly from tower coordinates, so the cost is independent of i.
inline QuadElem birkhoff_fast_layer(const LayerSystem& sys, int n, const TowerProfile& prof_x,
                                    const TowerProfile& prof_y, const Int& i) {
    const LayerSpec& s = sys.spec(n);
    const QuadElem L = sys.params().alpha_pow(n + 1);
    auto clamp = [&](Int r) {
        if (r < 0) return Int(0);
        if (r > s.q_long) return s.q_long;
        return r;
    };

    struct Hit {
        Int t;
        QuadElem chi;
    };
    std::vector<Hit> hits;
    const FloorCoord& fx = prof_x.coords[static_cast<size_t>(n)];
    if (fx.is_long) hits.push_back({-fx.index, bump_canonical(L, fx.canon)});
    const FloorCoord& fy = prof_y.coords[static_cast<size_t>(n)];
    if (fy.is_long) {
        Int t = i - fy.index;
        bool dup = false;
        for (const auto& h : hits) dup = dup || h.t == t;
        if (!dup) hits.push_back({std::move(t), bump_canonical(L, fy.canon)});
    }

    QuadElem acc = sys.params().zero();
    for (const auto& h : hits) {
        Rat w = layer_weight_prefix(s, clamp(i - h.t)) - layer_weight_prefix(s, clamp(-h.t));
        if (w != 0) acc += h.chi * w;
    }
    return acc;
}

inline QuadElem birkhoff_fast_layer(const LayerSystem& sys, int n, const CirclePoint& x,
                                    const Int& i) {
    if (i < 0) throw std::invalid_argument("birkhoff_fast_layer: negative iterate count");
    if (i == 0) return sys.params().zero();
    TowerProfile px = sys.locator().locate(x);
    CirclePoint y = circle_add(x, QuadElem(x.a(), Rat(0), Rat(i)));
    TowerProfile py = sys.locator().locate(y);
    return birkhoff_fast_layer(sys, n, px, py, i);
}

// Fast exact Birkhoff sum of the truncated series (layers 1..N), with the
// certified tail i * tail_bound(N) for the discarded layers.
inline BirkhoffReport birkhoff_fast_stack(const LayerSystem& sys, int N, const CirclePoint& x,
                                          const Int& i) {
    sys.check_N(N);
    if (i < 0) throw std::invalid_argument("birkhoff_fast_stack: negative iterate count");
    BirkhoffReport rep;
    rep.i = i;
    rep.evaluator = "fast";
    rep.value = sys.params().zero();
    rep.tail = sys.tail_bound(N) * Rat(i);
    if (i == 0) return rep;
    TowerProfile px = sys.locator().locate(x);
    CirclePoint y = circle_add(x, QuadElem(x.a(), Rat(0), Rat(i)));
    TowerProfile py = sys.locator().locate(y);
    for (int n = 1; n <= N; ++n) rep.value += birkhoff_fast_layer(sys, n, px, py, i);
    return rep;
}

}  // namespace kinexp

#endif  // KINEXP_BIRKHOFF_HPP
