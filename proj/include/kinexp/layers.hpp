#ifndef KINEXP_LAYERS_HPP
#define KINEXP_LAYERS_HPP

#include <memory>
#include <vector>

#include "kinexp/pl_function.hpp"
#include "kinexp/tower.hpp"

namespace kinexp {

// Combinatorics of the level-n layer of the return-time series.  Writing
// q = q_{n+1}: the layer places `full_bumps` = floor((q-1)/3) positive bumps
// on the first floors of the long stack and half-weight negative bumps on the
// floors from `half_start` = q - 2*full_bumps upward, so the weights over one
// full column sum to zero.  The overall sign alternates with n.
struct LayerSpec {
    int level = 0;
    Int q_long;       // q_{n+1}: height of the long stack
    Int full_bumps;   // floor((q_{n+1}-1)/3)
    Int half_start;   // q_{n+1} - 2*full_bumps
    int leading_sign = 1;
};

inline LayerSpec layer_spec(const RotationParams& params, int n) {
    LayerSpec s;
    s.level = n;
    auto cvs = convergents(params, n + 1);
    s.q_long = cvs[static_cast<size_t>(n + 1)].q;
    s.full_bumps = (s.q_long - 1) / 3;
    s.half_start = s.q_long - 2 * s.full_bumps;
    s.leading_sign = (n % 2 == 0) ? 1 : -1;
    return s;
}

// Per-floor weight of the layer: +lead on floors [0, full_bumps),
// -lead/2 on floors [half_start, q), zero between.
inline Rat layer_weight(const LayerSpec& s, const Int& u) {
    if (u < s.full_bumps) return Rat(s.leading_sign);
    if (u >= s.half_start) return Rat(-s.leading_sign, 2);
    return Rat(0);
}

// Prefix sum P(r) = sum_{u < r} weight(u), clamped arguments in [0, q].
// P(q) = 0: a full column cancels.
inline Rat layer_weight_prefix(const LayerSpec& s, const Int& r) {
    Int full = r < s.full_bumps ? r : s.full_bumps;
    Int half = r > s.half_start ? Int(r - s.half_start) : Int(0);
    Rat out = Rat(full) - Rat(half) / 2;
    return Rat(s.leading_sign) * out;
}

// The layers 1..max_level of the return-time series over one rotation,
// evaluated implicitly through tower coordinates (no materialization), plus
// exact truncation-tail bounds.  sup|layer n| = |I_n|/3 when it has a full
// bump, and sum_{v>N} |I_v| telescopes to alpha^{N+2} (1+a+alpha)/a exactly.
class LayerSystem {
  public:
    LayerSystem(const RotationParams& params, int max_level)
        : params_(params),
          max_level_(max_level),
          locator_(params_, max_level + 1) {
        if (max_level < 1) throw std::invalid_argument("LayerSystem: max_level >= 1");
        specs_.reserve(static_cast<size_t>(max_level) + 1);
        for (int n = 0; n <= max_level; ++n) specs_.push_back(layer_spec(params_, n));
    }

    // the locator holds a reference into this object
    LayerSystem(const LayerSystem&) = delete;
    LayerSystem& operator=(const LayerSystem&) = delete;

    const RotationParams& params() const { return params_; }
    const TowerLocator& locator() const { return locator_; }
    int max_level() const { return max_level_; }
    const LayerSpec& spec(int n) const { return specs_.at(static_cast<size_t>(n)); }
    const Int& q(int k) const { return locator_.q(k); }

    // Value of the level-n layer at the profile of a point.
    QuadElem eval_layer(int n, const TowerProfile& prof) const {
        const FloorCoord& fc = prof.coords.at(static_cast<size_t>(n));
        if (!fc.is_long) return params_.zero();
        Rat w = layer_weight(spec(n), fc.index);
        if (w == 0) return params_.zero();
        return bump_canonical(params_.alpha_pow(n + 1), fc.canon) * w;
    }

    QuadElem eval_layer(int n, const CirclePoint& z) const {
        return eval_layer(n, locator_.locate(z));
    }

    // Truncated series value sum_{n=1..N} layer_n(z).
    QuadElem eval_stack(int N, const CirclePoint& z) const {
        check_N(N);
        TowerProfile prof = locator_.locate(z);
        QuadElem acc = params_.zero();
        for (int n = 1; n <= N; ++n) acc += eval_layer(n, prof);
        return acc;
    }

    // Exact sup of |layer n|.
    QuadElem sup_layer(int n) const {
        const LayerSpec& s = spec(n);
        QuadElem third = params_.alpha_pow(n + 1) / Rat(3);
        if (s.full_bumps >= 1) return third;
        if (s.q_long > s.half_start) return third / Rat(2);
        return params_.zero();
    }

    // Certified bound on sum_{v > N} sup|layer v|: the termwise bound
    // sup|layer v| <= |I_v| = alpha^{v+1} sums to a closed form.
    QuadElem tail_bound(int N) const {
        QuadElem geom = params_.alpha_pow(N + 2);
        // 1/(1-alpha) = (1 + a + alpha)/a
        QuadElem inv = params_.make(Rat(params_.a() + 1, params_.a()), Rat(1, params_.a()));
        return geom * inv;
    }

    QuadElem sup_stack_bound(int N) const {
        check_N(N);
        QuadElem acc = params_.zero();
        for (int n = 1; n <= N; ++n) acc += sup_layer(n);
        return acc;
    }

    void check_N(int N) const {
        if (N < 1 || N > max_level_)
            throw std::invalid_argument("truncation level outside constructed range");
    }

  private:
    RotationParams params_;
    int max_level_;
    TowerLocator locator_;
    std::vector<LayerSpec> specs_;
};

// Materializes the level-n layer as an exact PLFunction (guarded by the
// number of breakpoints).  Breakpoints are the corners of every weighted
// bump; values come from the implicit evaluator, so the two representations
// cross-check each other by construction.
inline std::pair<LayerSpec, PLFunction> build_layer(const LayerSystem& sys, int n,
                                                    const Int& guard = Int(3000000)) {
    const LayerSpec& s = sys.spec(n);
    Int bump_count = s.full_bumps + (s.q_long - s.half_start);
    if (bump_count * 4 > guard)
        throw guard_error("build_layer: breakpoint count exceeds guard");

    const RotationParams& P = sys.params();
    CircleInterval base = base_interval(P, n);
    QuadElem third = base.length() / Rat(3);
    std::vector<CirclePoint> xs;
    xs.reserve(static_cast<size_t>(bump_count.get_ui()) * 4);
    CirclePoint left = base.left();
    for (Int u = 0; u < s.q_long; ++u) {
        if (layer_weight(s, u) != 0) {
            xs.push_back(left);
            xs.push_back(circle_add(left, third));
            xs.push_back(circle_add(left, third * Rat(2)));
            xs.push_back(circle_add(left, base.length()));
        }
        left = circle_add(left, P.alpha());
    }
    std::sort(xs.begin(), xs.end(), circle_less);
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    PLFunction f = PLFunction::from_positions(
        xs, [&](const CirclePoint& x) { return sys.eval_layer(n, x); });
    return {s, f};
}

// Materializes the truncated series sum_{n=1..N} layer_n with merged
// breakpoints, together with the certified tail bound for everything above N.
inline std::pair<PLFunction, QuadElem> build_series(const LayerSystem& sys, int N,
                                                    const Int& guard = Int(3000000)) {
    sys.check_N(N);
    Int total = 0;
    for (int n = 1; n <= N; ++n) {
        const LayerSpec& s = sys.spec(n);
        total += (s.full_bumps + (s.q_long - s.half_start)) * 4;
    }
    if (total > guard) throw guard_error("build_series: breakpoint count exceeds guard");

    std::vector<CirclePoint> xs;
    const RotationParams& P = sys.params();
    for (int n = 1; n <= N; ++n) {
        const LayerSpec& s = sys.spec(n);
        CircleInterval base = base_interval(P, n);
        QuadElem third = base.length() / Rat(3);
        CirclePoint left = base.left();
        for (Int u = 0; u < s.q_long; ++u) {
            if (layer_weight(s, u) != 0) {
                xs.push_back(left);
                xs.push_back(circle_add(left, third));
                xs.push_back(circle_add(left, third * Rat(2)));
                xs.push_back(circle_add(left, base.length()));
            }
            left = circle_add(left, P.alpha());
        }
    }
    std::sort(xs.begin(), xs.end(), circle_less);
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    PLFunction f = PLFunction::from_positions(
        xs, [&](const CirclePoint& x) { return sys.eval_stack(N, x); });
    return {f, sys.tail_bound(N)};
}

}  // namespace kinexp

#endif  // KINEXP_LAYERS_HPP
