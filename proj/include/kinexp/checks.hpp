#ifndef KINEXP_CHECKS_HPP
#define KINEXP_CHECKS_HPP

#include <optional>
#include <string>
#include <vector>

#include "kinexp/birkhoff.hpp"

namespace kinexp {

// Verdicts: `fail` marks a broken exact identity (a bug or a false claim),
// `out_of_regime` marks a quantitative inequality that simply does not hold
// at the tested parameter size.  Quantitative margins are always reported.
enum class Verdict { pass, fail, out_of_regime };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "out-of-regime";
    }
}

struct PropCheckResult {
    std::string id;
    long a = 0;
    int n = 0;
    int N = 0;
    Int i;
    QuadElem lhs, rhs, margin;
    Verdict verdict = Verdict::fail;
    std::string evaluator;
    json inputs;
    json details;
};

inline json to_json(const PropCheckResult& r) {
    return json{{"id", r.id},
                {"a", r.a},
                {"n", r.n},
                {"N", r.N},
                {"i", r.i.get_str()},
                {"lhs", to_json(r.lhs)},
                {"rhs", to_json(r.rhs)},
                {"margin", to_json(r.margin)},
                {"verdict", to_string(r.verdict)},
                {"evaluator", r.evaluator},
                {"inputs", r.inputs},
                {"details", r.details}};
}

// The standing assumption of every per-level estimate: a comparison point x
// in the probe window J_n and the iterate count i = floor(q_{n+1}/2).
struct CheckContext {
    int n = 0;
    CirclePoint x;
    Int i;
    std::string sample;  // how x was chosen, for reports
};

enum class SamplePoint { midpoint, inner_endpoint, outer_endpoint, random_in_window };

inline CheckContext make_context(const RotationParams& params, int n, SamplePoint kind,
                                 RatSampler* rng = nullptr) {
    if (n < 1) throw std::invalid_argument("make_context: n >= 1");
    CircleInterval J = probe_window(params, n);
    CheckContext ctx;
    ctx.n = n;
    switch (kind) {
        case SamplePoint::midpoint:
            ctx.x = J.midpoint();
            ctx.sample = "midpoint";
            break;
        case SamplePoint::inner_endpoint: {
            // endpoint of J_n closer to 0
            CirclePoint l = J.left(), r = J.right();
            ctx.x = quad_leq(circle_norm(l), circle_norm(r)) ? l : r;
            ctx.sample = "inner-endpoint";
            break;
        }
        case SamplePoint::outer_endpoint: {
            CirclePoint l = J.left(), r = J.right();
            ctx.x = quad_leq(circle_norm(l), circle_norm(r)) ? r : l;
            ctx.sample = "outer-endpoint";
            break;
        }
        case SamplePoint::random_in_window:
            if (rng == nullptr)
                throw std::invalid_argument("make_context: random sample needs a sampler");
            ctx.x = circle_add(J.left(), J.length() * rng->unit());
            ctx.sample = "random";
            break;
    }
    if (!J.contains(ctx.x)) throw std::logic_error("sample point escaped the probe window");
    auto cvs = convergents(params, n + 1);
    ctx.i = cvs[static_cast<size_t>(n + 1)].q / 2;
    return ctx;
}

// Runs the per-proposition checks over one layer system.  Every Birkhoff
// difference is computed with the fast evaluator; whenever the iterate count
// is below `naive_cap` the literal streaming evaluator recomputes it and the
// two must agree exactly.
class CheckHarness {
  public:
    CheckHarness(const LayerSystem& sys, int N, Int naive_cap = Int(1000000))
        : sys_(sys), N_(N), naive_cap_(std::move(naive_cap)) {
        sys_.check_N(N_);
    }

    const LayerSystem& sys() const { return sys_; }
    int N() const { return N_; }

    // Birkhoff difference of one layer between ctx.x and 0.
    QuadElem layer_delta(int nu, const CheckContext& ctx, std::string* evaluator = nullptr) const {
        if (nu < 1) {  // layers below 1 do not exist in the series
            if (evaluator) *evaluator = "vacuous";
            return sys_.params().zero();
        }
        QuadElem vx = birkhoff_fast_layer(sys_, nu, ctx.x, ctx.i);
        QuadElem v0 = birkhoff_fast_layer(sys_, nu, origin(), ctx.i);
        QuadElem delta = vx - v0;
        if (ctx.i <= naive_cap_) {
            QuadElem sx = birkhoff_stream(sys_, nu, nu, ctx.x, ctx.i, naive_cap_);
            QuadElem s0 = birkhoff_stream(sys_, nu, nu, origin(), ctx.i, naive_cap_);
            if (sx != vx || s0 != v0)
                throw std::logic_error("fast and streaming evaluators disagree");
            if (evaluator) *evaluator = "fast+stream";
        } else if (evaluator) {
            *evaluator = "fast";
        }
        return delta;
    }

    // The middle term: exact zero at the origin, sign matching the layer's
    // leading sign, the closed-form value, and the safe lower bound
    // |sum| >= q_{n+1} |q_{n+1} alpha| / 50.
    PropCheckResult check_middle_layer(const CheckContext& ctx) const {
        PropCheckResult r = base_result("middle-layer-bound", ctx);
        const int n = ctx.n;
        const LayerSpec& s = sys_.spec(n);
        std::string ev;
        QuadElem v0 = birkhoff_fast_layer(sys_, n, origin(), ctx.i);
        QuadElem delta = layer_delta(n, ctx, &ev);
        r.evaluator = ev;

        bool zero_at_origin = v0.is_zero();
        // closed form: (signed weight prefix over i floors) * bump(x)
        QuadElem chi = bump_value(base_interval(sys_.params(), n), ctx.x);
        Int clamped = ctx.i < s.q_long ? ctx.i : s.q_long;
        QuadElem closed = chi * layer_weight_prefix(s, clamped);
        bool closed_matches = closed == delta;
        int sign_delta = quad_sign(delta);
        bool sign_matches = sign_delta == s.leading_sign;

        r.lhs = quad_abs(delta);
        r.rhs = sys_.params().alpha_pow(n + 2) * (Rat(s.q_long) / 50);
        r.margin = r.lhs - r.rhs;
        r.details = json{{"zero_at_origin", zero_at_origin},
                         {"closed_form", to_json(closed)},
                         {"closed_form_matches", closed_matches},
                         {"sign", sign_delta},
                         {"leading_sign", s.leading_sign},
                         {"bump_at_x", to_json(chi)}};
        if (!zero_at_origin || !closed_matches)
            r.verdict = Verdict::fail;
        else if (!sign_matches || quad_sign(r.margin) < 0)
            r.verdict = Verdict::out_of_regime;
        else
            r.verdict = Verdict::pass;
        return r;
    }

    // The layer below the context level cancels exactly.
    PropCheckResult check_previous_layer(const CheckContext& ctx) const {
        PropCheckResult r = base_result("previous-layer-cancellation", ctx);
        std::string ev;
        QuadElem delta = layer_delta(ctx.n - 1, ctx, &ev);
        r.evaluator = ev;
        r.lhs = quad_abs(delta);
        r.rhs = sys_.params().zero();
        r.margin = -r.lhs;
        r.details = json{{"vacuous", ctx.n < 2}};
        r.verdict = delta.is_zero() ? Verdict::pass : Verdict::fail;
        return r;
    }

    // The layer above: zero at the origin and a difference whose sign never
    // opposes the middle layer's.
    PropCheckResult check_next_layer(const CheckContext& ctx) const {
        PropCheckResult r = base_result("next-layer-sign", ctx);
        if (ctx.n + 1 > sys_.max_level())
            throw std::invalid_argument("check_next_layer: raise the system's max level");
        std::string ev;
        QuadElem v0 = birkhoff_fast_layer(sys_, ctx.n + 1, origin(), ctx.i);
        QuadElem delta_next = layer_delta(ctx.n + 1, ctx, &ev);
        QuadElem delta_mid = layer_delta(ctx.n, ctx);
        r.evaluator = ev;
        int sn = quad_sign(delta_next);
        int sm = quad_sign(delta_mid);
        r.lhs = delta_next;
        r.rhs = delta_mid;
        r.margin = quad_abs(delta_next);
        r.details = json{{"zero_at_origin", v0.is_zero()},
                         {"sign_next", sn},
                         {"sign_middle", sm}};
        r.verdict = (v0.is_zero() && (sn == 0 || sn == sm)) ? Verdict::pass : Verdict::fail;
        return r;
    }

    // Central block: layers n-1, n, n+1 together clear 1/(100 c).
    PropCheckResult check_central_block(const CheckContext& ctx) const {
        PropCheckResult r = base_result("central-block", ctx);
        std::string ev;
        QuadElem sum = layer_delta(ctx.n - 1, ctx) + layer_delta(ctx.n, ctx, &ev) +
                       layer_delta(ctx.n + 1, ctx);
        r.evaluator = ev;
        r.lhs = quad_abs(sum);
        r.rhs = sys_.params().alpha() / Rat(100);  // 1/c = alpha
        r.margin = r.lhs - r.rhs;
        r.details = json{{"sum", to_json(sum)}};
        r.verdict = quad_sign(r.margin) > 0 ? Verdict::pass : Verdict::out_of_regime;
        return r;
    }

    // Layers above n+1: explicit differences up to N plus the certified tail
    // stay below 4 c^{-2}.
    PropCheckResult check_upper_tail(const CheckContext& ctx) const {
        PropCheckResult r = base_result("upper-tail", ctx);
        if (N_ < ctx.n + 2) throw std::invalid_argument("check_upper_tail: need N >= n+2");
        QuadElem explicit_part = sys_.params().zero();
        json per_layer = json::array();
        bool termwise_ok = true;
        std::string ev;
        for (int nu = ctx.n + 2; nu <= N_; ++nu) {
            QuadElem d = quad_abs(layer_delta(nu, ctx, &ev));
            // triangle inequality termwise: |delta_nu| <= 2 i sup|layer nu|
            QuadElem cap = sys_.sup_layer(nu) * Rat(2) * Rat(ctx.i);
            termwise_ok = termwise_ok && quad_leq(d, cap);
            per_layer.push_back(json{{"nu", nu}, {"abs_delta", to_json(d)}});
            explicit_part += d;
        }
        QuadElem allowance = sys_.tail_bound(N_) * Rat(2) * Rat(ctx.i);
        r.evaluator = ev;
        r.lhs = explicit_part + allowance;
        r.rhs = sys_.params().alpha_pow(2) * Rat(4);  // 4 c^{-2}
        r.margin = r.rhs - r.lhs;
        r.details = json{{"explicit", to_json(explicit_part)},
                         {"tail_allowance", to_json(allowance)},
                         {"per_layer", std::move(per_layer)},
                         {"termwise_bound_ok", termwise_ok}};
        if (!termwise_ok)
            r.verdict = Verdict::fail;
        else
            r.verdict = quad_sign(r.margin) > 0 ? Verdict::pass : Verdict::out_of_regime;
        return r;
    }

    // Layers 1..n-2: the accumulated difference stays below 5 c^{-2}, each
    // layer obeys the Lipschitz bound 2 q_{nu+1} |x|, and (optionally) the
    // first-return claim behind that bound is brute-checked for small nu.
    PropCheckResult check_low_layers(const CheckContext& ctx, int brute_max_nu = 0,
                                     const Int& brute_guard = Int(5000000)) const {
        PropCheckResult r = base_result("low-layers", ctx);
        QuadElem sum = sys_.params().zero();
        QuadElem norm_x = circle_norm(ctx.x);
        bool per_layer_ok = true;
        bool brute_ok = true;
        json per_layer = json::array();
        std::string ev = ctx.n < 3 ? "vacuous" : "";
        for (int nu = 1; nu <= ctx.n - 2; ++nu) {
            QuadElem d = layer_delta(nu, ctx, &ev);
            QuadElem cap = norm_x * Rat(2) * Rat(sys_.q(nu + 1));
            per_layer_ok = per_layer_ok && quad_leq(quad_abs(d), cap);
            json entry{{"nu", nu}, {"abs_delta", to_json(quad_abs(d))},
                       {"lipschitz_cap", to_json(cap)}};
            if (nu <= brute_max_nu) {
                auto ret = first_return_bound(ctx.n, nu, brute_guard);
                entry["first_return_bound"] = ret.second.get_str();
                entry["first_return_ok"] = ret.first;
                brute_ok = brute_ok && ret.first;
            }
            per_layer.push_back(std::move(entry));
            sum += d;
        }
        r.evaluator = ev;
        r.lhs = quad_abs(sum);
        r.rhs = sys_.params().alpha_pow(2) * Rat(5);  // 5 c^{-2}
        r.margin = r.rhs - r.lhs;
        r.details = json{{"per_layer", std::move(per_layer)},
                         {"lipschitz_bounds_ok", per_layer_ok},
                         {"first_return_ok", brute_ok},
                         {"vacuous", ctx.n < 3}};
        if (!per_layer_ok || !brute_ok)
            r.verdict = Verdict::fail;
        else
            r.verdict = quad_sign(r.margin) > 0 ? Verdict::pass : Verdict::out_of_regime;
        return r;
    }

    // Whole truncated series: |difference| minus the tail allowance clears
    // 1/(200 c).  The component ledger re-derives the triangle inequality.
    PropCheckResult check_total_separation(const CheckContext& ctx) const {
        PropCheckResult r = base_result("total-separation", ctx);
        BirkhoffReport rx = birkhoff_fast_stack(sys_, N_, ctx.x, ctx.i);
        BirkhoffReport r0 = birkhoff_fast_stack(sys_, N_, origin(), ctx.i);
        QuadElem value = quad_abs(rx.value - r0.value);
        QuadElem allowance = rx.tail + r0.tail;
        r.evaluator = rx.evaluator;

        // component ledger
        QuadElem central = layer_delta(ctx.n - 1, ctx) + layer_delta(ctx.n, ctx) +
                           layer_delta(ctx.n + 1, ctx);
        QuadElem upper = sys_.params().zero();
        for (int nu = ctx.n + 2; nu <= N_; ++nu) upper += quad_abs(layer_delta(nu, ctx));
        QuadElem lower = sys_.params().zero();
        for (int nu = 1; nu <= ctx.n - 2; ++nu) lower += layer_delta(nu, ctx);
        bool ledger_ok = quad_leq(quad_abs(central) - upper - quad_abs(lower), value);

        r.lhs = value - allowance;
        r.rhs = sys_.params().alpha() / Rat(200);
        r.margin = r.lhs - r.rhs;
        r.details = json{{"value", to_json(value)},
                         {"tail_allowance", to_json(allowance)},
                         {"central_block", to_json(central)},
                         {"upper_explicit", to_json(upper)},
                         {"lower_sum", to_json(lower)},
                         {"ledger_ok", ledger_ok}};
        if (!ledger_ok)
            r.verdict = Verdict::fail;
        else
            r.verdict = quad_sign(r.margin) > 0 ? Verdict::pass : Verdict::out_of_regime;
        return r;
    }

    // Brute coverage check of the first-return claim: every point of the
    // shrunk base union returns within 2 q_{nu+1} steps.  Returns (ok, bound
    // used).  Cost is linear in the bound, so it is guarded.
    std::pair<bool, Int> first_return_bound(int n, int nu, const Int& guard) const {
        const RotationParams& P = sys_.params();
        Int bound = sys_.q(nu + 1) * 2;
        if (bound > guard) throw guard_error("first_return_bound: enumeration exceeds guard");
        // the base union I_nu u I_{nu+1} as one arc, shrunk by h at both ends
        QuadElem h = P.alpha_pow(n + 1) / Rat(2);
        CircleInterval Inu = base_interval(P, nu);
        CircleInterval Inu1 = base_interval(P, nu + 1);
        CirclePoint left = base_side(P, nu) > 0 ? Inu1.left() : Inu.left();
        QuadElem len = Inu.length() + Inu1.length() - h * Rat(2);
        if (quad_sign(len) <= 0)
            throw std::invalid_argument("first_return_bound: shrink exceeds the interval");
        CirclePoint wleft = circle_add(left, h);

        // uncovered sublist of [0, len], chipped away by R^{-t}(W) /\ W
        std::vector<std::pair<QuadElem, QuadElem>> uncovered{{P.zero(), len}};
        CirclePoint shifted = wleft;
        for (Int t = 1; t <= bound; ++t) {
            shifted = circle_add(shifted, -P.alpha());
            QuadElem o = circle_sub(shifted, wleft).value();
            // covered pieces in offset space
            std::vector<std::pair<QuadElem, QuadElem>> covered;
            if (quad_leq(o, len)) covered.push_back({o, quad_min(o + len, len)});
            QuadElem wrap = o + len - P.one();
            if (quad_sign(wrap) > 0) covered.push_back({P.zero(), quad_min(wrap, len)});
            for (const auto& c : covered) {
                std::vector<std::pair<QuadElem, QuadElem>> next;
                for (const auto& u : uncovered) {
                    // u minus c
                    if (quad_leq(c.second, u.first) || quad_leq(u.second, c.first)) {
                        next.push_back(u);
                        continue;
                    }
                    if (quad_less(u.first, c.first)) next.push_back({u.first, c.first});
                    if (quad_less(c.second, u.second)) next.push_back({c.second, u.second});
                }
                uncovered = std::move(next);
            }
            if (uncovered.empty()) return {true, bound};
        }
        return {false, bound};
    }

  private:
    CirclePoint origin() const { return CirclePoint(sys_.params().zero()); }

    PropCheckResult base_result(const std::string& id, const CheckContext& ctx) const {
        PropCheckResult r;
        r.id = id;
        r.a = sys_.params().a();
        r.n = ctx.n;
        r.N = N_;
        r.i = ctx.i;
        r.lhs = sys_.params().zero();
        r.rhs = sys_.params().zero();
        r.margin = sys_.params().zero();
        r.inputs = json{{"x", to_json(ctx.x)}, {"sample", ctx.sample}};
        return r;
    }

    const LayerSystem& sys_;
    int N_;
    Int naive_cap_;
};

// ---------------------------------------------------------------------------
// Separation of nearby pairs via transport: given x and a gap r inside the
// covered windows, pick the comparison point of the matching window level,
// move x close to it along the orbit (the rotation count comes from the
// greedy expansion of the displacement over the signed returns), and verify
// the dichotomy directly with exact margins.
// ---------------------------------------------------------------------------

struct TransportWitness {
    bool separated = false;
    int window_level = 0;
    Int transport_q;       // orbit steps moving x next to the window point
    Int compare_m;         // iterate count of the window level
    QuadElem base_margin;  // margin of the canonical pair (x_r, x_r + r)
    QuadElem margin_q;     // margin of |T^(q)(x+r) - T^(q)(x)| after tails
    QuadElem margin_mq;    // margin at m + q
    QuadElem achieved;     // max of the two
    QuadElem transport_error;
};

inline int window_level_for(const RotationParams& params, const QuadElem& r, int max_level) {
    if (quad_sign(r) <= 0) throw std::invalid_argument("window_level_for: r must be positive");
    for (int n = 1; n <= max_level; ++n) {
        if (quad_leq(params.alpha_pow(n + 2) / Rat(2), r) &&
            quad_leq(r, params.alpha_pow(n + 1) / Rat(2)))
            return n;
    }
    throw std::invalid_argument("window_level_for: r outside the covered windows");
}

inline TransportWitness separation_scan(const LayerSystem& sys, int N, const CirclePoint& x,
                                        const QuadElem& r, const Int& search_depth) {
    const RotationParams& P = sys.params();
    TransportWitness w;
    w.window_level = window_level_for(P, r, N - 2);
    const int n = w.window_level;
    auto cvs = convergents(P, n + 1);
    w.compare_m = cvs[static_cast<size_t>(n + 1)].q / 2;

    // canonical pair {0, point of J_n at distance r}, oriented so the second
    // element is the first plus r
    int side = base_side(P, n);
    CirclePoint jpoint = side > 0 ? CirclePoint(P.from_rat(Rat(0)) + r) : circle_reduce(-r);
    if (!probe_window(P, n).contains(jpoint))
        throw std::logic_error("window point escaped the probe window");
    CirclePoint base_lo = side > 0 ? CirclePoint(P.zero()) : jpoint;

    QuadElem tailN = sys.tail_bound(N);
    auto stack_margin = [&](const CirclePoint& lo, const Int& i) {
        BirkhoffReport ra = birkhoff_fast_stack(sys, N, circle_add(lo, r), i);
        BirkhoffReport rb = birkhoff_fast_stack(sys, N, lo, i);
        return quad_abs(ra.value - rb.value) - (ra.tail + rb.tail);
    };
    w.base_margin = stack_margin(base_lo, w.compare_m);
    if (quad_sign(w.base_margin) <= 0) {
        w.separated = false;
        return w;
    }

    // transport x next to base_lo: find q with |x + q*alpha - base_lo| small
    CirclePoint disp = circle_sub(base_lo, x);
    QuadElem target = w.base_margin / (Rat(12) * Rat(N) * Rat(w.compare_m));
    PointApprox pa{Int(0), P.zero()};
    if (!disp.value().is_zero()) {
        int depth = n + 2;
        const int depth_cap = 4 * (N + 4);
        for (;;) {
            pa = ostrowski_point_approx(P, disp, depth);
            if (quad_less(pa.error, target) || depth >= depth_cap) break;
            ++depth;
        }
        if (!quad_less(pa.error, target))
            throw std::logic_error("transport failed to reach the window point");
    }
    if (pa.m > search_depth) {
        w.separated = false;
        w.transport_q = pa.m;
        return w;
    }
    w.transport_q = pa.m;
    w.transport_error = pa.error;

    w.margin_q = stack_margin(x, w.transport_q);
    w.margin_mq = stack_margin(x, w.transport_q + w.compare_m);
    w.achieved = quad_max(w.margin_q, w.margin_mq);
    w.separated = quad_sign(w.achieved) > 0;
    return w;
}

struct SeparationCertificate {
    bool all_separated = false;
    QuadElem delta;  // one third of the smallest achieved margin
    json grid;
    json worst_pair;
    std::vector<json> pair_reports;
};

inline SeparationCertificate separation_certificate(const LayerSystem& sys, int N,
                                                    const std::vector<int>& levels,
                                                    int pairs_per_level, std::uint64_t seed,
                                                    const Int& search_depth) {
    const RotationParams& P = sys.params();
    RatSampler rng(seed);
    SeparationCertificate cert;
    cert.all_separated = true;
    cert.grid = json{{"levels", levels}, {"pairs_per_level", pairs_per_level}, {"seed", seed}};
    bool first = true;
    QuadElem worst = P.zero();
    for (int n : levels) {
        QuadElem lo = P.alpha_pow(n + 2) / Rat(2);
        QuadElem hi = P.alpha_pow(n + 1) / Rat(2);
        for (int k = 0; k < pairs_per_level; ++k) {
            QuadElem r = lo + (hi - lo) * rng.unit();
            CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
            TransportWitness w = separation_scan(sys, N, x, r, search_depth);
            json rep{{"level", n},
                     {"x", to_json(x)},
                     {"r", to_json(r)},
                     {"separated", w.separated},
                     {"q", w.transport_q.get_str()},
                     {"m", w.compare_m.get_str()},
                     {"margin_q", to_json(w.margin_q)},
                     {"margin_mq", to_json(w.margin_mq)},
                     {"achieved", to_json(w.achieved)}};
            cert.pair_reports.push_back(rep);
            cert.all_separated = cert.all_separated && w.separated;
            if (w.separated && (first || quad_less(w.achieved, worst))) {
                worst = w.achieved;
                cert.worst_pair = rep;
                first = false;
            }
            if (!w.separated) {
                cert.worst_pair = rep;
                worst = P.zero();
                first = false;
            }
        }
    }
    cert.delta = worst / Rat(3);
    return cert;
}

inline json to_json(const SeparationCertificate& cert) {
    return json{{"all_separated", cert.all_separated},
                {"delta", to_json(cert.delta)},
                {"grid", cert.grid},
                {"worst_pair", cert.worst_pair},
                {"pairs", cert.pair_reports}};
}

}  // namespace kinexp

#endif  // KINEXP_CHECKS_HPP
