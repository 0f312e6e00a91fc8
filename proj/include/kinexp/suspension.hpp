#ifndef KINEXP_SUSPENSION_HPP
#define KINEXP_SUSPENSION_HPP

#include <optional>
#include <string>
#include <vector>

#include "kinexp/checks.hpp"

namespace kinexp {

// The positivized roof: offset + (layers 1..N).  Backed either by the
// materialized PLFunction (exact minimum, offset makes min = 1) or by the
// implicit layer stack with a certified offset 1 + sum of layer sups, which
// keeps the roof >= 1 everywhere without materializing anything.
class RoofFunction {
  public:
    static RoofFunction from_stack(const LayerSystem& sys, int N) {
        RoofFunction roof(sys, N);
        roof.offset_ = sys.params().one() + sys.sup_stack_bound(N);
        return roof;
    }

    static RoofFunction from_pl(const LayerSystem& sys, int N,
                                const Int& guard = Int(3000000)) {
        RoofFunction roof(sys, N);
        auto [pl, tail] = build_series(sys, N, guard);
        auto [pos, offset] = positivize(pl);
        roof.pl_ = std::move(pos);
        roof.offset_ = offset;
        return roof;
    }

    const LayerSystem& sys() const { return *sys_; }
    int N() const { return N_; }
    const QuadElem& offset() const { return offset_; }
    bool materialized() const { return pl_.has_value(); }

    QuadElem eval(const CirclePoint& y) const {
        if (pl_) return pl_->eval(y);
        return offset_ + sys_->eval_stack(N_, y);
    }

    // Exact k-step Birkhoff sum of the roof (k may be negative:
    // sum_{-k..-1} with the inverse rotation).
    QuadElem birkhoff(const CirclePoint& y, const Int& k) const {
        if (k >= 0) {
            QuadElem stack = birkhoff_fast_stack(*sys_, N_, y, k).value;
            return offset_ * Rat(k) + stack;
        }
        Int m = -k;
        CirclePoint base = rotate(y, k);
        return -birkhoff(base, m);
    }

    // Certified positive lower bound for the roof.
    QuadElem lower_bound() const {
        if (pl_) return sys_->params().one();
        return sys_->params().one();  // offset = 1 + sup bound
    }

    // Upper bound for crossing-count brackets.
    QuadElem upper_bound() const {
        return offset_ + sys_->sup_stack_bound(N_);
    }

  private:
    RoofFunction(const LayerSystem& sys, int N) : sys_(&sys), N_(N) { sys.check_N(N); }

    const LayerSystem* sys_;
    int N_ = 1;
    QuadElem offset_;
    std::optional<PLFunction> pl_;
};

// A point of the mapping torus in its fundamental domain: 0 <= s < roof(y).
struct MappingTorusPoint {
    CirclePoint y;
    QuadElem s;
};

inline json to_json(const MappingTorusPoint& p) {
    return json{{"y", to_json(p.y)}, {"s", to_json(p.s)}};
}

// The suspension flow over the rotation with the positivized roof: the
// vertical flow on (circle x R) / <(y, s) ~ (R y, s - roof(y))>.
class SuspensionFlow {
  public:
    explicit SuspensionFlow(const RoofFunction& roof) : roof_(&roof) {}

    const RoofFunction& roof() const { return *roof_; }

    // Applies the deck map or its inverse until 0 <= s < roof(y).
    MappingTorusPoint normalize(CirclePoint y, QuadElem s) const {
        while (quad_sign(s) < 0) {
            y = rotate(y, Int(-1));
            s += roof_->eval(y);
        }
        for (;;) {
            QuadElem h = roof_->eval(y);
            if (quad_less(s, h)) break;
            s -= h;
            y = rotate(y, Int(1));
        }
        return {std::move(y), std::move(s)};
    }

    MappingTorusPoint flow(const MappingTorusPoint& p, const QuadElem& t) const {
        return normalize(p.y, p.s + t);
    }
    MappingTorusPoint flow(const MappingTorusPoint& p, const Rat& t) const {
        return flow(p, roof_->sys().params().from_rat(t));
    }

    // Largest k >= 0 with roof^{(k)}(y) <= t (number of section crossings of
    // the orbit of (y, 0) within time t >= 0).  A hint turns the bracketed
    // binary search into a constant-width scan.
    Int crossings(const CirclePoint& y, const QuadElem& t, const Int* hint = nullptr) const {
        if (quad_sign(t) < 0) throw std::invalid_argument("crossings: negative time");
        auto reaches = [&](const Int& k) { return quad_leq(roof_->birkhoff(y, k), t); };
        if (hint != nullptr) {
            Int k = *hint - 3;
            if (k < 0) k = 0;
            if (!reaches(k)) throw std::logic_error("crossings: hint too high");
            while (reaches(k + 1)) k += 1;
            return k;
        }
        // bracket: lower/upper roof bounds sandwich the crossing count
        Int lo = quad_floor(t / roof_->upper_bound());
        Int hi = quad_floor(t / roof_->lower_bound()) + 1;
        if (!reaches(lo)) throw std::logic_error("crossings: bracket failure");
        while (lo + 1 <= hi) {
            if (hi - lo <= 8) {
                while (reaches(lo + 1)) lo += 1;
                return lo;
            }
            Int mid = (lo + hi) / 2;
            if (reaches(mid))
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    // Comparator metric on the quotient: the product distance between lifts,
    // minimized over deck shifts F^k of the second point, |k| <= K.  Zero iff
    // the points coincide (for K large enough to reach the identification).
    QuadElem quotient_dist(const MappingTorusPoint& p, const MappingTorusPoint& q, int K) const {
        if (K < 1) throw std::invalid_argument("quotient_dist: K >= 1");
        const RotationParams& P = roof_->sys().params();
        std::optional<QuadElem> best;
        for (int k = -K; k <= K; ++k) {
            CirclePoint yk = rotate(q.y, Int(k));
            QuadElem sk = q.s - roof_->birkhoff(q.y, Int(k));
            QuadElem dy = circle_dist(p.y, yk);
            QuadElem ds = quad_abs(p.s - sk);
            QuadElem cand = quad_max(dy, ds);
            if (!best || quad_less(cand, *best)) best = cand;
        }
        (void)P;
        return *best;
    }

  private:
    const RoofFunction* roof_;
};

// Monte-Carlo evidence for the flow-level separation property: sampled pairs
// either separate at some tested forward time (with an exact distance
// witness) or are explicit time-shifts within epsilon of each other.
struct ProbeResult {
    Rat epsilon;
    QuadElem delta;          // empirical delta(epsilon): min separation over probed pairs
    Rat delta_rational;      // rational lower approximation of delta
    std::uint64_t seed = 0;
    int samples = 0;
    int separated = 0;
    int reparam_close = 0;
    int unresolved = 0;
    int section_pairs = 0;
    int section_pairs_separated = 0;
    json worst_pair;
    std::vector<json> rows;
};

inline json to_json(const ProbeResult& pr) {
    json rows = json::array();
    for (const auto& r : pr.rows) rows.push_back(r);
    return json{{"epsilon", rat_to_string(pr.epsilon)},
                {"delta", to_json(pr.delta)},
                {"delta_rational", rat_to_string(pr.delta_rational)},
                {"seed", pr.seed},
                {"samples", pr.samples},
                {"separated", pr.separated},
                {"reparam_close", pr.reparam_close},
                {"unresolved", pr.unresolved},
                {"section_pairs", pr.section_pairs},
                {"section_pairs_separated", pr.section_pairs_separated},
                {"worst_pair", pr.worst_pair},
                {"pairs", std::move(rows)}};
}

// Rational lower approximation (display / certificate convenience).
inline Rat rational_floor(const QuadElem& x, const Int& den) {
    Int num = quad_floor(x * Rat(den));
    Rat out(num, den);
    out.canonicalize();
    return out;
}

struct ProbeOptions {
    Rat epsilon = Rat(1, 10);
    int section_pairs_per_level = 10;
    std::vector<int> window_levels = {1, 2};
    int random_pairs = 20;
    int orbit_pairs = 5;
    int horizon_hits = 12;  // forward section hits tested for generic pairs
    std::uint64_t seed = 1;
    Int search_depth = Int("100000000000000000000000000000000000000");
    int deck_window = 3;
};

inline ProbeResult expansiveness_probe(const SuspensionFlow& flow, const ProbeOptions& opt) {
    const RoofFunction& roof = flow.roof();
    const LayerSystem& sys = roof.sys();
    const RotationParams& P = sys.params();
    RatSampler rng(opt.seed);
    ProbeResult pr;
    pr.epsilon = opt.epsilon;
    pr.seed = opt.seed;

    std::optional<QuadElem> min_sep;
    auto note_separation = [&](const QuadElem& d, const json& row) {
        if (!min_sep || quad_less(d, *min_sep)) {
            min_sep = d;
            pr.worst_pair = row;
        }
    };

    // (i) cross-section pairs in the covered windows: the transport scan
    // supplies the separating iterate, the flow distance is then verified at
    // the corresponding section hit of the first point.
    for (int n : opt.window_levels) {
        QuadElem lo = P.alpha_pow(n + 2) / Rat(2);
        QuadElem hi = P.alpha_pow(n + 1) / Rat(2);
        for (int k = 0; k < opt.section_pairs_per_level; ++k) {
            pr.section_pairs += 1;
            pr.samples += 1;
            QuadElem r = lo + (hi - lo) * rng.unit();
            CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
            TransportWitness w = separation_scan(sys, roof.N(), x, r, opt.search_depth);
            json row{{"kind", "section"},
                     {"x", to_json(x)},
                     {"r", to_json(r)},
                     {"window", w.window_level}};
            if (!w.separated) {
                pr.unresolved += 1;
                row["separated"] = false;
                pr.rows.push_back(row);
                continue;
            }
            Int witness = quad_leq(w.margin_mq, w.margin_q)
                              ? w.transport_q
                              : Int(w.transport_q + w.compare_m);
            // flow both points to the witness section hit of the first
            QuadElem t = roof.birkhoff(x, witness);
            MappingTorusPoint p1{rotate(x, witness), P.zero()};
            CirclePoint x2 = circle_add(x, r);
            Int k2 = flow.crossings(x2, t, &witness);
            MappingTorusPoint p2{rotate(x2, k2), t - roof.birkhoff(x2, k2)};
            QuadElem d = flow.quotient_dist(p1, p2, opt.deck_window);
            bool sep = quad_sign(d) > 0 && quad_leq(w.achieved, d);
            row["separated"] = sep;
            row["time"] = quad_to_decimal(t);
            row["distance"] = to_json(d);
            if (sep) {
                pr.separated += 1;
                pr.section_pairs_separated += 1;
                note_separation(d, row);
            } else {
                pr.unresolved += 1;
            }
            pr.rows.push_back(std::move(row));
        }
    }

    // (ii) explicit time-shift pairs inside epsilon: never counterexamples,
    // reported as reparameterization-close
    for (int k = 0; k < opt.orbit_pairs; ++k) {
        pr.samples += 1;
        CirclePoint y = circle_reduce(P.from_rat(rng.unit()));
        MappingTorusPoint p1 = flow.normalize(y, P.from_rat(rng.unit()));
        Rat shift = opt.epsilon * rng.unit();
        MappingTorusPoint p2 = flow.flow(p1, shift);
        pr.reparam_close += 1;
        pr.rows.push_back(json{{"kind", "orbit-shift"},
                               {"shift", rat_to_string(shift)},
                               {"y", to_json(p1.y)},
                               {"reparam_close", true}});
    }

    // (iii) generic random pairs: separation at sampled forward section hits
    for (int k = 0; k < opt.random_pairs; ++k) {
        pr.samples += 1;
        MappingTorusPoint p1 =
            flow.normalize(circle_reduce(P.from_rat(rng.unit())), P.from_rat(rng.unit()));
        MappingTorusPoint p2 =
            flow.normalize(circle_reduce(P.from_rat(rng.unit())), P.from_rat(rng.unit()));
        QuadElem best = P.zero();
        QuadElem t_best = P.zero();
        for (int j = 0; j <= opt.horizon_hits; ++j) {
            QuadElem t = roof.birkhoff(p1.y, Int(j)) - p1.s;
            if (quad_sign(t) < 0) continue;
            MappingTorusPoint q1{rotate(p1.y, Int(j)), P.zero()};
            Int k2 = flow.crossings(p2.y, p2.s + t);
            MappingTorusPoint q2{rotate(p2.y, k2), p2.s + t - roof.birkhoff(p2.y, k2)};
            QuadElem d = flow.quotient_dist(q1, q2, opt.deck_window);
            if (quad_less(best, d)) {
                best = d;
                t_best = t;
            }
        }
        json row{{"kind", "random"},
                 {"max_distance", to_json(best)},
                 {"at_time", quad_to_decimal(t_best)}};
        if (quad_sign(best) > 0) {
            pr.separated += 1;
            row["separated"] = true;
            note_separation(best, row);
        } else {
            pr.unresolved += 1;
            row["separated"] = false;
        }
        pr.rows.push_back(std::move(row));
    }

    QuadElem eps_elem = P.from_rat(pr.epsilon);
    pr.delta = min_sep ? quad_min(*min_sep, eps_elem) : P.zero();
    pr.delta_rational = rational_floor(pr.delta, Int("1" + std::string(40, '0')));
    return pr;
}

}  // namespace kinexp

#endif  // KINEXP_SUSPENSION_HPP
