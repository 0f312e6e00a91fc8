#ifndef KINEXP_TOWER_HPP
#define KINEXP_TOWER_HPP

#include <algorithm>
#include <vector>

#include "kinexp/convergents.hpp"
#include "kinexp/jsonio.hpp"
#include "kinexp/quad_field.hpp"

namespace kinexp {

// Closed arc from `left` of the given positive-orientation length.
class CircleInterval {
  public:
    CircleInterval() = default;
    CircleInterval(CirclePoint left, QuadElem length)
        : left_(std::move(left)), length_(std::move(length)) {
        if (quad_sign(length_) <= 0 ||
            !quad_less(length_, QuadElem(length_.a(), Rat(1), Rat(0))))
            throw std::domain_error("interval length must lie in (0,1)");
    }

    const CirclePoint& left() const { return left_; }
    const QuadElem& length() const { return length_; }
    CirclePoint right() const { return circle_add(left_, length_); }

    // Positive-orientation offset of z from the left endpoint.
    QuadElem offset(const CirclePoint& z) const { return circle_sub(z, left_).value(); }

    bool contains(const CirclePoint& z) const { return quad_leq(offset(z), length_); }
    bool contains_interior(const CirclePoint& z) const {
        QuadElem d = offset(z);
        return quad_sign(d) > 0 && quad_less(d, length_);
    }

    CirclePoint midpoint() const { return circle_add(left_, length_ / Rat(2)); }

  private:
    CirclePoint left_;
    QuadElem length_;
};

inline CirclePoint rotate(const CirclePoint& x, const Int& k) {
    return circle_add(x, QuadElem(x.a(), Rat(0), Rat(k)));
}

// I_n: the smaller closed arc bounded by 0 and q_n*alpha.  Its length is
// |q_n alpha - p_n| = alpha^{n+1}, and which side of 0 it sits on is decided
// by the exact sign of the displacement.
inline CircleInterval base_interval(const RotationParams& params, int n) {
    if (n < 0) throw std::invalid_argument("base_interval: n >= 0");
    auto cvs = convergents(params, n < 1 ? 1 : n);
    QuadElem disp = return_displacement(params, cvs[static_cast<size_t>(n)]);
    int side = quad_sign(disp);
    QuadElem len = side > 0 ? disp : -disp;
    CirclePoint left = side > 0 ? CirclePoint(params.zero()) : circle_reduce(disp);
    return CircleInterval(std::move(left), std::move(len));
}

inline int base_side(const RotationParams& params, int n) {
    auto cvs = convergents(params, n < 1 ? 1 : n);
    return return_side(params, cvs[static_cast<size_t>(n)]);
}

// J_n: the sub-arc of I_n between the midpoint of I_n (at half the signed
// displacement of level n) and minus half the signed displacement of level
// n+1.  Every x in J_n has alpha^{n+2}/2 <= |x| <= alpha^{n+1}/2.
inline CircleInterval probe_window(const RotationParams& params, int n) {
    if (n < 1) throw std::invalid_argument("probe_window: n >= 1");
    auto cvs = convergents(params, n + 1);
    QuadElem disp_n = return_displacement(params, cvs[static_cast<size_t>(n)]);
    QuadElem disp_n1 = return_displacement(params, cvs[static_cast<size_t>(n + 1)]);
    QuadElem len = (quad_abs(disp_n) - quad_abs(disp_n1)) / Rat(2);
    int side = quad_sign(disp_n);
    CirclePoint left = side > 0 ? circle_reduce(-disp_n1 / Rat(2)) : circle_reduce(disp_n / Rat(2));
    return CircleInterval(std::move(left), std::move(len));
}

// One floor of a Rokhlin tower: the index-th rotation image of the long or
// short base.
struct TowerFloor {
    bool from_long_base;
    Int index;
    CircleInterval interval;
};

struct TowerPartition {
    int level = 0;
    CircleInterval base_long;   // I_n
    CircleInterval base_short;  // I_{n+1}
    std::vector<TowerFloor> floors;
};

// The exact identity q_{n+1}|I_n| + q_n|I_{n+1}| = 1, checked without
// enumerating floors (valid at any level).
inline bool partition_identity(const RotationParams& params, int n) {
    auto cvs = convergents(params, n + 1);
    QuadElem lhs = base_interval(params, n).length() * Rat(cvs[static_cast<size_t>(n + 1)].q) +
                   base_interval(params, n + 1).length() * Rat(cvs[static_cast<size_t>(n)].q);
    return lhs == params.one();
}

// Materializes the level-n tower: q_{n+1} rotations of I_n plus q_n rotations
// of I_{n+1}.  Verifies exactly that the floors tile the circle: sorted by
// left endpoint they chain with zero gaps and their lengths sum to 1.
inline TowerPartition tower_partition(const RotationParams& params, int n,
                                      const Int& guard = Int(1000000)) {
    auto cvs = convergents(params, n + 1);
    const Int& q_long = cvs[static_cast<size_t>(n + 1)].q;
    const Int& q_short = cvs[static_cast<size_t>(n)].q;
    if (q_long + q_short > guard)
        throw guard_error("tower_partition: floor count exceeds enumeration guard");

    TowerPartition part;
    part.level = n;
    part.base_long = base_interval(params, n);
    part.base_short = base_interval(params, n + 1);
    part.floors.reserve(static_cast<size_t>(mpz_get_ui(Int(q_long + q_short).get_mpz_t())));
    CirclePoint pl = part.base_long.left();
    for (Int u = 0; u < q_long; ++u) {
        part.floors.push_back({true, u, CircleInterval(pl, part.base_long.length())});
        pl = circle_add(pl, params.alpha());
    }
    CirclePoint ps = part.base_short.left();
    for (Int u = 0; u < q_short; ++u) {
        part.floors.push_back({false, u, CircleInterval(ps, part.base_short.length())});
        ps = circle_add(ps, params.alpha());
    }

    std::sort(part.floors.begin(), part.floors.end(), [](const TowerFloor& a, const TowerFloor& b) {
        return circle_less(a.interval.left(), b.interval.left());
    });
    QuadElem total = params.zero();
    for (size_t i = 0; i < part.floors.size(); ++i) {
        total += part.floors[i].interval.length();
        const CirclePoint next_left = part.floors[(i + 1) % part.floors.size()].interval.left();
        if (part.floors[i].interval.right() != next_left)
            throw std::logic_error("tower floors do not chain");
    }
    if (total != params.one()) throw std::logic_error("tower floor lengths do not sum to 1");
    return part;
}

inline json to_json(const CircleInterval& I) {
    return json{{"left", to_json(I.left())}, {"right", to_json(I.right())},
                {"length", to_json(I.length())}};
}

inline CircleInterval interval_from_json(const json& j) {
    return CircleInterval(circle_from_json(j.at("left")), quad_from_json(j.at("length")));
}

inline json to_json(const TowerPartition& part) {
    json floors = json::array();
    for (const auto& f : part.floors)
        floors.push_back(json{{"base", f.from_long_base ? "long" : "short"},
                              {"index", f.index.get_str()},
                              {"interval", to_json(f.interval)}});
    return json{{"level", part.level},
                {"base_long", to_json(part.base_long)},
                {"base_short", to_json(part.base_short)},
                {"floors", std::move(floors)}};
}

// ---------------------------------------------------------------------------
// Tower coordinates.
//
// locate_profile finds, for every level v <= max_level, which floor of the
// level-v tower a point sits in.  Positions are kept in a side-normalized
// ("canonical") chart in which I_v = [0, L_v] with L_v = alpha^{v+1} and
// I_{v+1} = [-L_{v+1}, 0]; multiplying by the side of I_v maps back to the
// signed position on the circle.  In this chart the backward induced map of
// the level-v tower is
//     w in [-L_{v+1}, (1-alpha) L_v]  ->  w + alpha L_v   (q_{v+1} steps)
//     w in ((1-alpha) L_v, L_v]       ->  w - L_v         (q_v steps)
// so the first backward visit to I_{v+1} u I_{v+2} from a long base needs at
// most one wrap, and the number of long back-steps is a single exact floor.
// This makes locating O(1) field operations per level.
// ---------------------------------------------------------------------------

struct FloorCoord {
    bool is_long = true;  // floor of the long stack (base I_v) or short (base I_{v+1})
    Int index;            // rotation count from the base
    QuadElem canon;       // canonical base position: long in [0, L_v], short in [-L_{v+1}, 0]
};

struct TowerProfile {
    std::vector<FloorCoord> coords;  // coords[v] = floor data at level v
};

// Trapezoid value of the unit bump over [0, L] at canonical offset d in [0,L].
inline QuadElem bump_canonical(const QuadElem& L, const QuadElem& d) {
    QuadElem third = L / Rat(3);
    if (quad_leq(d, third)) return d;
    if (quad_leq(d, third * Rat(2))) return third;
    return L - d;
}

class TowerLocator {
  public:
    TowerLocator(const RotationParams& params, int max_level)
        : params_(params), max_level_(max_level), cvs_(convergents(params, max_level + 2)) {}

    const RotationParams& params() const { return params_; }
    int max_level() const { return max_level_; }
    const std::vector<Convergent>& cvs() const { return cvs_; }
    const Int& q(int k) const { return cvs_[static_cast<size_t>(k)].q; }

    TowerProfile locate(const CirclePoint& z) const {
        TowerProfile prof;
        prof.coords.reserve(static_cast<size_t>(max_level_) + 1);
        prof.coords.push_back(locate_level0(z));
        for (int v = 0; v < max_level_; ++v)
            prof.coords.push_back(descend(prof.coords.back(), v));
        return prof;
    }

    // Canonical chart data for one level.
    QuadElem level_length(int v) const { return params_.alpha_pow(v + 1); }

  private:
    FloorCoord locate_level0(const CirclePoint& z) const {
        const long a = params_.a();
        FloorCoord fc;
        Int u = quad_floor(z.value() * params_.c());
        if (u < a) {
            fc.is_long = true;
            fc.index = u;
            fc.canon = z.value() - params_.alpha() * Rat(u);
        } else {
            fc.is_long = false;
            fc.index = 0;
            fc.canon = z.value() - params_.one();  // in [-alpha^2, 0)
        }
        check_ranges(fc, 0);
        return fc;
    }

    FloorCoord descend(const FloorCoord& cur, int v) const {
        const QuadElem L = level_length(v);
        const QuadElem aL = level_length(v + 1);
        FloorCoord next;
        if (!cur.is_long) {
            next.is_long = true;
            next.index = cur.index;
            next.canon = -cur.canon;
        } else if (quad_leq(cur.canon, level_length(v + 2))) {
            next.is_long = false;
            next.index = cur.index;
            next.canon = -cur.canon;
        } else {
            QuadElem t = ((L - aL) - cur.canon) / aL;
            Int k1 = quad_floor(t) + 1;
            if (k1 < 0) k1 = 0;
            QuadElem w = cur.canon + aL * Rat(k1) - L;  // in (-aL, 0]
            next.is_long = true;
            next.index = cur.index + k1 * q(v + 1) + q(v);
            next.canon = -w;
        }
        check_ranges(next, v + 1);
        return next;
    }

    void check_ranges(const FloorCoord& fc, int v) const {
        if (fc.is_long) {
            if (fc.index < 0 || fc.index >= q(v + 1))
                throw std::logic_error("locator: long floor index out of range");
            if (quad_sign(fc.canon) < 0 || quad_less(level_length(v), fc.canon))
                throw std::logic_error("locator: long canonical position out of range");
        } else {
            if (fc.index < 0 || fc.index >= q(v))
                throw std::logic_error("locator: short floor index out of range");
            if (quad_sign(fc.canon) > 0 || quad_less(fc.canon, -level_length(v + 1)))
                throw std::logic_error("locator: short canonical position out of range");
        }
    }

    const RotationParams& params_;
    int max_level_;
    std::vector<Convergent> cvs_;
};

}  // namespace kinexp

#endif  // KINEXP_TOWER_HPP
