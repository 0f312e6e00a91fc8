#ifndef KINEXP_CONVERGENTS_HPP
#define KINEXP_CONVERGENTS_HPP

#include <vector>

#include "kinexp/quad_field.hpp"

namespace kinexp {

// Continued-fraction convergents p_n/q_n of alpha = [0; a, a, a, ...]:
// q_{n+2} = a q_{n+1} + q_n with q_0 = 1, q_1 = a, and the same recursion for
// p with p_0 = 0, p_1 = 1.
struct Convergent {
    int n = 0;
    Int p;
    Int q;
};

inline std::vector<Convergent> convergents(const RotationParams& params, int N) {
    if (N < 1) throw std::invalid_argument("convergents: need N >= 1");
    std::vector<Convergent> out;
    out.reserve(static_cast<size_t>(N) + 1);
    out.push_back({0, Int(0), Int(1)});
    out.push_back({1, Int(1), Int(params.a())});
    for (int n = 2; n <= N; ++n) {
        Int p = Int(params.a()) * out[static_cast<size_t>(n - 1)].p + out[static_cast<size_t>(n - 2)].p;
        Int q = Int(params.a()) * out[static_cast<size_t>(n - 1)].q + out[static_cast<size_t>(n - 2)].q;
        out.push_back({n, std::move(p), std::move(q)});
    }
    return out;
}

// Signed displacement q_n*alpha - p_n of the n-th return; its absolute value
// is the circle norm of q_n*alpha and equals alpha^{n+1}.
inline QuadElem return_displacement(const RotationParams& params, const Convergent& cv) {
    return params.make(Rat(-cv.p), Rat(cv.q));
}

// Which side of 0 the n-th return lands on: +1 when q_n*alpha - p_n > 0 (the
// representative sits just right of 0), -1 otherwise.  Computed exactly,
// never from a parity convention.
inline int return_side(const RotationParams& params, const Convergent& cv) {
    int s = quad_sign(return_displacement(params, cv));
    if (s == 0) throw std::logic_error("rational return displacement");
    return s;
}

// Brute-force check of the closest-return property: |q_n alpha| < |i alpha|
// for 1 <= i <= q_n - 1.  Enumeration is guarded.
inline bool closest_return_verify(const RotationParams& params, int n,
                                  const Int& guard = Int(1000000)) {
    auto cvs = convergents(params, n < 1 ? 1 : n);
    const Int& qn = cvs[static_cast<size_t>(n)].q;
    if (qn > guard)
        throw guard_error("closest_return_verify: q_n exceeds enumeration guard");
    CirclePoint qn_alpha = circle_reduce(params.alpha() * Rat(qn));
    QuadElem best = circle_norm(qn_alpha);
    CirclePoint pt(params.zero());
    for (Int i = 1; i < qn; ++i) {
        pt = circle_add(pt, params.alpha());
        if (!quad_less(best, circle_norm(pt))) return false;
    }
    return true;
}

// Greedy Ostrowski digits of a nonnegative integer over the q_k: i = sum of
// b_k q_k with 0 <= b_k <= a and every prefix sum below q_{k+1}.
struct OstrowskiRep {
    Int i;
    std::vector<long> digits;  // digits[k] multiplies q_k
};

inline OstrowskiRep ostrowski(const RotationParams& params, const Int& i) {
    if (i < 0) throw std::invalid_argument("ostrowski: negative input");
    OstrowskiRep rep;
    rep.i = i;
    int K = 1;
    {
        auto cvs = convergents(params, 1);
        while (cvs.back().q <= i) {
            ++K;
            cvs = convergents(params, K);
        }
    }
    auto cvs = convergents(params, K);
    rep.digits.assign(static_cast<size_t>(K) + 1, 0);
    Int rem = i;
    for (int k = K; k >= 0; --k) {
        Int d = rem / cvs[static_cast<size_t>(k)].q;
        rep.digits[static_cast<size_t>(k)] = d.get_si();
        rem -= d * cvs[static_cast<size_t>(k)].q;
    }
    return rep;
}

inline Int ostrowski_value(const RotationParams& params, const OstrowskiRep& rep) {
    auto cvs = convergents(params, static_cast<int>(rep.digits.size()));
    Int v = 0;
    for (size_t k = 0; k < rep.digits.size(); ++k) v += Int(rep.digits[k]) * cvs[k].q;
    return v;
}

// Finds a rotation count m >= 0 with m*alpha close to the displacement d on
// the circle, by greedy expansion of d over the signed returns
// q_k alpha - p_k = (-1)^k alpha^{k+1}.  The returned error is exact; callers
// check it against their own tolerance and may retry with a deeper level.
struct PointApprox {
    Int m;
    QuadElem error;  // circle distance between m*alpha and d
};

inline PointApprox ostrowski_point_approx(const RotationParams& params, const CirclePoint& d,
                                          int depth) {
    if (depth < 0) throw std::invalid_argument("ostrowski_point_approx: negative depth");
    auto cvs = convergents(params, depth + 1);
    QuadElem s = d.value();  // expand the representative in [0,1)
    Int m = 0;
    for (int k = 0; k <= depth; ++k) {
        QuadElem theta = return_displacement(params, cvs[static_cast<size_t>(k)]);
        int st = quad_sign(theta);
        int ss = quad_sign(s);
        if (ss == 0) break;
        if (ss != st) continue;
        Int b = quad_floor(s / theta);  // same sign, so the ratio is >= 0
        if (b <= 0) continue;
        s = s - theta * Rat(b);
        m += b * cvs[static_cast<size_t>(k)].q;
    }
    QuadElem err = circle_dist(circle_reduce(params.alpha() * Rat(m)), d);
    return {std::move(m), std::move(err)};
}

}  // namespace kinexp

#endif  // KINEXP_CONVERGENTS_HPP
