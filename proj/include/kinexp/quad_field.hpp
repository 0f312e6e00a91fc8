#ifndef KINEXP_QUAD_FIELD_HPP
#define KINEXP_QUAD_FIELD_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kinexp/numeric.hpp"

namespace kinexp {

// Elements of Q(alpha) where alpha is the positive root of x^2 + a*x - 1,
// i.e. alpha = (-a + sqrt(a^2+4))/2, so that alpha^2 = 1 - a*alpha.  Every
// value is stored as p + q*alpha with fully reduced rationals; the
// representation of a value is unique and equality is coefficient equality.
class QuadElem {
  public:
    QuadElem() : a_(0), p_(0), q_(0) {}
    QuadElem(long a, Rat p, Rat q) : a_(a), p_(std::move(p)), q_(std::move(q)) {}

    long a() const { return a_; }
    const Rat& p() const { return p_; }
    const Rat& q() const { return q_; }

    bool is_rational() const { return q_ == 0; }
    bool is_zero() const { return p_ == 0 && q_ == 0; }

    QuadElem operator-() const { return QuadElem(a_, -p_, -q_); }

    QuadElem operator+(const QuadElem& o) const {
        check_same(o);
        return QuadElem(a_, p_ + o.p_, q_ + o.q_);
    }
    QuadElem operator-(const QuadElem& o) const {
        check_same(o);
        return QuadElem(a_, p_ - o.p_, q_ - o.q_);
    }
    QuadElem operator*(const QuadElem& o) const {
        check_same(o);
        // (p1 + q1*al)(p2 + q2*al), reducing al^2 = 1 - a*al.
        Rat qq = q_ * o.q_;
        Rat p = p_ * o.p_ + qq;
        Rat q = p_ * o.q_ + q_ * o.p_ - Rat(a_) * qq;
        return QuadElem(a_, std::move(p), std::move(q));
    }

    QuadElem operator+(const Rat& r) const { return QuadElem(a_, p_ + r, q_); }
    QuadElem operator-(const Rat& r) const { return QuadElem(a_, p_ - r, q_); }
    QuadElem operator*(const Rat& r) const { return QuadElem(a_, p_ * r, q_ * r); }
    QuadElem operator/(const Rat& r) const {
        if (r == 0) throw std::domain_error("division by zero");
        return QuadElem(a_, p_ / r, q_ / r);
    }

    QuadElem& operator+=(const QuadElem& o) { return *this = *this + o; }
    QuadElem& operator-=(const QuadElem& o) { return *this = *this - o; }
    QuadElem& operator*=(const QuadElem& o) { return *this = *this * o; }

    // Field inverse: the conjugate of p + q*al over Q is (p - a q) - q*al and
    // the rational norm is p^2 - a p q - q^2.
    QuadElem inverse() const {
        Rat norm = p_ * p_ - Rat(a_) * p_ * q_ - q_ * q_;
        if (norm == 0) {
            if (is_zero()) throw std::domain_error("inverse of zero");
            // norm vanishes only at 0 since alpha is irrational
            throw std::logic_error("vanishing norm for nonzero element");
        }
        return QuadElem(a_, (p_ - Rat(a_) * q_) / norm, -q_ / norm);
    }
    QuadElem operator/(const QuadElem& o) const { return *this * o.inverse(); }

    bool operator==(const QuadElem& o) const { return a_ == o.a_ && p_ == o.p_ && q_ == o.q_; }
    bool operator!=(const QuadElem& o) const { return !(*this == o); }

    void check_same(const QuadElem& o) const {
        if (a_ != o.a_) throw std::invalid_argument("parameter mismatch between field elements");
    }

  private:
    long a_;
    Rat p_, q_;
};

// Exact sign of p + q*alpha by rational case analysis: for q > 0 and
// t = -p/q >= 0, alpha > t iff t^2 + a*t - 1 < 0 (the defining polynomial is
// increasing right of its vertex and vanishes at alpha).
inline int quad_sign(const QuadElem& x) {
    const Rat& p = x.p();
    const Rat& q = x.q();
    if (q == 0) return sgn(p);
    if (p == 0) return sgn(q);
    int sp = sgn(p), sq = sgn(q);
    if (sp == sq) return sp;
    // Opposite signs: x = q * (alpha - t) with t = -p/q > 0.
    Rat t = -p / q;
    Rat poly = t * t + Rat(x.a()) * t - 1;
    int alpha_minus_t = -sgn(poly);
    if (alpha_minus_t == 0) throw std::logic_error("rational point equal to alpha");
    return sq * alpha_minus_t;
}

inline bool quad_less(const QuadElem& x, const QuadElem& y) { return quad_sign(x - y) < 0; }
inline bool quad_leq(const QuadElem& x, const QuadElem& y) { return quad_sign(x - y) <= 0; }

inline QuadElem quad_abs(const QuadElem& x) { return quad_sign(x) < 0 ? -x : x; }

inline const QuadElem& quad_min(const QuadElem& x, const QuadElem& y) {
    return quad_leq(x, y) ? x : y;
}
inline const QuadElem& quad_max(const QuadElem& x, const QuadElem& y) {
    return quad_leq(x, y) ? y : x;
}

namespace detail {

// Floating estimate of p + q*alpha with enough precision that the certified
// floor below rarely has to adjust.
inline mpf_class quad_approx_mpf(const QuadElem& x) {
    auto bits = [](const Rat& r) {
        return mpz_sizeinbase(r.get_num().get_mpz_t(), 2) +
               mpz_sizeinbase(r.get_den().get_mpz_t(), 2);
    };
    const mp_bitcnt_t prec = static_cast<mp_bitcnt_t>(96 + bits(x.p()) + bits(x.q()));
    mpf_class D(0, prec);
    D = Int(x.a()) * Int(x.a()) + 4;
    mpf_class root(0, prec);
    mpf_sqrt(root.get_mpf_t(), D.get_mpf_t());
    mpf_class alpha = (root - x.a()) / 2;
    return mpf_class(x.p(), prec) + mpf_class(x.q(), prec) * alpha;
}

}  // namespace detail

// Unique m with m <= x < m+1, certified by exact sign tests.  Values in
// [-2, 3) -- the common case when reducing sums of circle points -- resolve
// without any floating work; otherwise a floating estimate proposes the
// candidate and the sign tests certify (and if needed adjust) it.
inline Int quad_floor(const QuadElem& x) {
    if (x.q() == 0) {
        Int m;
        mpz_fdiv_q(m.get_mpz_t(), x.p().get_num().get_mpz_t(), x.p().get_den().get_mpz_t());
        return m;
    }
    auto shifted_sign = [&](long s) { return quad_sign(QuadElem(x.a(), x.p() - s, x.q())); };
    if (shifted_sign(-2) >= 0 && shifted_sign(3) < 0) {
        for (long m = -2; m < 3; ++m)
            if (shifted_sign(m + 1) < 0) return Int(m);
    }
    mpf_class est = detail::quad_approx_mpf(x);
    mpf_class fl;
    mpf_floor(fl.get_mpf_t(), est.get_mpf_t());
    Int m(0);
    mpz_set_f(m.get_mpz_t(), fl.get_mpf_t());
    while (quad_sign(x - QuadElem(x.a(), Rat(m), Rat(0))) < 0) m -= 1;
    while (quad_sign(x - QuadElem(x.a(), Rat(m + 1), Rat(0))) >= 0) m += 1;
    return m;
}

// Display-only decimal string.
inline std::string quad_to_decimal(const QuadElem& x, int digits = 20) {
    mpf_class f = detail::quad_approx_mpf(x);
    if (sgn(f) == 0) return quad_sign(x) == 0 ? "0" : "~0";
    mp_exp_t exp;
    std::string mant = f.get_str(exp, 10, static_cast<size_t>(digits));
    std::string sign;
    if (!mant.empty() && mant[0] == '-') {
        sign = "-";
        mant = mant.substr(1);
    }
    return sign + "0." + mant + "e" + std::to_string(exp);
}

// The rotation data for one parameter a: alpha, the growth rate c = a + alpha
// (positive root of x^2 = a x + 1, with alpha * c = 1), and the coefficients
// A, B of the denominator asymptotics q_n = A c^n + B (-1/c)^n.  sqrt(a^2+4)
// lives in the field as a + 2*alpha, so A and B are ordinary field elements.
class RotationParams {
  public:
    explicit RotationParams(long a) : a_(a) {
        if (a <= 0) throw std::invalid_argument("partial quotient must be a positive integer");
        alpha_pow_.reserve(kCachedPowers + 1);
        alpha_pow_.push_back(one());
        alpha_pow_.push_back(alpha());
        for (int k = 2; k <= kCachedPowers; ++k)
            alpha_pow_.push_back(alpha_pow_[k - 1] * alpha());
    }

    long a() const { return a_; }
    Int discriminant() const { return Int(a_) * Int(a_) + 4; }

    QuadElem make(Rat p, Rat q) const { return QuadElem(a_, std::move(p), std::move(q)); }
    QuadElem from_rat(Rat p) const { return QuadElem(a_, std::move(p), Rat(0)); }
    QuadElem zero() const { return make(0, 0); }
    QuadElem one() const { return make(1, 0); }
    QuadElem alpha() const { return make(0, 1); }
    QuadElem c() const { return make(Rat(a_), 1); }
    QuadElem sqrt_disc() const { return make(Rat(a_), 2); }
    QuadElem coeff_A() const { return c() / sqrt_disc(); }
    QuadElem coeff_B() const { return one() - coeff_A(); }

    // alpha^k (k >= 0), cached for the small exponents used everywhere.
    QuadElem alpha_pow(int k) const {
        if (k < 0) throw std::invalid_argument("alpha_pow: negative exponent");
        if (k <= kCachedPowers) return alpha_pow_[static_cast<size_t>(k)];
        QuadElem v = alpha_pow_[kCachedPowers];
        for (int j = kCachedPowers; j < k; ++j) v *= alpha();
        return v;
    }

    // c^k = alpha^{-k} (k >= 0).
    QuadElem c_pow(int k) const {
        QuadElem v = one();
        for (int j = 0; j < k; ++j) v *= c();
        return v;
    }

  private:
    static constexpr int kCachedPowers = 72;
    long a_;
    std::vector<QuadElem> alpha_pow_;
};

inline RotationParams make_params(long a) { return RotationParams(a); }

// A point of R/Z: a QuadElem reduced into [0, 1).
class CirclePoint {
  public:
    CirclePoint() = default;
    explicit CirclePoint(QuadElem v) : v_(std::move(v)) {}

    const QuadElem& value() const { return v_; }
    long a() const { return v_.a(); }

    bool operator==(const CirclePoint& o) const { return v_ == o.v_; }
    bool operator!=(const CirclePoint& o) const { return v_ != o.v_; }

  private:
    QuadElem v_;
};

inline CirclePoint circle_reduce(const QuadElem& x) {
    Int fl = quad_floor(x);
    return CirclePoint(x - QuadElem(x.a(), Rat(fl), Rat(0)));
}

inline CirclePoint circle_add(const CirclePoint& x, const QuadElem& d) {
    return circle_reduce(x.value() + d);
}

inline CirclePoint circle_sub(const CirclePoint& x, const CirclePoint& y) {
    return circle_reduce(x.value() - y.value());
}

// Representative in (-1/2, 1/2].
inline QuadElem circle_signed(const CirclePoint& x) {
    QuadElem half = QuadElem(x.a(), Rat(1, 2), Rat(0));
    if (quad_leq(x.value(), half)) return x.value();
    return x.value() - QuadElem(x.a(), Rat(1), Rat(0));
}

// min(|x-y|, 1-|x-y|), exact, <= 1/2.
inline QuadElem circle_dist(const CirclePoint& x, const CirclePoint& y) {
    QuadElem d = circle_sub(x, y).value();
    QuadElem dd = QuadElem(d.a(), Rat(1), Rat(0)) - d;
    return quad_leq(d, dd) ? d : dd;
}

inline QuadElem circle_norm(const CirclePoint& x) {
    return circle_dist(x, CirclePoint(QuadElem(x.a(), Rat(0), Rat(0))));
}

// Order by the representative in [0,1).
inline bool circle_less(const CirclePoint& x, const CirclePoint& y) {
    return quad_less(x.value(), y.value());
}

}  // namespace kinexp

#endif  // KINEXP_QUAD_FIELD_HPP
