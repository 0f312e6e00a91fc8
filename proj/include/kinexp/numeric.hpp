#ifndef KINEXP_NUMERIC_HPP
#define KINEXP_NUMERIC_HPP

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kinexp {

using Int = mpz_class;
using Rat = mpq_class;

// Guard violations (enumeration caps, naive-sum caps) are reported with this
// type so callers can tell "refused" apart from "wrong input".
class guard_error : public std::runtime_error {
  public:
    explicit guard_error(const std::string& what) : std::runtime_error(what) {}
};

inline int sign_of(const Rat& r) { return sgn(r); }
inline int sign_of(const Int& z) { return sgn(z); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// "num/den" with an explicit denominator, so every serialized rational has
// the same shape.
inline std::string rat_to_string(const Rat& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rat rat_from_string(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    r.canonicalize();
    return r;
}

// Display-only decimal rendering (exact values travel as rational strings).
inline std::string rat_to_decimal(const Rat& r, int digits = 20) {
    if (r == 0) return "0";
    mpf_class f(r, 256);
    mp_exp_t exp;
    std::string mant = f.get_str(exp, 10, static_cast<size_t>(digits));
    std::string sign;
    if (!mant.empty() && mant[0] == '-') {
        sign = "-";
        mant = mant.substr(1);
    }
    // mant is 0.<mant> * 10^exp
    std::string out = sign + "0." + mant + "e" + std::to_string(exp);
    return out;
}

// Deterministic rationals in [0,1) with 53-bit numerators.
class RatSampler {
  public:
    explicit RatSampler(std::uint64_t seed) : rng_(seed) {}

    Rat unit() {
        const std::uint64_t num = rng_() >> 11;  // 53 bits
        Rat r(Int(static_cast<unsigned long>(num)), Int(1) << 53);
        r.canonicalize();
        return r;
    }

    // Uniform integer in [0, n).
    Int below(const Int& n) {
        if (n <= 0) throw std::invalid_argument("below: n must be positive");
        Rat u = unit();
        Int k = (u.get_num() * n) / u.get_den();
        if (k >= n) k = n - 1;
        return k;
    }

    std::uint64_t raw() { return rng_(); }

  private:
    std::mt19937_64 rng_;
};

}  // namespace kinexp

#endif  // KINEXP_NUMERIC_HPP
