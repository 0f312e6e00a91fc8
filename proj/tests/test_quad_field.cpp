#include <catch2/catch_amalgamated.hpp>

#include "kinexp/jsonio.hpp"
#include "kinexp/quad_field.hpp"

using namespace kinexp;

namespace {

QuadElem random_elem(const RotationParams& P, RatSampler& rng) {
    Rat p = rng.unit() * 20 - 10;
    Rat q = rng.unit() * 20 - 10;
    return P.make(p, q);
}

// High-precision floating oracle, independent of the exact code path.
mpf_class float_oracle(const QuadElem& x, mp_bitcnt_t prec) {
    mpf_class D(0, prec);
    D = Int(x.a()) * Int(x.a()) + 4;
    mpf_class root(0, prec);
    mpf_sqrt(root.get_mpf_t(), D.get_mpf_t());
    mpf_class alpha = (root - x.a()) / 2;
    return mpf_class(x.p(), prec) + mpf_class(x.q(), prec) * alpha;
}

}  // namespace

TEST_CASE("rotation parameters for small a") {
    RotationParams P2 = make_params(2);
    // alpha = sqrt(2) - 1 to 50 digits: 0.41421356...
    mpf_class alpha2 = float_oracle(P2.alpha(), 256);
    mpf_class ref(0, 256);
    ref = 2;
    mpf_sqrt(ref.get_mpf_t(), ref.get_mpf_t());
    ref -= 1;
    REQUIRE(abs(alpha2 - ref) < mpf_class(1e-40));

    RotationParams P1 = make_params(1);
    mpf_class alpha1 = float_oracle(P1.alpha(), 256);
    mpf_class ref1(0, 256);
    ref1 = 5;
    mpf_sqrt(ref1.get_mpf_t(), ref1.get_mpf_t());
    ref1 = (ref1 - 1) / 2;
    REQUIRE(abs(alpha1 - ref1) < mpf_class(1e-40));

    REQUIRE_THROWS_AS(make_params(0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_params(-4), std::invalid_argument);
}

TEST_CASE("defining relations hold exactly across a sweep") {
    std::vector<long> sweep;
    for (long a = 1; a <= 20; ++a) sweep.push_back(a);
    sweep.push_back(100);
    sweep.push_back(1000);
    for (long a : sweep) {
        RotationParams P(a);
        QuadElem alpha = P.alpha();
        // alpha^2 + a*alpha - 1 = 0
        REQUIRE((alpha * alpha + alpha * Rat(a) - Rat(1)).is_zero());
        // alpha * c = 1 and c^2 = a*c + 1
        REQUIRE(alpha * P.c() == P.one());
        REQUIRE(P.c() * P.c() == P.c() * Rat(a) + Rat(1));
        // A + B = 1, both positive, and 0 < alpha < 1 < c
        REQUIRE(P.coeff_A() + P.coeff_B() == P.one());
        REQUIRE(quad_sign(P.coeff_A()) > 0);
        REQUIRE(quad_sign(P.coeff_B()) > 0);
        REQUIRE(quad_sign(alpha) > 0);
        REQUIRE(quad_sign(alpha - P.one()) < 0);
        REQUIRE(quad_sign(P.c() - P.from_rat(Rat(a))) > 0);
    }
}

TEST_CASE("field arithmetic basics") {
    RotationParams P(2);
    QuadElem al = P.alpha();
    REQUIRE((P.one() + al) + (P.from_rat(2) - al) == P.from_rat(3));
    REQUIRE(al * al == P.one() - al * Rat(2));

    RatSampler rng(7);
    for (int k = 0; k < 50; ++k) {
        QuadElem x = random_elem(P, rng);
        REQUIRE(x * P.one() == x);
    }

    RotationParams Q(3);
    REQUIRE_THROWS_AS(P.alpha() + Q.alpha(), std::invalid_argument);
}

TEST_CASE("field axioms on random triples") {
    for (long a : {2L, 5L, 1000L}) {
        RotationParams P(a);
        RatSampler rng(11 + static_cast<std::uint64_t>(a));
        for (int k = 0; k < 40; ++k) {
            QuadElem x = random_elem(P, rng);
            QuadElem y = random_elem(P, rng);
            QuadElem z = random_elem(P, rng);
            REQUIRE((x + y) + z == x + (y + z));
            REQUIRE((x * y) * z == x * (y * z));
            REQUIRE(x * (y + z) == x * y + x * z);
            REQUIRE((x + (-x)).is_zero());
            if (!x.is_zero()) REQUIRE(x * x.inverse() == P.one());
        }
    }
}

TEST_CASE("exact sign agrees with a 100-digit floating evaluation") {
    for (long a : {2L, 17L}) {
        RotationParams P(a);
        RatSampler rng(23 + static_cast<std::uint64_t>(a));
        int decided = 0;
        for (int k = 0; k < 1000; ++k) {
            QuadElem x = random_elem(P, rng);
            mpf_class f = float_oracle(x, 360);  // > 100 decimal digits
            mpf_class err(1e-60);
            if (abs(f) > err) {
                ++decided;
                REQUIRE(quad_sign(x) == sgn(f));
            }
        }
        REQUIRE(decided > 990);
    }
}

TEST_CASE("sign special cases") {
    RotationParams P(2);
    REQUIRE(quad_sign(P.alpha()) == 1);
    REQUIRE(quad_sign(P.alpha() * Rat(2) - Rat(1)) == -1);  // 2*alpha < 1 for a = 2
    REQUIRE(quad_sign(P.zero()) == 0);
}

TEST_CASE("certified floor") {
    RotationParams P(2);
    REQUIRE(quad_floor(P.from_rat(3)) == 3);
    REQUIRE(quad_floor(P.alpha() * Rat(5)) == 2);  // 5*alpha ~ 2.071
    for (long a : {1L, 2L, 9L, 1000L}) {
        RotationParams Q(a);
        REQUIRE(quad_floor(-Q.alpha()) == -1);
    }

    RatSampler rng(31);
    for (int k = 0; k < 200; ++k) {
        QuadElem x = random_elem(P, rng);
        Int m = quad_floor(x);
        REQUIRE(quad_sign(x - P.from_rat(Rat(m))) >= 0);
        REQUIRE(quad_sign(x - P.from_rat(Rat(m + 1))) < 0);
    }
}

TEST_CASE("circle reduction") {
    RotationParams P(2);
    REQUIRE(circle_reduce(P.from_rat(7)).value().is_zero());
    REQUIRE(circle_reduce(P.alpha() * Rat(5)).value() == P.alpha() * Rat(5) - Rat(2));
    REQUIRE(circle_reduce(-P.alpha()).value() == P.one() - P.alpha());

    RatSampler rng(37);
    for (int k = 0; k < 100; ++k) {
        QuadElem x = random_elem(P, rng);
        CirclePoint r = circle_reduce(x);
        REQUIRE(circle_reduce(r.value()) == r);
        REQUIRE(quad_sign(r.value()) >= 0);
        REQUIRE(quad_sign(r.value() - P.one()) < 0);
    }
}

TEST_CASE("circle distance") {
    RotationParams P(2);
    CirclePoint zero(P.zero());
    CirclePoint half(P.from_rat(Rat(1, 2)));
    REQUIRE(circle_dist(half, half).is_zero());
    REQUIRE(circle_norm(half) == P.from_rat(Rat(1, 2)));
    // 2*alpha ~ 0.8284 > 1/2, so the norm is 1 - 2*alpha
    CirclePoint two_alpha = circle_reduce(P.alpha() * Rat(2));
    REQUIRE(circle_norm(two_alpha) == P.one() - P.alpha() * Rat(2));

    RatSampler rng(41);
    for (int k = 0; k < 60; ++k) {
        CirclePoint x = circle_reduce(random_elem(P, rng));
        CirclePoint y = circle_reduce(random_elem(P, rng));
        CirclePoint z = circle_reduce(random_elem(P, rng));
        QuadElem dxy = circle_dist(x, y);
        REQUIRE(dxy == circle_dist(y, x));
        REQUIRE(quad_leq(dxy, P.from_rat(Rat(1, 2))));
        REQUIRE(quad_leq(circle_dist(x, z), dxy + circle_dist(y, z)));
        REQUIRE(circle_dist(x, x).is_zero());
    }
}

TEST_CASE("json round trip") {
    RotationParams P(5);
    RatSampler rng(43);
    for (int k = 0; k < 20; ++k) {
        QuadElem x = random_elem(P, rng);
        json j = to_json(x);
        REQUIRE(quad_from_json(j) == x);
        REQUIRE(j.at("p").get<std::string>().find('/') != std::string::npos);
    }
}
