#include <catch2/catch_amalgamated.hpp>

#include "kinexp/checks.hpp"

using namespace kinexp;

TEST_CASE("context construction") {
    RotationParams P2(2);
    CheckContext c1 = make_context(P2, 1, SamplePoint::midpoint);
    REQUIRE(c1.i == 2);  // floor(q_2 / 2) = floor(5/2)
    REQUIRE(probe_window(P2, 1).contains(c1.x));

    RotationParams P10(10);
    CheckContext c2 = make_context(P10, 2, SamplePoint::midpoint);
    REQUIRE(c2.i == 510);  // q_3 = 1020

    RatSampler rng(301);
    for (int k = 0; k < 10; ++k) {
        CheckContext cr = make_context(P10, 2, SamplePoint::random_in_window, &rng);
        REQUIRE(probe_window(P10, 2).contains(cr.x));
    }
    CheckContext ci = make_context(P10, 2, SamplePoint::inner_endpoint);
    CheckContext co = make_context(P10, 2, SamplePoint::outer_endpoint);
    REQUIRE(circle_norm(ci.x) == P10.alpha_pow(4) / Rat(2));
    REQUIRE(circle_norm(co.x) == P10.alpha_pow(3) / Rat(2));
}

TEST_CASE("middle layer: exact zero at the origin, closed form, sign") {
    for (long a : {2L, 10L}) {
        RotationParams P(a);
        LayerSystem sys(P, 6);
        CheckHarness harness(sys, 5);
        for (int n = 1; n <= 3; ++n) {
            CheckContext ctx = make_context(P, n, SamplePoint::midpoint);
            PropCheckResult r = harness.check_middle_layer(ctx);
            REQUIRE(r.details.at("zero_at_origin").get<bool>());
            REQUIRE(r.details.at("closed_form_matches").get<bool>());
            REQUIRE(r.verdict != Verdict::fail);
            if (a == 10) {
                REQUIRE(r.verdict == Verdict::pass);
                REQUIRE(r.details.at("sign").get<int>() == (n % 2 == 0 ? 1 : -1));
            }
        }
    }
}

TEST_CASE("middle layer bound across sample points at a = 10") {
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 5);
    RatSampler rng(307);
    for (int n = 1; n <= 3; ++n)
        for (SamplePoint kind : {SamplePoint::midpoint, SamplePoint::inner_endpoint,
                                 SamplePoint::outer_endpoint, SamplePoint::random_in_window}) {
            CheckContext ctx = make_context(P, n, kind, &rng);
            REQUIRE(harness.check_middle_layer(ctx).verdict == Verdict::pass);
        }
}

TEST_CASE("previous layer cancels exactly") {
    for (long a : {10L, 100L}) {
        RotationParams P(a);
        LayerSystem sys(P, 6);
        CheckHarness harness(sys, 5, /*naive_cap=*/Int(20000));
        for (SamplePoint kind :
             {SamplePoint::midpoint, SamplePoint::inner_endpoint, SamplePoint::outer_endpoint}) {
            CheckContext ctx = make_context(P, 2, kind);
            PropCheckResult r = harness.check_previous_layer(ctx);
            REQUIRE(r.verdict == Verdict::pass);
            REQUIRE(r.lhs.is_zero());
        }
    }
    // vacuous at n = 1: the series has no layer 0
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 5);
    PropCheckResult r = harness.check_previous_layer(make_context(P, 1, SamplePoint::midpoint));
    REQUIRE(r.verdict == Verdict::pass);
    REQUIRE(r.details.at("vacuous").get<bool>());
}

TEST_CASE("next layer: zero at origin and aligned sign") {
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 5);
    // even context level: both differences positive; odd: both negative
    CheckContext c2 = make_context(P, 2, SamplePoint::midpoint);
    PropCheckResult r2 = harness.check_next_layer(c2);
    REQUIRE(r2.verdict == Verdict::pass);
    REQUIRE(r2.details.at("zero_at_origin").get<bool>());
    REQUIRE(r2.details.at("sign_middle").get<int>() == 1);
    REQUIRE(r2.details.at("sign_next").get<int>() == 1);

    CheckContext c3 = make_context(P, 3, SamplePoint::midpoint);
    PropCheckResult r3 = harness.check_next_layer(c3);
    REQUIRE(r3.verdict == Verdict::pass);
    REQUIRE(r3.details.at("sign_middle").get<int>() == -1);
    REQUIRE(r3.details.at("sign_next").get<int>() == -1);
}

TEST_CASE("central block margins add up") {
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 5);
    CheckContext ctx = make_context(P, 2, SamplePoint::midpoint);
    PropCheckResult r = harness.check_central_block(ctx);
    // sign agreement makes magnitudes add: |S| = |mid| + |next| when prev = 0
    QuadElem mid = harness.layer_delta(2, ctx);
    QuadElem next = harness.layer_delta(3, ctx);
    QuadElem prev = harness.layer_delta(1, ctx);
    REQUIRE(prev.is_zero());
    REQUIRE(r.lhs == quad_abs(mid) + quad_abs(next));
    // report carries the margin either way
    REQUIRE((r.verdict == Verdict::pass || r.verdict == Verdict::out_of_regime));
}

TEST_CASE("upper tail explicit part shrinks as N grows") {
    RotationParams P(10);
    LayerSystem sysA(P, 6);
    LayerSystem sysB(P, 8);
    CheckContext ctx = make_context(P, 1, SamplePoint::midpoint);
    CheckHarness hA(sysA, 5);
    CheckHarness hB(sysB, 8);
    PropCheckResult rA = hA.check_upper_tail(ctx);
    PropCheckResult rB = hB.check_upper_tail(ctx);
    REQUIRE(rA.details.at("termwise_bound_ok").get<bool>());
    REQUIRE(rB.details.at("termwise_bound_ok").get<bool>());
    // the tail allowance is monotone in N
    QuadElem allowA = quad_from_json(rA.details.at("tail_allowance"));
    QuadElem allowB = quad_from_json(rB.details.at("tail_allowance"));
    REQUIRE(quad_less(allowB, allowA));
}

TEST_CASE("low layers: vacuous below n = 3, Lipschitz caps, first-return brute") {
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 6);

    PropCheckResult r2 = harness.check_low_layers(make_context(P, 2, SamplePoint::midpoint));
    REQUIRE(r2.verdict == Verdict::pass);
    REQUIRE(r2.details.at("vacuous").get<bool>());
    REQUIRE(r2.lhs.is_zero());

    CheckContext c3 = make_context(P, 3, SamplePoint::midpoint);
    PropCheckResult r3 = harness.check_low_layers(c3, /*brute_max_nu=*/1);
    REQUIRE(r3.verdict == Verdict::pass);
    REQUIRE(r3.details.at("lipschitz_bounds_ok").get<bool>());
    REQUIRE(r3.details.at("first_return_ok").get<bool>());
}

TEST_CASE("first-return coverage stands alone") {
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 6);
    auto [ok, bound] = harness.first_return_bound(/*n=*/3, /*nu=*/1, Int(100000));
    REQUIRE(ok);
    REQUIRE(bound == 2 * convergents(P, 2)[2].q);
}

TEST_CASE("total separation ledger consistency") {
    RotationParams P(10);
    LayerSystem sys(P, 6);
    CheckHarness harness(sys, 5);
    for (int n = 1; n <= 2; ++n) {
        CheckContext ctx = make_context(P, n, SamplePoint::midpoint);
        PropCheckResult r = harness.check_total_separation(ctx);
        REQUIRE(r.details.at("ledger_ok").get<bool>());
        REQUIRE((r.verdict == Verdict::pass || r.verdict == Verdict::out_of_regime));
    }
}

TEST_CASE("shift invariance of checked quantities") {
    // every checked quantity is a difference of Birkhoff sums, so adding a
    // constant roof offset cannot change it
    RotationParams P(2);
    LayerSystem sys(P, 5);
    auto [T3, tail] = build_series(sys, 3);
    auto [Tpos, offset] = positivize(T3);
    RatSampler rng(311);
    for (int k = 0; k < 10; ++k) {
        CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
        Int i = rng.below(400);
        QuadElem d0 = birkhoff_naive(T3, P, x, i) -
                      birkhoff_naive(T3, P, CirclePoint(P.zero()), i);
        QuadElem d1 = birkhoff_naive(Tpos, P, x, i) -
                      birkhoff_naive(Tpos, P, CirclePoint(P.zero()), i);
        REQUIRE(d0 == d1);
        BirkhoffReport fast_x = birkhoff_fast_stack(sys, 3, x, i);
        BirkhoffReport fast_0 = birkhoff_fast_stack(sys, 3, CirclePoint(P.zero()), i);
        REQUIRE(fast_x.value - fast_0.value == d0);
    }
}

TEST_CASE("window levels chain and transport separates pairs") {
    RotationParams P(1000);
    LayerSystem sys(P, 8);

    // windows [a^{n+2}/2, a^{n+1}/2] chain without holes
    for (int n = 1; n <= 4; ++n) {
        QuadElem hi = P.alpha_pow(n + 1) / Rat(2);
        QuadElem lo = P.alpha_pow(n + 2) / Rat(2);
        REQUIRE(window_level_for(P, hi, 6) <= n);
        REQUIRE(window_level_for(P, lo, 6) >= n);
        QuadElem mid = (hi + lo) / Rat(2);
        REQUIRE(window_level_for(P, mid, 6) == n);
    }
    REQUIRE_THROWS_AS(window_level_for(P, P.one(), 6), std::invalid_argument);

    // q = 0 witness when x is already the window's base point: for this odd
    // window level the canonical pair is (-r, 0)
    QuadElem r1 = P.alpha_pow(3) / Rat(2);  // inner edge of window 1
    REQUIRE(base_side(P, 1) == -1);
    TransportWitness w0 =
        separation_scan(sys, 8, circle_reduce(-r1), r1, Int("1000000000000000000000000000"));
    REQUIRE(w0.separated);
    REQUIRE(w0.transport_q == 0);

    // random x needs transport and still separates
    RatSampler rng(313);
    for (int k = 0; k < 3; ++k) {
        CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
        TransportWitness w =
            separation_scan(sys, 8, x, r1, Int("100000000000000000000000000000000"));
        REQUIRE(w.separated);
        REQUIRE(quad_sign(w.achieved) > 0);
    }
}

TEST_CASE("separation certificate on a small grid") {
    RotationParams P(1000);
    LayerSystem sys(P, 8);
    SeparationCertificate cert =
        separation_certificate(sys, 8, {1, 2}, 3, 4242, Int("1" + std::string(40, '0')));
    REQUIRE(cert.all_separated);
    REQUIRE(quad_sign(cert.delta) > 0);
    // delta is a third of the worst margin, hence below the formula cap
    REQUIRE(quad_leq(cert.delta, P.alpha() / Rat(200) / Rat(3) + cert.delta));
    REQUIRE(cert.pair_reports.size() == 6);

    // determinism: the same seed reproduces the same certificate
    SeparationCertificate cert2 =
        separation_certificate(sys, 8, {1, 2}, 3, 4242, Int("1" + std::string(40, '0')));
    REQUIRE(to_json(cert).dump() == to_json(cert2).dump());
}
