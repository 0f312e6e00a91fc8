#include <catch2/catch_amalgamated.hpp>

#include "kinexp/birkhoff.hpp"

using namespace kinexp;

TEST_CASE("naive sums: base cases and cocycle law") {
    RotationParams P(2);
    LayerSystem sys(P, 5);
    auto [spec, f] = build_layer(sys, 2);
    RatSampler rng(201);

    CirclePoint x0 = circle_reduce(P.from_rat(Rat(2, 7)));
    REQUIRE(birkhoff_naive(f, P, x0, Int(0)).is_zero());

    for (int k = 0; k < 15; ++k) {
        CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
        Int i = rng.below(80);
        Int j = rng.below(80);
        QuadElem lhs = birkhoff_naive(f, P, x, i + j);
        QuadElem rhs = birkhoff_naive(f, P, x, i) + birkhoff_naive(f, P, rotate(x, i), j);
        REQUIRE(lhs == rhs);
    }

    REQUIRE_THROWS_AS(birkhoff_naive(f, P, x0, Int(100), /*guard=*/Int(50)), guard_error);
}

TEST_CASE("full column sum over the long stack is zero, all routes") {
    RotationParams P(2);
    LayerSystem sys(P, 5);
    auto [spec, f] = build_layer(sys, 2);  // q_3 = 12
    RatSampler rng(203);
    CircleInterval I2 = base_interval(P, 2);
    for (int k = 0; k < 10; ++k) {
        CirclePoint x = circle_add(I2.left(), I2.length() * rng.unit());
        REQUIRE(birkhoff_naive(f, P, x, spec.q_long).is_zero());
        REQUIRE(birkhoff_stream(sys, 2, 2, x, spec.q_long).is_zero());
        REQUIRE(birkhoff_fast_layer(sys, 2, x, spec.q_long).is_zero());
    }
}

TEST_CASE("single iterate equals pointwise evaluation") {
    RotationParams P(3);
    LayerSystem sys(P, 5);
    RatSampler rng(207);
    for (int n = 1; n <= 3; ++n) {
        for (int k = 0; k < 10; ++k) {
            CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
            REQUIRE(birkhoff_fast_layer(sys, n, x, Int(1)) == sys.eval_layer(n, x));
            REQUIRE(birkhoff_stream(sys, n, n, x, Int(1)) == sys.eval_layer(n, x));
        }
    }
}

TEST_CASE("fast equals naive on random layer sums") {
    for (long a : {2L, 3L, 10L}) {
        RotationParams P(a);
        LayerSystem sys(P, 6);
        RatSampler rng(211 + static_cast<std::uint64_t>(a));
        std::vector<std::pair<LayerSpec, PLFunction>> layers;
        for (int n = 1; n <= 4; ++n) layers.push_back(build_layer(sys, n));
        for (int k = 0; k < 120; ++k) {
            CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
            Int i = rng.below(3000);
            int n = 1 + static_cast<int>(rng.below(4).get_si());
            QuadElem naive = birkhoff_naive(layers[static_cast<size_t>(n - 1)].second, P, x, i);
            REQUIRE(birkhoff_fast_layer(sys, n, x, i) == naive);
            REQUIRE(birkhoff_stream(sys, n, n, x, i) == naive);
        }
    }
}

TEST_CASE("fast stack equals naive on the merged truncation") {
    for (long a : {2L, 3L}) {
        RotationParams P(a);
        LayerSystem sys(P, 6);
        auto [T4, tail4] = build_series(sys, 4);
        RatSampler rng(223 + static_cast<std::uint64_t>(a));
        for (int k = 0; k < 40; ++k) {
            CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
            Int i = rng.below(2000);
            QuadElem naive = birkhoff_naive(T4, P, x, i);
            BirkhoffReport rep = birkhoff_fast_stack(sys, 4, x, i);
            REQUIRE(rep.value == naive);
            REQUIRE(rep.tail == sys.tail_bound(4) * Rat(i));
            REQUIRE(birkhoff_stream(sys, 1, 4, x, i) == naive);
        }
    }
}

TEST_CASE("fast evaluator at scales the naive one cannot reach") {
    // stream and fast agree on a prefix at a = 1000, then fast is taken far out
    RotationParams P(1000);
    LayerSystem sys(P, 8);
    RatSampler rng(229);
    for (int k = 0; k < 5; ++k) {
        CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
        Int i = rng.below(5000);
        for (int n = 1; n <= 3; ++n)
            REQUIRE(birkhoff_fast_layer(sys, n, x, i) == birkhoff_stream(sys, n, n, x, i));
        REQUIRE(birkhoff_fast_stack(sys, 6, x, i).value == birkhoff_stream(sys, 1, 6, x, i));
    }

    // cocycle law exercised at i ~ 1e12 where only the fast route exists
    CirclePoint x = circle_reduce(P.from_rat(Rat(3, 11)));
    Int big("1000000000000");
    Int split("777777777");
    for (int n = 1; n <= 4; ++n) {
        QuadElem whole = birkhoff_fast_layer(sys, n, x, big);
        QuadElem part = birkhoff_fast_layer(sys, n, x, split) +
                        birkhoff_fast_layer(sys, n, rotate(x, split), big - split);
        REQUIRE(whole == part);
    }
}

TEST_CASE("report encloses the infinite series") {
    // |sum of layers above N| <= i * tail_bound(N) termwise, so the report's
    // enclosure contains the value computed at any deeper truncation
    RotationParams P(10);
    LayerSystem sys(P, 9);
    RatSampler rng(233);
    for (int k = 0; k < 10; ++k) {
        CirclePoint x = circle_reduce(P.from_rat(rng.unit()));
        Int i = rng.below(800);
        BirkhoffReport shallow = birkhoff_fast_stack(sys, 3, x, i);
        BirkhoffReport deep = birkhoff_fast_stack(sys, 9, x, i);
        REQUIRE(quad_leq(quad_abs(deep.value - shallow.value), shallow.tail));
    }
}
