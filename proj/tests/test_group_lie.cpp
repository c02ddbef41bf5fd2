#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "padiq/lie.hpp"
#include "padiq/rng.hpp"

using namespace padiq;

namespace {
const AlgebraParams& A5() {
    static AlgebraParams a(5, 60);
    return a;
}

LieVec random_lie(Rng& rng, const AlgebraParams& a, int64_t vmin = 0) {
    LieVec x = LieVec::zero(&a);
    x.cI = rng.padic(a.ctx, vmin, 8, 2);
    x.ch = rng.padic(a.ctx, vmin, 8, 2);
    x.cw = rng.padic(a.ctx, vmin, 8, 2);
    x.cv = rng.padic(a.ctx, vmin, 8, 2);
    return x;
}
}  // namespace

TEST_CASE("bracket table") {
    const auto& a = A5();
    LieVec h = LieVec::basis(&a, Gen::H);
    LieVec w = LieVec::basis(&a, Gen::W);
    LieVec v = LieVec::basis(&a, Gen::V);

    LieVec hw = bracket(h, w);
    CHECK(hw.cv.same_value(PadicScalar::from_int(a.ctx, 2)));
    CHECK(hw.cw.is_zero_like());
    CHECK(hw.ch.is_zero_like());
    CHECK(hw.cI.is_zero_like());

    LieVec hv = bracket(h, v);
    CHECK(hv.cw.same_value(PadicScalar::from_int(a.ctx, 2 * 5)));
    CHECK(hv.cv.is_zero_like());

    LieVec wv = bracket(w, v);
    CHECK(wv.ch.same_value(PadicScalar::from_int(a.ctx, -2 * static_cast<int64_t>(a.iota))));
    CHECK(wv.cw.is_zero_like());
    CHECK(wv.cv.is_zero_like());
    CHECK(wv.cI.is_zero_like());
}

TEST_CASE("bracket is alternating and antisymmetric") {
    const auto& a = A5();
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        LieVec x = random_lie(rng, a);
        LieVec y = random_lie(rng, a);
        CHECK(bracket(x, x).is_zero_like());
        CHECK((bracket(x, y) + bracket(y, x)).is_zero_like());
    }
}

TEST_CASE("Jacobi identity on random triples") {
    const auto& a = A5();
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        LieVec x = random_lie(rng, a);
        LieVec y = random_lie(rng, a);
        LieVec z = random_lie(rng, a);
        LieVec s = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
        CHECK(s.is_zero_like());
    }
}

TEST_CASE("coordinates leaving the lattice are rejected") {
    const auto& a = A5();
    Quat off = Quat::scalar(ExtScalar::sqrt_p(a.ctx).shift_p(-1), &a);  // valuation -1/2
    CHECK_THROWS_AS(lievec_from_quat(off, true), bracket_not_closed);
}

TEST_CASE("exp_g basics") {
    const auto& a = A5();
    CHECK(exp_g(LieVec::zero(&a)).close_to(Quat::one(&a), 50));
    Quat gw = exp_g(LieVec::basis(&a, Gen::W));
    CHECK(in_principal(gw, 2));
}

TEST_CASE("log_u2 rejects elements outside U^2") {
    const auto& a = A5();
    Quat bad = Quat::one(&a) + Quat::sqrt_pI(&a);
    CHECK_THROWS_AS(log_u2(bad), not_in_u2);
    CHECK(log_u2(Quat::one(&a)).is_zero_like());
}

TEST_CASE("exp and log are mutually inverse on U^2") {
    const auto& a = A5();
    Rng rng(3);
    for (int i = 0; i < 30; ++i) {
        LieVec x = random_lie(rng, a);
        Quat g = exp_g(x);
        LieVec back = log_u2(g);
        CHECK(back.close_to(x, 50));
        CHECK(exp_g(back).close_to(g, 50));
    }
}

TEST_CASE("p-power identity exp_g(x)^p = exp_g(p x)") {
    const auto& a = A5();
    Rng rng(4);
    for (int i = 0; i < 10; ++i) {
        LieVec x = random_lie(rng, a);
        PadicScalar p = PadicScalar::from_int(a.ctx, a.p);
        CHECK(exp_g(x).pow_u64(a.p).close_to(exp_g(x.scaled(p)), 45));
    }
}

TEST_CASE("log maps U^{2n} into p^{n-1} g_D") {
    const auto& a = A5();
    Rng rng(6);
    for (int n = 1; n <= 2; ++n) {
        for (int i = 0; i < 10; ++i) {
            LieVec x = random_lie(rng, a);
            Quat g = exp_g(x);
            // take the p^(n-1)-th power, landing in U^{2n}
            for (int j = 1; j < n; ++j) g = g.pow_u64(a.p);
            REQUIRE(in_principal(g, 2 * n));
            LieVec l = log_u2(g);
            CHECK(l.min_val() >= Val::of_int(n - 1));
            // and pth_root_in_lower recovers a p-th root when n = 2
            if (n == 2) {
                Quat r = pth_root_in_lower(g, 1);
                CHECK(r.pow_u64(a.p).close_to(g, 40));
            }
        }
    }
}

TEST_CASE("second-kind coordinates of normal forms") {
    const auto& a = A5();
    SUBCASE("identity") {
        auto c = to_second_kind(Quat::one(&a));
        CHECK(c.cw.is_zero_like());
        CHECK(c.cv.is_zero_like());
        CHECK(c.ch.is_zero_like());
        CHECK(c.cI.is_zero_like());
    }
    SUBCASE("pure w exponential") {
        PadicScalar p = PadicScalar::from_int(a.ctx, 5);
        Quat g = exp_axis_w(&a, p);
        auto c = to_second_kind(g);
        CHECK(c.cw.same_value(p));
        CHECK(c.cv.is_zero_like());
        CHECK(c.ch.is_zero_like());
        CHECK(c.cI.is_zero_like());
    }
}

TEST_CASE("second-kind reconstruction on random elements") {
    const auto& a = A5();
    Rng rng(8);
    for (int i = 0; i < 25; ++i) {
        LieVec x = random_lie(rng, a);
        Quat g = exp_g(x);
        auto c = to_second_kind(g);
        CHECK(c.to_group().close_to(g, a.ctx->requested - 2));
        // coordinates of the second kind lie in pZ_p
        for (const PadicScalar* s : {&c.cw, &c.cv, &c.ch, &c.cI})
            if (!s->is_zero_like()) CHECK(s->val() >= Val::of_int(1));
    }
}

TEST_CASE("membership verdict is robust to the peeling order") {
    // Reordering the exponentials perturbs c_v at valuation v(c_h) + v(c_w),
    // so the raw valuations can move; the criterion n_w > n && n_v > n for
    // the tested levels may not.
    const auto& a = A5();
    Rng rng(9);
    for (int i = 0; i < 40; ++i) {
        LieVec x = random_lie(rng, a);
        Quat g = exp_g(x);
        auto cw = peel_ordered(g, kOrderWVHI);
        auto ci = peel_ordered(g, kOrderIHWV);
        // order (I,h,w,v) puts w at slot 2 and v at slot 3
        for (int n = 1; n <= 2; ++n) {
            bool verdict_wvhi = cw[0].val() > Val::of_int(n) && cw[1].val() > Val::of_int(n);
            bool verdict_ihwv = ci[2].val() > Val::of_int(n) && ci[3].val() > Val::of_int(n);
            CHECK(verdict_wvhi == verdict_ihwv);
        }
    }
}

TEST_CASE("membership criterion for T G^{p^n} via coordinate valuations") {
    const auto& a = A5();
    Rng rng(10);
    for (int n = 1; n <= 2; ++n) {
        // direct construction of elements of T G^{p^n}: torus part times
        // exponentials with coordinates of valuation > n
        for (int i = 0; i < 15; ++i) {
            PadicScalar cw = rng.padic(a.ctx, n + 1, 6);
            PadicScalar cv = rng.padic(a.ctx, n + 1, 6);
            PadicScalar ch = rng.padic(a.ctx, 1, 6);
            PadicScalar cI = rng.padic(a.ctx, 1, 6);
            Quat t = exp_axis_h(&a, ch) * exp_axis_I(&a, cI);
            Quat k = exp_axis_w(&a, cw) * exp_axis_v(&a, cv);
            auto c = to_second_kind(t * k);
            CHECK(c.n_w() > Val::of_int(n));
            CHECK(c.n_v() > Val::of_int(n));
        }
        // violating elements keep a low coordinate
        for (int i = 0; i < 15; ++i) {
            PadicScalar cw = rng.padic(a.ctx, 1, 6);  // valuation in {1, 2} <= n possible
            PadicScalar cv = rng.padic(a.ctx, n + 1, 6);
            Quat g = exp_axis_w(&a, cw) * exp_axis_v(&a, cv);
            auto c = to_second_kind(g);
            bool low = c.n_w() <= Val::of_int(n) || c.n_v() <= Val::of_int(n);
            CHECK(low == (cw.val() <= Val::of_int(n)));
        }
    }
}
