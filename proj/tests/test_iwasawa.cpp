#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "padiq/iwasawa.hpp"
#include "padiq/rng.hpp"

using namespace padiq;

namespace {
const AlgebraParams& A5() {
    static AlgebraParams a(5, 60);
    return a;
}
PadicScalar S(int64_t n) { return PadicScalar::from_int(A5().ctx, n); }
}  // namespace

TEST_CASE("single-generator expansions") {
    const auto& a = A5();
    auto zero = PadicScalar::zero(a.ctx);
    SUBCASE("exponent 1 gives 1 + b_1") {
        BExpansion e = b_expand({S(1), zero, zero, zero}, 8);
        CHECK(e.coeff({0, 0, 0, 0}).same_value(ExtScalar::one(a.ctx)));
        CHECK(e.coeff({1, 0, 0, 0}).same_value(ExtScalar::one(a.ctx)));
        CHECK(e.coeffs.size() == 2);
    }
    SUBCASE("exponent -1 gives alternating signs") {
        BExpansion e = b_expand({S(-1), zero, zero, zero}, 9);
        for (int k = 0; k <= 9; ++k) {
            MultiIndex mi{static_cast<uint16_t>(k), 0, 0, 0};
            CHECK(e.coeff(mi).same_value(ExtScalar::from_int(a.ctx, k % 2 ? -1 : 1)));
        }
    }
}

TEST_CASE("coefficients of random expansions are integral") {
    const auto& a = A5();
    Rng rng(404);
    for (int trial = 0; trial < 5; ++trial) {
        std::array<PadicScalar, 4> exps{rng.padic(a.ctx, 0, 8, 2), rng.padic(a.ctx, 0, 8, 2),
                                        rng.padic(a.ctx, 0, 8, 2), rng.padic(a.ctx, 0, 8, 2)};
        BExpansion e = b_expand(exps, 6);
        for (const auto& [mi, c] : e.coeffs) {
            if (c.is_zero_like()) continue;
            CHECK(c.val() >= Val::of_int(0));
        }
        CHECK(e.coeff({0, 0, 0, 0}).same_value(ExtScalar::one(a.ctx)));
    }
}

TEST_CASE("norms of generators and of g - 1") {
    const auto& a = A5();
    auto zero = PadicScalar::zero(a.ctx);
    for (int n = 1; n <= 2; ++n) {
        for (int axis = 0; axis < 4; ++axis) {
            std::array<PadicScalar, 4> exps{zero, zero, zero, zero};
            exps[static_cast<size_t>(axis)] = S(1);
            BExpansion e = b_expand(exps, 60);
            NormValue norm = norm_r(e, n);
            CHECK(norm.is_one());
            CHECK(norm.exact);
            // g - 1: remove the constant term; the norm drops to r
            BExpansion em = e;
            em.coeffs.erase(MultiIndex{0, 0, 0, 0});
            NormValue nm = norm_r(em, n);
            NormValue r;  // the value r = p^{-1/p^n}
            int64_t pn = 1;
            for (int i = 0; i < n; ++i) pn *= 5;
            r.num = 2;
            r.den = 2 * pn;
            CHECK(NormValue::leq(nm, r));
            CHECK(nm.num * r.den == r.num * nm.den);  // equality here
        }
    }
}

TEST_CASE("group-element expansions have norm 1 attained at alpha = 0") {
    const auto& a = A5();
    Rng rng(11);
    for (int trial = 0; trial < 4; ++trial) {
        LieVec x = LieVec::zero(&a);
        x.cI = rng.padic(a.ctx, 0, 6, 2);
        x.ch = rng.padic(a.ctx, 0, 6, 2);
        x.cw = rng.padic(a.ctx, 0, 6, 2);
        x.cv = rng.padic(a.ctx, 0, 6, 2);
        Quat g = exp_g(x);
        BExpansion e = b_expand_group(g, 12);
        NormValue norm = norm_r(e, 1);
        CHECK(norm.is_one());
        CHECK(norm.exact);
        // coefficient at 0 is 1, all others integral
        CHECK(e.coeff({0, 0, 0, 0}).close_to(ExtScalar::one(a.ctx), 40));
    }
}

TEST_CASE("single-generator multiplicativity is binomial convolution") {
    const auto& a = A5();
    auto zero = PadicScalar::zero(a.ctx);
    Rng rng(12);
    for (int axis = 0; axis < 4; ++axis) {
        PadicScalar e1 = rng.padic(a.ctx, 0, 8, 2);
        PadicScalar e2 = rng.padic(a.ctx, 0, 8, 2);
        std::array<PadicScalar, 4> a1{zero, zero, zero, zero}, a2 = a1, a12 = a1;
        a1[static_cast<size_t>(axis)] = e1;
        a2[static_cast<size_t>(axis)] = e2;
        a12[static_cast<size_t>(axis)] = e1 + e2;
        BExpansion prod = b_mul_truncated(b_expand(a1, 20), b_expand(a2, 20));
        BExpansion direct = b_expand(a12, 20);
        for (const auto& [mi, c] : direct.coeffs)
            CHECK(prod.coeff(mi).close_to(c, 40));
    }
}

TEST_CASE("submultiplicativity of the r-norms on group products") {
    const auto& a = A5();
    Rng rng(13);
    for (int n = 1; n <= 2; ++n) {
        for (int trial = 0; trial < 4; ++trial) {
            LieVec x = LieVec::zero(&a);
            x.cI = rng.padic(a.ctx, 0, 5, 2);
            x.ch = rng.padic(a.ctx, 0, 5, 2);
            x.cw = rng.padic(a.ctx, 0, 5, 2);
            x.cv = rng.padic(a.ctx, 0, 5, 2);
            LieVec y = LieVec::zero(&a);
            y.cI = rng.padic(a.ctx, 0, 5, 2);
            y.ch = rng.padic(a.ctx, 0, 5, 2);
            y.cw = rng.padic(a.ctx, 0, 5, 2);
            y.cv = rng.padic(a.ctx, 0, 5, 2);
            Quat gx = exp_g(x), gy = exp_g(y);
            // route general products through group multiplication
            BExpansion ex = b_expand_group(gx, 10);
            BExpansion ey = b_expand_group(gy, 10);
            BExpansion exy = b_expand_group(gx * gy, 10);
            NormValue nx = norm_r(ex, n), ny = norm_r(ey, n), nxy = norm_r(exy, n);
            // |xy| <= |x| |y|: exponents add
            NormValue prod;
            prod.zero = nx.zero || ny.zero;
            prod.num = nx.num * ny.den + ny.num * nx.den;
            prod.den = nx.den * ny.den;
            CHECK(NormValue::leq(nxy, prod));
        }
    }
}

TEST_CASE("g - 1 norm bound for arbitrary generators") {
    const auto& a = A5();
    for (int axis = 0; axis < 4; ++axis) {
        std::array<PadicScalar, 4> exps{PadicScalar::zero(a.ctx), PadicScalar::zero(a.ctx),
                                        PadicScalar::zero(a.ctx), PadicScalar::zero(a.ctx)};
        exps[static_cast<size_t>(axis)] = S(1);
        BExpansion e = b_expand(exps, 60);
        e.coeffs.erase(MultiIndex{0, 0, 0, 0});
        for (int n = 1; n <= 2; ++n) {
            NormValue nm = norm_r(e, n);
            int64_t pn = n == 1 ? 5 : 25;
            NormValue r{false, true, 2, 2 * pn};
            CHECK(NormValue::leq(nm, r));
        }
    }
}
