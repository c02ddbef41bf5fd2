#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "padiq/pbw.hpp"
#include "padiq/rng.hpp"

using namespace padiq;

namespace {
const AlgebraParams& A5() {
    static AlgebraParams a(5, 40);
    return a;
}

PBWPoly gen(Gen g) { return PBWPoly::generator(&A5(), g); }

std::vector<Gen> random_word(Rng& rng, int maxlen) {
    std::vector<Gen> w;
    int len = static_cast<int>(rng.below(static_cast<uint64_t>(maxlen) + 1));
    for (int i = 0; i < len; ++i) w.push_back(static_cast<Gen>(rng.below(4)));
    return w;
}

PBWPoly random_poly(Rng& rng, int deg, int nterms) {
    PBWPoly p = PBWPoly::zero(&A5());
    for (int i = 0; i < nterms; ++i) {
        auto w = random_word(rng, deg);
        int64_t c = static_cast<int64_t>(rng.below(19)) - 9;
        p = p + normal_form_word(&A5(), w, ExtScalar::from_int(A5().ctx, c ? c : 1));
    }
    return p;
}
}  // namespace

TEST_CASE("normal form of short words") {
    const auto& a = A5();
    // h w = w h + 2v
    PBWPoly hw = normal_form_word(&a, {Gen::H, Gen::W}, ExtScalar::one(a.ctx));
    CHECK(hw.coeff(PBWMono{1, 0, 1, 0}).same_value(ExtScalar::one(a.ctx)));
    CHECK(hw.coeff(PBWMono{0, 1, 0, 0}).same_value(ExtScalar::from_int(a.ctx, 2)));
    CHECK(hw.terms.size() == 2);

    // v w = w v + 2 iota h
    PBWPoly vw = normal_form_word(&a, {Gen::V, Gen::W}, ExtScalar::one(a.ctx));
    CHECK(vw.coeff(PBWMono{1, 1, 0, 0}).same_value(ExtScalar::one(a.ctx)));
    CHECK(vw.coeff(PBWMono{0, 0, 1, 0}).same_value(ExtScalar::from_int(a.ctx, 2 * static_cast<int64_t>(a.iota))));

    // empty word is 1
    PBWPoly e = normal_form_word(&a, {}, ExtScalar::one(a.ctx));
    CHECK(e.coeff(PBWMono{}).same_value(ExtScalar::one(a.ctx)));
    CHECK(e.terms.size() == 1);
}

TEST_CASE("pbw_mul unit and ordered products") {
    const auto& a = A5();
    Rng rng(21);
    PBWPoly q = random_poly(rng, 4, 3);
    CHECK(pbw_mul(PBWPoly::one(&a), q).close_to(q, 60));
    CHECK(pbw_mul(q, PBWPoly::one(&a)).close_to(q, 60));

    PBWPoly wv = pbw_mul(gen(Gen::W), gen(Gen::V));
    CHECK(wv.coeff(PBWMono{1, 1, 0, 0}).same_value(ExtScalar::one(a.ctx)));
    CHECK(wv.terms.size() == 1);
}

TEST_CASE("associativity on random triples") {
    Rng rng(22);
    for (int i = 0; i < 50; ++i) {
        PBWPoly P = random_poly(rng, 4, 2);
        PBWPoly Q = random_poly(rng, 4, 2);
        PBWPoly R = random_poly(rng, 4, 2);
        CHECK(pbw_mul(pbw_mul(P, Q), R).close_to(pbw_mul(P, pbw_mul(Q, R)), 50));
    }
}

TEST_CASE("rewrite strategies are confluent") {
    const auto& a = A5();
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        auto w = random_word(rng, 6);
        PBWPoly l = normal_form_word(&a, w, ExtScalar::one(a.ctx), 64, RewriteStrategy::LeftmostFirst);
        PBWPoly r = normal_form_word(&a, w, ExtScalar::one(a.ctx), 64, RewriteStrategy::RightmostFirst);
        CHECK(l.close_to(r, 60));
    }
}

TEST_CASE("casimir is central") {
    const auto& a = A5();
    PBWPoly delta = casimir(&a);
    CHECK(delta.coeff(PBWMono{0, 0, 2, 0}).same_value(a.iota_ext()));
    for (Gen g : {Gen::I, Gen::H, Gen::W, Gen::V}) {
        PBWPoly c = pbw_commutator(delta, gen(g));
        CHECK(c.is_zero_like());
    }
}

TEST_CASE("degree filtration and top-symbol commutativity") {
    Rng rng(24);
    for (int i = 0; i < 30; ++i) {
        PBWPoly P = random_poly(rng, 3, 2);
        PBWPoly Q = random_poly(rng, 3, 2);
        PBWPoly PQ = pbw_mul(P, Q);
        int dp = P.degree(), dq = Q.degree();
        CHECK(PQ.degree() <= dp + dq);
        // top symbols multiply commutatively: deg(PQ - QP) < deg P + deg Q
        PBWPoly comm = pbw_commutator(P, Q);
        if (!comm.is_zero_like()) CHECK(comm.degree() < dp + dq);
    }
}

TEST_CASE("degree cap is enforced loudly") {
    const auto& a = A5();
    PBWPoly p = PBWPoly::zero(&a, 4);
    CHECK_THROWS_AS(p.add_term(PBWMono{3, 2, 0, 0}, ExtScalar::one(a.ctx)), degree_cap_exceeded);
    std::vector<Gen> longword(70, Gen::W);
    CHECK_THROWS_AS(normal_form_word(&a, longword, ExtScalar::one(a.ctx)), degree_cap_exceeded);
}
