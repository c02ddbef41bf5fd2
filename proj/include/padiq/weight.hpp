#pragma once

#include <vector>

#include "padiq/pbw.hpp"

namespace padiq {

struct window_too_large : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Character of the torus t = Z_p I + Z_p h.
struct WeightChar {
    PadicScalar lambda_I, lambda_h;

    // Documented heuristic: lambda is flagged generic unless lambda(h) = 0.
    // Finite-dimensional weights pair with h inside sqrt(p)Z, which meets Z_p
    // only at 0.  The flag gates nothing numerically.
    bool generic() const { return !lambda_h.is_zero_like(); }
};

// Infinitesimal character, determined by the value on the Casimir element.
struct InfChar {
    ExtScalar chi_delta;
};

// Truncated element sum a_m w^m + sum b_m w^m v of the weight module.
class WElement {
public:
    int M = 0;
    int precision = 0;  // requested working precision in digits
    std::vector<ExtScalar> a, b;
    const PadicCtx* ctx = nullptr;

    static WElement zero(const PadicCtx* c, int M) {
        WElement w;
        w.M = M;
        w.precision = c->requested;
        w.ctx = c;
        w.a.assign(static_cast<size_t>(M) + 1, ExtScalar::zero(c));
        w.b.assign(static_cast<size_t>(M) + 1, ExtScalar::zero(c));
        return w;
    }

    static WElement delta(const PadicCtx* c, int M) {
        WElement w = zero(c, M);
        w.a[0] = ExtScalar::one(c);
        return w;
    }

    bool is_zero_like() const {
        for (const auto& x : a)
            if (!x.is_zero_like()) return false;
        for (const auto& x : b)
            if (!x.is_zero_like()) return false;
        return true;
    }

    WElement operator+(const WElement& o) const {
        WElement r = *this;
        for (int m = 0; m <= M; ++m) {
            r.a[static_cast<size_t>(m)] = r.a[static_cast<size_t>(m)] + o.a[static_cast<size_t>(m)];
            r.b[static_cast<size_t>(m)] = r.b[static_cast<size_t>(m)] + o.b[static_cast<size_t>(m)];
        }
        return r;
    }
    WElement operator-(const WElement& o) const {
        WElement r = *this;
        for (int m = 0; m <= M; ++m) {
            r.a[static_cast<size_t>(m)] = r.a[static_cast<size_t>(m)] - o.a[static_cast<size_t>(m)];
            r.b[static_cast<size_t>(m)] = r.b[static_cast<size_t>(m)] - o.b[static_cast<size_t>(m)];
        }
        return r;
    }
    WElement scaled(const ExtScalar& s) const {
        WElement r = *this;
        for (auto& x : r.a) x = s * x;
        for (auto& x : r.b) x = s * x;
        return r;
    }
    // multiplication by w on the left: shift both arrays
    WElement shifted_w() const {
        WElement r = zero(ctx, M);
        for (int m = M; m >= 1; --m) {
            r.a[static_cast<size_t>(m)] = a[static_cast<size_t>(m - 1)];
            r.b[static_cast<size_t>(m)] = b[static_cast<size_t>(m - 1)];
        }
        return r;
    }

    bool close_to(const WElement& o, int64_t bound_half) const {
        for (int m = 0; m <= M; ++m) {
            if (!a[static_cast<size_t>(m)].close_to(o.a[static_cast<size_t>(m)], (bound_half + 1) / 2)) return false;
            if (!b[static_cast<size_t>(m)].close_to(o.b[static_cast<size_t>(m)], (bound_half + 1) / 2)) return false;
        }
        return true;
    }

    WElement truncated(int M2) const {
        WElement r = zero(ctx, M2);
        for (int m = 0; m <= std::min(M, M2); ++m) {
            r.a[static_cast<size_t>(m)] = a[static_cast<size_t>(m)];
            r.b[static_cast<size_t>(m)] = b[static_cast<size_t>(m)];
        }
        return r;
    }
};

// Exact rational with small terms; used for slopes, margins and bounds so
// that every verdict is an integer comparison.
struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    static Rational of(int64_t n, int64_t d = 1) {
        if (d < 0) { n = -n; d = -d; }
        return Rational{n, d};
    }
    bool operator>(const Rational& o) const {
        return static_cast<__int128>(num) * o.den > static_cast<__int128>(o.num) * den;
    }
    bool operator<(const Rational& o) const { return o > *this; }
    bool operator==(const Rational& o) const {
        return static_cast<__int128>(num) * o.den == static_cast<__int128>(o.num) * den;
    }
    Rational operator+(const Rational& o) const {
        return of(num * o.den + o.num * den, den * o.den);
    }
    double approx() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

// The module engine: left action of the generators on the truncated basis
// {w^m, w^m v}, for either side of the algebra embedding.
//
// Relations used: [h,w] = 2v, [h,v] = 2c w, [w,v] = -2 iota h, h.1 = mu,
// v^2.1 = xs + c w^2, with c = p on the division-algebra side and c = 1 on
// the GL2 side.
class ModuleEngine {
public:
    const AlgebraParams* alg;
    const PadicCtx* ctx;
    int M;
    ExtScalar mu;   // h . 1
    ExtScalar xs;   // scalar part of v^2 . 1
    int64_t cval;   // c above: p or 1
    ExtScalar cc, sc;  // c and sqrt(c)
    ExtScalar lambda_I;

    std::vector<WElement> hA, vA, hB, vB;  // generator actions on basis vectors

    // chain basis: eigenvectors of h built from the raising/lowering pair;
    // index k in [-K, K] stored at k + K.  K runs past the truncation degree
    // so that series paths crossing the boundary and returning carry at
    // least ~(K - M) extra digits of valuation.
    int K;
    static constexpr int kChainHeadroom = 16;
    std::vector<WElement> chain;
    std::vector<ExtScalar> alpha, beta;  // e.u_k = alpha_k u_{k+1}, f.u_k = beta_k u_{k-1}
    std::vector<int64_t> umin_half;      // min valuation (halves) of u_k entries
    std::vector<int64_t> prune_floor;    // min_k' (umin_half[k'] + |k-k'|)

    // D-side engine
    static ModuleEngine dside(const AlgebraParams* a, const WeightChar& lam, const InfChar& chi, int M) {
        ModuleEngine e;
        e.alg = a;
        e.ctx = a->ctx;
        e.M = M;
        e.mu = ExtScalar::of(lam.lambda_h);
        e.lambda_I = ExtScalar::of(lam.lambda_I);
        e.xs = a->iota_ext() * e.mu * e.mu - chi.chi_delta;
        e.cval = a->p;
        e.cc = ExtScalar::from_int(a->ctx, static_cast<int64_t>(a->p));
        e.sc = ExtScalar::sqrt_p(a->ctx);
        e.build();
        return e;
    }

    // GL2-side engine: h_0, w_0, v_0 with mu_0 = lambda(h)/sqrt(p) and
    // chi_0 = chi(Delta)/p
    static ModuleEngine gl2side(const AlgebraParams* a, const WeightChar& lam, const InfChar& chi, int M) {
        ModuleEngine e;
        e.alg = a;
        e.ctx = a->ctx;
        e.M = M;
        e.mu = ExtScalar::of(lam.lambda_h) * ExtScalar::sqrt_p(a->ctx).inv();
        e.lambda_I = ExtScalar::of(lam.lambda_I);
        ExtScalar chi0 = chi.chi_delta.shift_p(-1);
        e.xs = a->iota_ext() * e.mu * e.mu - chi0;
        e.cval = 1;
        e.cc = ExtScalar::one(a->ctx);
        e.sc = ExtScalar::one(a->ctx);
        e.build();
        return e;
    }

    // ---- generator actions in the w-basis ----

    WElement apply_w(const WElement& x) const { return x.shifted_w(); }

    WElement apply_h(const WElement& x) const { return apply_cols(x, hA, hB); }
    WElement apply_v(const WElement& x) const { return apply_cols(x, vA, vB); }

    // ---- chain coordinates ----

    std::vector<ExtScalar> chain_zero() const {
        return std::vector<ExtScalar>(static_cast<size_t>(2 * K + 1), ExtScalar::zero(ctx));
    }

    // action of v = sc * v0 on chain coordinates (tridiagonal, zero diagonal)
    void chain_apply_v(std::vector<ExtScalar>& out, const std::vector<ExtScalar>& xi) const {
        for (auto& c : out) c = ExtScalar::zero(ctx);
        for (int k = -K; k <= K; ++k) {
            const ExtScalar& x = xi[static_cast<size_t>(k + K)];
            if (x.is_zero_like()) continue;
            // v0 u_k = iota alpha_k u_{k+1} - beta_k u_{k-1}
            if (k + 1 <= K) {
                ExtScalar up = sc * alg->iota_ext() * alpha[static_cast<size_t>(k + K)] * x;
                out[static_cast<size_t>(k + 1 + K)] = out[static_cast<size_t>(k + 1 + K)] + up;
            }
            if (k - 1 >= -K) {
                ExtScalar down = sc * beta[static_cast<size_t>(k + K)] * x;
                out[static_cast<size_t>(k - 1 + K)] = out[static_cast<size_t>(k - 1 + K)] - down;
            }
        }
    }

    WElement from_chain(const std::vector<ExtScalar>& xi) const {
        WElement r = WElement::zero(ctx, M);
        for (int k = -K; k <= K; ++k) {
            const ExtScalar& c = xi[static_cast<size_t>(k + K)];
            if (c.is_zero_like()) continue;
            r = r + chain[static_cast<size_t>(k + K)].scaled(c);
        }
        return r;
    }

    // Triangular solve by degree level, for levels visible inside the
    // truncation (|k| <= M+1); the one extra chain pair at |k| = M+1 is
    // resolved through the e-side by convention.
    std::vector<ExtScalar> to_chain(const WElement& x) const {
        std::vector<ExtScalar> xi = chain_zero();
        WElement r = x;
        int top = M + 1;
        // top level: only the b_M slot survives truncation
        {
            const WElement& uk = chain[static_cast<size_t>(top + K)];
            ExtScalar lead = uk.b[static_cast<size_t>(top - 1)];
            ExtScalar c = r.b[static_cast<size_t>(top - 1)] / lead;
            if (!c.is_zero_like()) {
                xi[static_cast<size_t>(top + K)] = c;
                r = r - uk.scaled(c);
            }
        }
        for (int d = top - 1; d >= 1; --d) {
            const WElement& up = chain[static_cast<size_t>(d + K)];
            const WElement& dn = chain[static_cast<size_t>(-d + K)];
            ExtScalar a11 = up.a[static_cast<size_t>(d)], a12 = dn.a[static_cast<size_t>(d)];
            ExtScalar a21 = up.b[static_cast<size_t>(d - 1)], a22 = dn.b[static_cast<size_t>(d - 1)];
            ExtScalar det = a11 * a22 - a12 * a21;
            ExtScalar r1 = r.a[static_cast<size_t>(d)], r2 = r.b[static_cast<size_t>(d - 1)];
            ExtScalar x1 = (r1 * a22 - r2 * a12) / det;
            ExtScalar x2 = (a11 * r2 - a21 * r1) / det;
            if (!x1.is_zero_like()) {
                xi[static_cast<size_t>(d + K)] = x1;
                r = r - up.scaled(x1);
            }
            if (!x2.is_zero_like()) {
                xi[static_cast<size_t>(-d + K)] = x2;
                r = r - dn.scaled(x2);
            }
        }
        xi[static_cast<size_t>(K)] = r.a[0];
        return xi;
    }

    // exp(c_v v) applied to chain coordinates, with sound per-index pruning
    std::vector<ExtScalar> chain_exp_v(const PadicScalar& c_v, std::vector<ExtScalar> xi) const {
        if (c_v.is_zero_like()) return xi;
        int64_t nv = std::max<int64_t>(1, c_v.val().half / 2);
        int64_t areq = ctx->digits + ((2 * nv + 1) * (M + 2)) / 2 + 16;
        std::vector<ExtScalar> acc = xi;
        std::vector<ExtScalar> term = std::move(xi);
        std::vector<ExtScalar> next = chain_zero();
        ExtScalar cv = ExtScalar::of(c_v);
        for (int64_t j = 1; j <= 40000; ++j) {
            chain_apply_v(next, term);
            ExtScalar jinv = ExtScalar::of(PadicScalar::from_int(ctx, j).inv());
            bool alive = false;
            for (int k = -K; k <= K; ++k) {
                ExtScalar t = next[static_cast<size_t>(k + K)] * cv * jinv;
                if (!t.is_zero_like()) {
                    int64_t ph = 2 * areq - prune_floor[static_cast<size_t>(k + K)];
                    if (t.val().half >= ph) {
                        t = ExtScalar::zero(ctx);
                    } else {
                        alive = true;
                    }
                }
                term[static_cast<size_t>(k + K)] = t;
                if (!t.is_zero_like())
                    acc[static_cast<size_t>(k + K)] = acc[static_cast<size_t>(k + K)] + t;
            }
            if (!alive) break;
        }
        return acc;
    }

    // image of exp(c_v v) on the cyclic vector (exact left-module action)
    WElement exp_v(const PadicScalar& c_v) const {
        std::vector<ExtScalar> xi = chain_zero();
        xi[static_cast<size_t>(K)] = ExtScalar::one(ctx);
        return from_chain(chain_exp_v(c_v, std::move(xi)));
    }

    // operator exp(c_v v) applied to an arbitrary truncated element
    WElement apply_exp_v(const PadicScalar& c_v, const WElement& x) const {
        if (c_v.is_zero_like()) return x;
        return from_chain(chain_exp_v(c_v, to_chain(x)));
    }

    // operator exp(c_h h): series in the h-action (scalar multiplication
    // only on the cyclic vector, an honest operator elsewhere)
    WElement apply_exp_h(const PadicScalar& c_h, const WElement& x) const {
        if (c_h.is_zero_like()) return x;
        if (c_h.val() < Val::of_int(1)) throw domain_error("exp(c h) needs v_p(c) >= 1");
        WElement acc = x;
        WElement term = x;
        int64_t stop_half = 2 * (ctx->digits + 4);
        for (int64_t k = 1; k <= 100000; ++k) {
            term = apply_h(term).scaled(ExtScalar::of(c_h / PadicScalar::from_int(ctx, k)));
            if (term.is_zero_like()) break;
            acc = acc + term;
            int64_t tmin = INT64_MAX;
            for (const auto& e : term.a) if (!e.is_zero_like()) tmin = std::min(tmin, e.val().half);
            for (const auto& e : term.b) if (!e.is_zero_like()) tmin = std::min(tmin, e.val().half);
            if (tmin >= stop_half) break;
        }
        return acc;
    }

    // operator exp(c_w w): Cauchy product with the scalar w-series
    WElement apply_exp_w(const PadicScalar& c_w, const WElement& x) const {
        if (c_w.is_zero_like()) return x;
        WElement r = WElement::zero(ctx, M);
        std::vector<PadicScalar> t(static_cast<size_t>(M) + 1, PadicScalar::zero(ctx));
        t[0] = PadicScalar::from_int(ctx, 1);
        for (int i = 1; i <= M; ++i)
            t[static_cast<size_t>(i)] = t[static_cast<size_t>(i - 1)] * c_w / PadicScalar::from_int(ctx, i);
        for (int m = 0; m <= M; ++m) {
            ExtScalar sa = ExtScalar::zero(ctx), sb = ExtScalar::zero(ctx);
            for (int i = 0; i <= m; ++i) {
                const PadicScalar& ti = t[static_cast<size_t>(i)];
                if (ti.is_zero_like()) continue;
                sa = sa + ti * x.a[static_cast<size_t>(m - i)];
                sb = sb + ti * x.b[static_cast<size_t>(m - i)];
            }
            r.a[static_cast<size_t>(m)] = sa;
            r.b[static_cast<size_t>(m)] = sb;
        }
        return r;
    }

    // direct w-basis series for exp(c_v v); O(M^2) per term, test oracle only
    WElement exp_v_direct(const PadicScalar& c_v, int max_terms = 4000) const {
        WElement acc = WElement::delta(ctx, M);
        WElement term = acc;
        int64_t stop_half = 2 * (ctx->digits + (M + 2) * 4 + 8);
        for (int j = 1; j <= max_terms; ++j) {
            term = apply_v(term).scaled(ExtScalar::of(c_v * PadicScalar::from_int(ctx, j).inv()));
            if (term.is_zero_like()) break;
            acc = acc + term;
            int64_t tmin = INT64_MAX;
            for (const auto& e : term.a) if (!e.is_zero_like()) tmin = std::min(tmin, e.val().half);
            for (const auto& e : term.b) if (!e.is_zero_like()) tmin = std::min(tmin, e.val().half);
            if (tmin >= stop_half) break;
        }
        return acc;
    }

    // chain vector u_k as a truncated element (k in [-K, K])
    const WElement& chain_vector(int k) const { return chain[static_cast<size_t>(k + K)]; }

private:
    WElement apply_cols(const WElement& x, const std::vector<WElement>& colsA,
                        const std::vector<WElement>& colsB) const {
        WElement r = WElement::zero(ctx, M);
        for (int m = 0; m <= M; ++m) {
            const ExtScalar& ca = x.a[static_cast<size_t>(m)];
            if (!ca.is_zero_like()) r = r + colsA[static_cast<size_t>(m)].scaled(ca);
            const ExtScalar& cb = x.b[static_cast<size_t>(m)];
            if (!cb.is_zero_like()) r = r + colsB[static_cast<size_t>(m)].scaled(cb);
        }
        return r;
    }

    void build() {
        build_columns();
        build_chain();
    }

    void build_columns() {
        hA.reserve(static_cast<size_t>(M) + 1);
        vA.reserve(static_cast<size_t>(M) + 1);
        hB.reserve(static_cast<size_t>(M) + 1);
        vB.reserve(static_cast<size_t>(M) + 1);
        ExtScalar two = ExtScalar::from_int(ctx, 2);
        ExtScalar twoiota = ExtScalar::from_int(ctx, 2) * alg->iota_ext();
        // bases: h.1 = mu, v.1 = b_0, h.v.1 = mu v + 2c w, v.v.1 = xs + c w^2
        WElement h0 = WElement::zero(ctx, M);
        h0.a[0] = mu;
        WElement v0 = WElement::zero(ctx, M);
        v0.b[0] = ExtScalar::one(ctx);
        WElement hb0 = WElement::zero(ctx, M);
        hb0.b[0] = mu;
        if (M >= 1) hb0.a[1] = two * cc;
        WElement vb0 = WElement::zero(ctx, M);
        vb0.a[0] = xs;
        if (M >= 2) vb0.a[2] = cc;
        hA.push_back(h0);
        vA.push_back(v0);
        hB.push_back(hb0);
        vB.push_back(vb0);
        for (int m = 1; m <= M; ++m) {
            hA.push_back(hA.back().shifted_w() + vA.back().scaled(two));
            vA.push_back(vA[static_cast<size_t>(m - 1)].shifted_w() + hA[static_cast<size_t>(m - 1)].scaled(twoiota));
            hB.push_back(hB.back().shifted_w() + vB.back().scaled(two));
            vB.push_back(vB[static_cast<size_t>(m - 1)].shifted_w() + hB[static_cast<size_t>(m - 1)].scaled(twoiota));
        }
    }

    void build_chain() {
        K = M + 1 + kChainHeadroom;
        chain.assign(static_cast<size_t>(2 * K + 1), WElement::zero(ctx, M));
        alpha.assign(static_cast<size_t>(2 * K + 1), ExtScalar::one(ctx));
        beta.assign(static_cast<size_t>(2 * K + 1), ExtScalar::one(ctx));
        ExtScalar lam0 = mu / sc;                    // h0 eigenvalue of the cyclic vector
        ExtScalar iota = alg->iota_ext();
        ExtScalar T = -(xs / (ExtScalar::from_int(ctx, 2) * iota * cc));  // (e f + f e).1
        ExtScalar half = ExtScalar::from_int(ctx, 2).inv();
        ExtScalar c1 = (T + lam0) * half;            // e f . 1
        ExtScalar b1 = (T - lam0) * half;            // f e . 1
        for (int k = -K; k <= K; ++k) {
            int64_t j = -k;
            if (k >= 0) {
                alpha[static_cast<size_t>(k + K)] = ExtScalar::one(ctx);
            } else {
                // e.u_{-j} = [fe.1 + j lam0 - j(j-1)] u_{-j+1}
                alpha[static_cast<size_t>(k + K)] =
                    b1 + ExtScalar::from_int(ctx, j) * lam0 - ExtScalar::from_int(ctx, j * (j - 1));
            }
            if (k <= 0) {
                beta[static_cast<size_t>(k + K)] = ExtScalar::one(ctx);
            } else {
                // f.u_k = [ef.1 - k lam0 - k(k-1)] u_{k-1}
                beta[static_cast<size_t>(k + K)] =
                    c1 - ExtScalar::from_int(ctx, k) * lam0 - ExtScalar::from_int(ctx, k * (k - 1));
            }
        }
        // u_0 = delta; u_1 = (w.1 + v0.1)/(2 iota); u_{-1} = (w.1 - v0.1)/2
        WElement del = WElement::delta(ctx, M);
        chain[static_cast<size_t>(K)] = del;
        ExtScalar scinv = sc.inv();
        WElement wd = del.shifted_w();
        WElement v0d = vA[0].scaled(scinv);
        ExtScalar inv2iota = (ExtScalar::from_int(ctx, 2) * iota).inv();
        if (K >= 1) {
            chain[static_cast<size_t>(1 + K)] = (wd + v0d).scaled(inv2iota);
            chain[static_cast<size_t>(-1 + K)] = (wd - v0d).scaled(half);
        }
        ExtScalar iotainv = iota.inv();
        for (int k = 1; k < K; ++k) {
            // u_{k+1} = (w u_k - beta_k u_{k-1}) / iota
            chain[static_cast<size_t>(k + 1 + K)] =
                (chain[static_cast<size_t>(k + K)].shifted_w() -
                 chain[static_cast<size_t>(k - 1 + K)].scaled(beta[static_cast<size_t>(k + K)]))
                    .scaled(iotainv);
        }
        for (int j = 1; j < K; ++j) {
            // u_{-j-1} = w u_{-j} - iota alpha_{-j} u_{-j+1}
            chain[static_cast<size_t>(-j - 1 + K)] =
                chain[static_cast<size_t>(-j + K)].shifted_w() -
                chain[static_cast<size_t>(-j + 1 + K)].scaled(iota * alpha[static_cast<size_t>(-j + K)]);
        }
        umin_half.assign(static_cast<size_t>(2 * K + 1), 0);
        for (int k = -K; k <= K; ++k) {
            int64_t mn = INT64_MAX;
            const WElement& u = chain[static_cast<size_t>(k + K)];
            for (const auto& e : u.a) if (!e.is_zero_like()) mn = std::min(mn, e.val().half);
            for (const auto& e : u.b) if (!e.is_zero_like()) mn = std::min(mn, e.val().half);
            umin_half[static_cast<size_t>(k + K)] = (mn == INT64_MAX) ? 0 : mn;
        }
        // floor_k = min_k' (umin[k'] + |k-k'|) so pruning stays sound under
        // the at-most-one-half loss per chain step
        prune_floor.assign(static_cast<size_t>(2 * K + 1), 0);
        std::vector<int64_t>& f = prune_floor;
        for (int i = 0; i <= 2 * K; ++i) f[static_cast<size_t>(i)] = umin_half[static_cast<size_t>(i)];
        for (int i = 1; i <= 2 * K; ++i)
            f[static_cast<size_t>(i)] = std::min(f[static_cast<size_t>(i)], f[static_cast<size_t>(i - 1)] + 1);
        for (int i = 2 * K - 1; i >= 0; --i)
            f[static_cast<size_t>(i)] = std::min(f[static_cast<size_t>(i)], f[static_cast<size_t>(i + 1)] + 1);
    }
};

// ---- module-level operations ----

// Substitute the torus and center relations into a PBW polynomial until only
// {w^k, w^k v} monomials remain:
//   (i) the polynomial is kept in normal form,
//  (ii) rightmost h^j -> lambda(h)^j and I^j -> lambda(I)^j,
// (iii) v^i for i >= 2 rewrites through v^2 = iota h^2 + c w^2 - chi(Delta).
inline WElement reduce(const PBWPoly& P, const WeightChar& lam, const InfChar& chi, int M) {
    const AlgebraParams* alg = P.alg;
    const PadicCtx* ctx = alg->ctx;
    WElement out = WElement::zero(ctx, M);
    PBWPoly work = P;
    ExtScalar lh = ExtScalar::of(lam.lambda_h), lI = ExtScalar::of(lam.lambda_I);
    ExtScalar iota = alg->iota_ext();
    ExtScalar pp = ExtScalar::from_int(ctx, static_cast<int64_t>(alg->p));
    int guard = 0;
    while (!work.terms.empty()) {
        if (++guard > 1000000) throw domain_error("reduce failed to terminate");
        auto it = work.terms.begin();
        PBWMono m = PBWMono::from_key(it->first);
        ExtScalar c = it->second;
        work.terms.erase(it);
        if (c.is_zero_like()) continue;
        if (m.kh || m.kI) {
            c = c * lh.pow(m.kh) * lI.pow(m.kI);
            m.kh = m.kI = 0;
        }
        if (m.kv <= 1) {
            // the v^2-rewrite never lowers the w-exponent, so terms beyond
            // the truncation cannot flow back below it: drop them
            if (m.kw > M) continue;
            auto& slot = (m.kv == 0) ? out.a[m.kw] : out.b[m.kw];
            slot = slot + c;
            continue;
        }
        // w^kw v^kv = w^kw v^(kv-2) (iota h^2 + c w^2 - chi)
        PBWMono mh{m.kw, static_cast<uint16_t>(m.kv - 2), 2, 0};
        work.terms[mh.key()] = work.coeff(mh) + iota * c;
        {
            std::vector<Gen> word = mono_word(PBWMono{m.kw, static_cast<uint16_t>(m.kv - 2), 0, 0});
            word.push_back(Gen::W);
            word.push_back(Gen::W);
            PBWPoly sq = normal_form_word(alg, word, pp * c, work.degree_cap);
            for (const auto& [k2, c2] : sq.terms) {
                PBWMono m2 = PBWMono::from_key(k2);
                work.terms[m2.key()] = work.coeff(m2) + c2;
            }
        }
        PBWMono ml{m.kw, static_cast<uint16_t>(m.kv - 2), 0, 0};
        work.terms[ml.key()] = work.coeff(ml) - chi.chi_delta * c;
    }
    return out;
}

// a_m = c_w^m / m!, b = 0
inline WElement exp_w_image(const PadicScalar& c_w, int M) {
    const PadicCtx* ctx = c_w.ctx();
    if (!c_w.is_zero_like() && c_w.val() < Val::of_int(1))
        throw domain_error("exp_w_image requires v_p(c_w) >= 1");
    WElement r = WElement::zero(ctx, M);
    PadicScalar t = PadicScalar::from_int(ctx, 1);
    r.a[0] = ExtScalar::of(t);
    if (c_w.is_zero_like()) return r;
    for (int m = 1; m <= M; ++m) {
        t = t * c_w / PadicScalar::from_int(ctx, m);
        r.a[static_cast<size_t>(m)] = ExtScalar::of(t);
    }
    return r;
}

// exact image of exp(c_v v) on the cyclic vector
inline WElement exp_v_image(const PadicScalar& c_v, const ModuleEngine& eng) {
    if (!c_v.is_zero_like() && c_v.val() < Val::of_int(1))
        throw domain_error("exp_v_image requires v_p(c_v) >= 1");
    return eng.exp_v(c_v);
}

// The closed two-sum model with x treated as a scalar throughout:
//   sum c^{2j}/(2j)! (c w^2 + x)^j  +  sum c^{2j+1}/(2j+1)! (c w^2 + x)^j v.
// This is the valuation model behind the slope estimates; the exact image
// differs from it in coefficients of strictly larger valuation.
inline WElement exp_v_image_scalar_model(const PadicScalar& c_v, const ModuleEngine& eng) {
    const PadicCtx* ctx = eng.ctx;
    int M = eng.M;
    WElement r = WElement::zero(ctx, M);
    if (c_v.is_zero_like()) {
        r.a[0] = ExtScalar::one(ctx);
        return r;
    }
    int64_t nv = std::max<int64_t>(1, c_v.val().half / 2);
    int64_t jmax = (2 * (ctx->digits + (2 * nv + 1) * (M + 2) / 2 + 8)) / std::max<int64_t>(1, 2 * nv - 1) + M + 8;
    ExtScalar cfact = ExtScalar::one(ctx);  // c^(2j)/(2j)!
    ExtScalar codd = ExtScalar::of(c_v);    // c^(2j+1)/(2j+1)!
    ExtScalar cv2 = ExtScalar::of(c_v * c_v);
    for (int64_t j = 0; j <= jmax; ++j) {
        if (j > 0) {
            PadicScalar d = (PadicScalar::from_int(ctx, 2 * j - 1) * PadicScalar::from_int(ctx, 2 * j)).inv();
            cfact = cfact * cv2 * ExtScalar::of(d);
            PadicScalar d2 = (PadicScalar::from_int(ctx, 2 * j) * PadicScalar::from_int(ctx, 2 * j + 1)).inv();
            codd = codd * cv2 * ExtScalar::of(d2);
        }
        // (c w^2 + x)^j = sum_i binom(j,i) cc^i xs^(j-i) w^(2i)
        ExtScalar binom = ExtScalar::one(ctx);
        ExtScalar xpow = eng.xs.pow(static_cast<uint64_t>(j));
        for (int64_t i = 0; i <= j && 2 * i <= M; ++i) {
            ExtScalar coef = binom * eng.cc.pow(static_cast<uint64_t>(i)) * xpow;
            r.a[static_cast<size_t>(2 * i)] = r.a[static_cast<size_t>(2 * i)] + cfact * coef;
            r.b[static_cast<size_t>(2 * i)] = r.b[static_cast<size_t>(2 * i)] + codd * coef;
            // next binom(j, i+1) and x^(j-i-1)
            if (i < j) {
                PadicScalar bn = PadicScalar::from_int(ctx, j - i) / PadicScalar::from_int(ctx, i + 1);
                binom = binom * ExtScalar::of(bn);
                if (!eng.xs.is_zero_like()) {
                    xpow = xpow / eng.xs;
                } else {
                    xpow = (j - i - 1 == 0) ? ExtScalar::one(ctx) : ExtScalar::zero(ctx);
                }
            }
        }
    }
    return r;
}

// image of g = exp(c_w w) exp(c_v v) exp(c_h h) exp(c_I I): Cauchy product of
// the w-series with the exact exp_v image, scaled by exp(c_h mu + c_I lam_I)
inline WElement group_image(const SecondKindCoords& coords, const ModuleEngine& eng) {
    for (const PadicScalar* c : {&coords.cw, &coords.cv, &coords.ch, &coords.cI})
        if (!c->is_zero_like() && c->val() < Val::of_int(1))
            throw domain_error("group_image requires coordinates of valuation >= 1");
    WElement img = exp_v_image(coords.cv, eng);
    img = eng.apply_exp_w(coords.cw, img);
    ExtScalar s = ext_exp(ExtScalar::of(coords.ch) * eng.mu + ExtScalar::of(coords.cI) * eng.lambda_I);
    return img.scaled(s);
}

// ---- valuation profiles and the tail-slope membership proxy ----

struct ProfileRow {
    int m;
    Val val_a, val_b;
    bool censored_a = false, censored_b = false;  // vanished at precision
};

inline std::vector<ProfileRow> valuation_profile(const WElement& w) {
    std::vector<ProfileRow> rows;
    rows.reserve(static_cast<size_t>(w.M) + 1);
    for (int m = 0; m <= w.M; ++m) {
        ProfileRow r;
        r.m = m;
        const ExtScalar& ea = w.a[static_cast<size_t>(m)];
        const ExtScalar& eb = w.b[static_cast<size_t>(m)];
        r.val_a = ea.val();
        r.val_b = eb.val();
        r.censored_a = !ea.is_exact_zero() && ea.is_zero_like();
        r.censored_b = !eb.is_exact_zero() && eb.is_zero_like();
        rows.push_back(r);
    }
    return rows;
}

struct SlopeFit {
    bool defined = false;   // at least two finite points
    Rational slope{0, 1};   // in valuation units per index
    int points = 0;
    int censored = 0;
};

inline SlopeFit tail_slope(const std::vector<ProfileRow>& rows, int window, bool b_side) {
    SlopeFit fit;
    int M = static_cast<int>(rows.size()) - 1;
    int64_t n = 0, sm = 0, sv = 0, smm = 0, smv = 0;
    for (int m = M - window + 1; m <= M; ++m) {
        const ProfileRow& r = rows[static_cast<size_t>(m)];
        bool censored = b_side ? r.censored_b : r.censored_a;
        Val v = b_side ? r.val_b : r.val_a;
        if (censored) {
            ++fit.censored;
            continue;
        }
        if (v.inf) continue;  // exact zeros carry no slope information
        ++n;
        sm += m;
        sv += v.half;
        smm += static_cast<int64_t>(m) * m;
        smv += static_cast<int64_t>(m) * v.half;
    }
    fit.points = static_cast<int>(n);
    if (n < 2) return fit;
    // least squares in half-units: slope = (n smv - sm sv) / (n smm - sm^2) / 2
    int64_t num = n * smv - sm * sv;
    int64_t den = 2 * (n * smm - sm * sm);
    fit.defined = true;
    fit.slope = Rational::of(num, den);
    return fit;
}

struct MembershipVerdict {
    bool in_Wn = false;
    SlopeFit fit_a, fit_b;
};

// Tail-slope proxy for membership in the level-n convergence class: both
// coefficient families must gain valuation strictly faster than n per index.
// The default margin 1/2 separates the two slope regimes that group images
// can realize: non-members reach at most n + 1/2 - 1/(p-1) and members start
// at n + 1 - 1/(p-1), so any margin in that gap classifies correctly.
inline MembershipVerdict in_Wn(const WElement& w, int n, int window,
                               Rational margin = Rational{1, 2}) {
    if (window > w.M / 2) throw window_too_large("tail window exceeds half the truncation");
    if (window < 2) throw window_too_large("tail window must cover at least two indices");
    auto rows = valuation_profile(w);
    MembershipVerdict v;
    v.fit_a = tail_slope(rows, window, false);
    v.fit_b = tail_slope(rows, window, true);
    Rational threshold = Rational::of(n, 1) + margin;
    bool ok_a = !v.fit_a.defined || v.fit_a.slope > threshold;
    bool ok_b = !v.fit_b.defined || v.fit_b.slope > threshold;
    v.in_Wn = ok_a && ok_b;
    return v;
}

// ---- the elementary factorial-valuation bound ----

struct FactorialPvalReport {
    int64_t valuation = 0;
    int64_t k = 0;
    Rational bound{0, 1};
    bool holds = false;
};

// v_p(prod_{i=0..n} (N + i a)) <= k + n/(p-1) for the minimal k with
// N + a n <= p^k
inline FactorialPvalReport factorial_pval_oracle(int64_t N, int64_t a, int64_t n, uint32_t p) {
    if (N <= 0 || a <= 0 || a >= static_cast<int64_t>(p) || n < 0)
        throw domain_error("factorial_pval_oracle: need N > 0, 0 < a < p, n >= 0");
    FactorialPvalReport rep;
    int64_t top = N + a * n;
    int64_t pk = 1;
    while (pk < top) pk *= p;
    int64_t k = 0;
    for (int64_t t = 1; t < pk; t *= p) ++k;
    rep.k = k;
    for (int64_t i = 0; i <= n; ++i)
        rep.valuation += val_p_u64(static_cast<uint64_t>(N + i * a), p);
    rep.bound = Rational::of(k * static_cast<int64_t>(p - 1) + n, static_cast<int64_t>(p - 1));
    rep.holds = !(Rational::of(rep.valuation, 1) > rep.bound);
    return rep;
}

// ---- GL2-side embedding and the h-eigenspace check ----

// (a_i, b_i) -> (a_i, sqrt(p) b_i) on the basis {w_0^i, w_0^i v_0}
inline WElement embed_gl2(const WElement& w) {
    WElement r = w;
    ExtScalar s = ExtScalar::sqrt_p(w.ctx);
    for (auto& x : r.b) x = s * x;
    return r;
}

struct EigenReport {
    ExtScalar eigenvalue;
    int dimension = 0;
    bool eigen_relation_ok = false;
};

namespace detail_weight {

// kernel dimension of a (possibly rectangular) matrix over the field at
// working precision, by elimination with minimal-valuation pivoting
inline int kernel_dimension(std::vector<std::vector<ExtScalar>> A, int64_t zero_half) {
    if (A.empty()) return 0;
    int nrows = static_cast<int>(A.size());
    int ncols = static_cast<int>(A[0].size());
    int rank = 0;
    for (int col = 0; col < ncols && rank < nrows; ++col) {
        int piv = -1;
        int64_t best = INT64_MAX;
        for (int row = rank; row < nrows; ++row) {
            const ExtScalar& e = A[static_cast<size_t>(row)][static_cast<size_t>(col)];
            if (e.is_zero_like()) continue;
            int64_t h = e.val().half;
            if (h >= zero_half) continue;
            if (h < best) { best = h; piv = row; }
        }
        if (piv < 0) continue;
        std::swap(A[static_cast<size_t>(piv)], A[static_cast<size_t>(rank)]);
        ExtScalar inv = A[static_cast<size_t>(rank)][static_cast<size_t>(col)].inv();
        for (int row = rank + 1; row < nrows; ++row) {
            ExtScalar f = A[static_cast<size_t>(row)][static_cast<size_t>(col)];
            if (f.is_zero_like()) continue;
            f = f * inv;
            for (int c2 = col; c2 < ncols; ++c2)
                A[static_cast<size_t>(row)][static_cast<size_t>(c2)] =
                    A[static_cast<size_t>(row)][static_cast<size_t>(c2)] -
                    f * A[static_cast<size_t>(rank)][static_cast<size_t>(c2)];
        }
        ++rank;
    }
    return ncols - rank;
}

}  // namespace detail_weight

// Eigenvalue of the h-action attached to the image of e_0^k (k >= 0) or
// f_0^{-k} (k < 0) on the GL2-side module, and the dimension of that
// eigenspace at truncation.  The eigenspace is the kernel of the rectangular
// action matrix V_M -> V_{M+1}; using the square truncation instead admits a
// spurious direction assembled from the dropped top-degree rows.
inline EigenReport h_eigencheck(int k, const AlgebraParams* alg, const WeightChar& lam,
                                const InfChar& chi, int M) {
    if (std::abs(k) > M) throw domain_error("chain index beyond truncation");
    ExtScalar sqp = ExtScalar::sqrt_p(alg->ctx);
    ModuleEngine wide = ModuleEngine::gl2side(alg, lam, chi, M + 1);
    const WElement& u = wide.chain_vector(k);
    WElement hu = wide.apply_h(u).scaled(sqp);  // h = sqrt(p) h_0
    // read the eigenvalue at the entry of minimal valuation
    int best_m = -1;
    bool best_b = false;
    int64_t best = INT64_MAX;
    for (int m = 0; m <= M; ++m) {
        const ExtScalar& ea = u.a[static_cast<size_t>(m)];
        if (!ea.is_zero_like() && ea.val().half < best) { best = ea.val().half; best_m = m; best_b = false; }
        const ExtScalar& eb = u.b[static_cast<size_t>(m)];
        if (!eb.is_zero_like() && eb.val().half < best) { best = eb.val().half; best_m = m; best_b = true; }
    }
    EigenReport rep{ExtScalar::zero(alg->ctx), 0, false};
    if (best_m < 0) return rep;
    const ExtScalar& lead_u = best_b ? u.b[static_cast<size_t>(best_m)] : u.a[static_cast<size_t>(best_m)];
    const ExtScalar& lead_h = best_b ? hu.b[static_cast<size_t>(best_m)] : hu.a[static_cast<size_t>(best_m)];
    rep.eigenvalue = lead_h / lead_u;
    // chain vectors of index <= M have support inside the wide truncation,
    // so the eigen relation must hold on the nose
    WElement diff = hu - u.scaled(rep.eigenvalue);
    int64_t bound_half = 2 * (alg->ctx->requested - 16);
    rep.eigen_relation_ok = diff.close_to(WElement::zero(alg->ctx, M + 1), bound_half);
    // rectangular kernel: rows index V_{M+1}, columns index V_M
    int ncols = 2 * (M + 1), nrows = 2 * (M + 2);
    std::vector<std::vector<ExtScalar>> A(static_cast<size_t>(nrows),
                                          std::vector<ExtScalar>(static_cast<size_t>(ncols), ExtScalar::zero(alg->ctx)));
    for (int j = 0; j <= M; ++j) {
        const WElement& ca = wide.hA[static_cast<size_t>(j)];
        const WElement& cb = wide.hB[static_cast<size_t>(j)];
        for (int m = 0; m <= M + 1; ++m) {
            A[static_cast<size_t>(m)][static_cast<size_t>(j)] = sqp * ca.a[static_cast<size_t>(m)];
            A[static_cast<size_t>(M + 2 + m)][static_cast<size_t>(j)] = sqp * ca.b[static_cast<size_t>(m)];
            A[static_cast<size_t>(m)][static_cast<size_t>(M + 1 + j)] = sqp * cb.a[static_cast<size_t>(m)];
            A[static_cast<size_t>(M + 2 + m)][static_cast<size_t>(M + 1 + j)] = sqp * cb.b[static_cast<size_t>(m)];
        }
        // subtract eigenvalue * identity on the V_M block
        A[static_cast<size_t>(j)][static_cast<size_t>(j)] =
            A[static_cast<size_t>(j)][static_cast<size_t>(j)] - rep.eigenvalue;
        A[static_cast<size_t>(M + 2 + j)][static_cast<size_t>(M + 1 + j)] =
            A[static_cast<size_t>(M + 2 + j)][static_cast<size_t>(M + 1 + j)] - rep.eigenvalue;
    }
    rep.dimension = detail_weight::kernel_dimension(std::move(A), 2 * (alg->ctx->digits - 12));
    return rep;
}

}  // namespace padiq
