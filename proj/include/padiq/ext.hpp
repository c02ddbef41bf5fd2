#pragma once

#include "padiq/padic.hpp"

namespace padiq {

// Element a + b*sqrt(p) of the ramified quadratic extension Q_p(sqrt(p)).
// Valuations live in (1/2)Z; conjugation flips the sign of b.
class ExtScalar {
public:
    PadicScalar a, b;

    ExtScalar() = default;
    ExtScalar(PadicScalar a_, PadicScalar b_) : a(std::move(a_)), b(std::move(b_)) {}

    static ExtScalar zero(const PadicCtx* c) {
        return ExtScalar(PadicScalar::zero(c), PadicScalar::zero(c));
    }
    static ExtScalar one(const PadicCtx* c) {
        return ExtScalar(PadicScalar::from_int(c, 1), PadicScalar::zero(c));
    }
    static ExtScalar from_int(const PadicCtx* c, int64_t n) {
        return ExtScalar(PadicScalar::from_int(c, n), PadicScalar::zero(c));
    }
    static ExtScalar sqrt_p(const PadicCtx* c) {
        return ExtScalar(PadicScalar::zero(c), PadicScalar::from_int(c, 1));
    }
    static ExtScalar of(PadicScalar x) {
        return ExtScalar(x, PadicScalar::zero(x.ctx()));
    }

    const PadicCtx* ctx() const { return a.ctx() ? a.ctx() : b.ctx(); }

    bool is_zero_like() const { return a.is_zero_like() && b.is_zero_like(); }
    bool is_exact_zero() const { return a.is_exact_zero() && b.is_exact_zero(); }

    Val val() const {
        Val va = a.val();
        Val vb = b.val();
        if (!vb.inf) vb.half += 1;
        return min(va, vb);
    }

    ExtScalar conj() const { return ExtScalar(a, -b); }

    ExtScalar operator-() const { return ExtScalar(-a, -b); }

    ExtScalar operator+(const ExtScalar& o) const { return ExtScalar(a + o.a, b + o.b); }
    ExtScalar operator-(const ExtScalar& o) const { return ExtScalar(a - o.a, b - o.b); }

    ExtScalar operator*(const ExtScalar& o) const {
        // (a1 + b1 s)(a2 + b2 s) = a1 a2 + p b1 b2 + (a1 b2 + b1 a2) s,  s^2 = p
        PadicScalar ra = a * o.a + (b * o.b).shift_p(1);
        PadicScalar rb = a * o.b + b * o.a;
        return ExtScalar(ra, rb);
    }

    // field norm a^2 - p b^2 (an element of Q_p)
    PadicScalar norm() const { return a * a - (b * b).shift_p(1); }

    ExtScalar inv() const {
        if (is_zero_like())
            throw precision_indeterminate("inverse of a value that is zero at working precision");
        PadicScalar n = norm();
        PadicScalar ni = n.inv();
        return ExtScalar(a * ni, (-b) * ni);
    }

    ExtScalar operator/(const ExtScalar& o) const { return *this * o.inv(); }

    ExtScalar shift_p(int64_t k) const { return ExtScalar(a.shift_p(k), b.shift_p(k)); }

    bool same_value(const ExtScalar& o) const { return a.same_value(o.a) && b.same_value(o.b); }

    bool close_to(const ExtScalar& o, int64_t bound) const {
        return a.close_to(o.a, bound) && b.close_to(o.b, bound);
    }

    ExtScalar pow(uint64_t k) const {
        ExtScalar r = one(ctx());
        ExtScalar base = *this;
        while (k) {
            if (k & 1) r = r * base;
            base = base * base;
            k >>= 1;
        }
        return r;
    }

    std::string str() const {
        if (b.is_exact_zero()) return a.str();
        return a.str() + " + (" + b.str() + ")*sqrt(p)";
    }
};

inline ExtScalar operator*(const PadicScalar& s, const ExtScalar& x) {
    return ExtScalar(s * x.a, s * x.b);
}
inline ExtScalar operator*(int64_t n, const ExtScalar& x) {
    return ExtScalar(n * x.a, n * x.b);
}

enum class ExtOp { Add, Mul, Inv, Conj };

// Dispatcher used by the CLI and property harnesses.
inline ExtScalar ext_arith(const ExtScalar& x, const ExtScalar& y, ExtOp op) {
    switch (op) {
        case ExtOp::Add: return x + y;
        case ExtOp::Mul: return x * y;
        case ExtOp::Inv: return x.inv();
        case ExtOp::Conj: return x.conj();
    }
    throw domain_error("unknown op");
}

// exp(z) as a truncated series; requires val(z) > 1/(p-1), which for p >= 5
// is implied by val(z) >= 1/2.
inline ExtScalar ext_exp(const ExtScalar& z) {
    const PadicCtx* c = z.ctx();
    if (z.is_zero_like()) return ExtScalar::one(c);
    if (!(z.val() >= Val::of_half(1)))
        throw domain_error("ext_exp requires valuation >= 1/2");
    ExtScalar sum = ExtScalar::one(c);
    ExtScalar term = ExtScalar::one(c);
    int64_t stop_half = 2 * (c->digits + 2);
    for (uint64_t k = 1; k < 100000; ++k) {
        term = term * z;
        term = ExtScalar(term.a / PadicScalar::from_int(c, static_cast<int64_t>(k)),
                         term.b / PadicScalar::from_int(c, static_cast<int64_t>(k)));
        if (term.is_zero_like()) break;
        sum = sum + term;
        if (term.val().half >= stop_half) break;
    }
    return sum;
}

// log(1 + z) for val(z) >= 1/2 (converges for p >= 5)
inline ExtScalar ext_log1p(const ExtScalar& z) {
    const PadicCtx* c = z.ctx();
    if (z.is_zero_like()) return ExtScalar::zero(c);
    if (!(z.val() >= Val::of_half(1)))
        throw domain_error("ext_log1p requires valuation >= 1/2");
    ExtScalar sum = ExtScalar::zero(c);
    ExtScalar zk = ExtScalar::one(c);
    int64_t stop_half = 2 * (c->digits + 2);
    for (uint64_t k = 1; k < 200000; ++k) {
        zk = zk * z;
        if (zk.is_zero_like()) break;
        ExtScalar term(zk.a / PadicScalar::from_int(c, static_cast<int64_t>(k)),
                       zk.b / PadicScalar::from_int(c, static_cast<int64_t>(k)));
        if (k % 2 == 0) term = -term;
        sum = sum + term;
        if (zk.val().half >= stop_half) break;
    }
    return sum;
}

}  // namespace padiq
