#pragma once

#include <array>

#include "padiq/ext.hpp"

namespace padiq {

struct not_in_subgroup : domain_error {
    using domain_error::domain_error;
};

// quadratic residue test mod p via Euler's criterion
inline bool is_qr_mod_p(uint64_t a, uint32_t p) {
    a %= p;
    if (a == 0) return true;
    return detail::powmod_u64(a, (p - 1) / 2, p) == 1;
}

inline uint32_t smallest_nonresidue(uint32_t p) {
    for (uint32_t i = 2; i < p; ++i)
        if (!is_qr_mod_p(i, p)) return i;
    throw domain_error("no quadratic non-residue found");
}

// Parameters of the algebra D = Q_p(sqrt p) + Q_p(sqrt p) tau, tau^2 = iota.
struct AlgebraParams {
    const PadicCtx* ctx;
    uint32_t p;
    uint32_t iota;
    int precision;

    AlgebraParams(uint32_t p_, int precision_, uint32_t iota_ = 0)
        : ctx(get_context(p_, precision_)), p(p_), precision(precision_) {
        iota = iota_ ? iota_ : smallest_nonresidue(p_);
        if (is_qr_mod_p(iota, p))
            throw domain_error("iota must be a quadratic non-residue mod p");
    }

    PadicScalar iota_scalar() const { return PadicScalar::from_int(ctx, iota); }
    ExtScalar iota_ext() const { return ExtScalar::from_int(ctx, iota); }
};

class Mat2;

// Quaternion x + y*tau with x, y in Q_p(sqrt p); tau^2 = iota and
// tau z tau^{-1} = conj(z).
class Quat {
public:
    ExtScalar x, y;
    const AlgebraParams* alg;

    Quat() : alg(nullptr) {}
    Quat(ExtScalar x_, ExtScalar y_, const AlgebraParams* a) : x(std::move(x_)), y(std::move(y_)), alg(a) {}

    static Quat zero(const AlgebraParams* a) {
        return Quat(ExtScalar::zero(a->ctx), ExtScalar::zero(a->ctx), a);
    }
    static Quat one(const AlgebraParams* a) {
        return Quat(ExtScalar::one(a->ctx), ExtScalar::zero(a->ctx), a);
    }
    static Quat tau(const AlgebraParams* a) {
        return Quat(ExtScalar::zero(a->ctx), ExtScalar::one(a->ctx), a);
    }
    static Quat scalar(const ExtScalar& s, const AlgebraParams* a) {
        return Quat(s, ExtScalar::zero(a->ctx), a);
    }
    // the uniformizer sqrt(pI), i.e. the element sqrt(p) of the center field
    static Quat sqrt_pI(const AlgebraParams* a) {
        return Quat(ExtScalar::sqrt_p(a->ctx), ExtScalar::zero(a->ctx), a);
    }

    Quat operator+(const Quat& o) const { return Quat(x + o.x, y + o.y, alg); }
    Quat operator-(const Quat& o) const { return Quat(x - o.x, y - o.y, alg); }
    Quat operator-() const { return Quat(-x, -y, alg); }

    Quat operator*(const Quat& o) const {
        // (x1 + y1 t)(x2 + y2 t) = x1 x2 + iota y1 conj(y2) + (x1 y2 + y1 conj(x2)) t
        ExtScalar rx = x * o.x + alg->iota_scalar() * (y * o.y.conj());
        ExtScalar ry = x * o.y + y * o.x.conj();
        return Quat(rx, ry, alg);
    }

    Quat scaled(const ExtScalar& s) const { return Quat(s * x, s * y, alg); }

    // reduced norm = det of the matrix embedding
    PadicScalar det() const {
        ExtScalar d = x * x.conj() - alg->iota_scalar() * (y * y.conj());
        // norms land in Q_p; the sqrt(p) component must vanish
        return d.a;
    }

    Quat inv() const {
        PadicScalar d = det();
        if (d.is_zero_like())
            throw precision_indeterminate("inverse of quaternion that vanishes at precision");
        PadicScalar di = d.inv();
        return Quat(di * x.conj(), (-di) * y, alg);
    }

    bool is_zero_like() const { return x.is_zero_like() && y.is_zero_like(); }

    bool close_to(const Quat& o, int64_t bound) const {
        return x.close_to(o.x, bound) && y.close_to(o.y, bound);
    }

    Quat pow_u64(uint64_t k) const {
        Quat r = one(alg);
        Quat b = *this;
        while (k) {
            if (k & 1) r = r * b;
            b = b * b;
            k >>= 1;
        }
        return r;
    }

    Mat2 embed() const;
};

// 2x2 matrix over Q_p(sqrt p); target of the algebra embedding.
class Mat2 {
public:
    std::array<ExtScalar, 4> m;  // row major: a00 a01 a10 a11
    const PadicCtx* ctx;

    Mat2() : ctx(nullptr) {}
    Mat2(ExtScalar a00, ExtScalar a01, ExtScalar a10, ExtScalar a11, const PadicCtx* c)
        : m{std::move(a00), std::move(a01), std::move(a10), std::move(a11)}, ctx(c) {}

    static Mat2 identity(const PadicCtx* c) {
        return Mat2(ExtScalar::one(c), ExtScalar::zero(c), ExtScalar::zero(c), ExtScalar::one(c), c);
    }

    Mat2 operator+(const Mat2& o) const {
        return Mat2(m[0] + o.m[0], m[1] + o.m[1], m[2] + o.m[2], m[3] + o.m[3], ctx);
    }
    Mat2 operator-(const Mat2& o) const {
        return Mat2(m[0] - o.m[0], m[1] - o.m[1], m[2] - o.m[2], m[3] - o.m[3], ctx);
    }
    Mat2 operator*(const Mat2& o) const {
        return Mat2(m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
                    m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3], ctx);
    }

    ExtScalar det() const { return m[0] * m[3] - m[1] * m[2]; }

    bool close_to(const Mat2& o, int64_t bound) const {
        for (int i = 0; i < 4; ++i)
            if (!m[static_cast<size_t>(i)].close_to(o.m[static_cast<size_t>(i)], bound)) return false;
        return true;
    }
};

// a + b tau  |->  [[a, iota b], [conj(b), conj(a)]]
inline Mat2 Quat::embed() const {
    return Mat2(x, alg->iota_scalar() * y, y.conj(), x.conj(), alg->ctx);
}

// v_D(q) = v_p(det(embed(q)))
inline Val v_D(const Quat& q) {
    if (q.is_zero_like()) return Val::infinite();
    return q.det().val();
}

// q - 1 in (sqrt(pI))^n O_D, decided coordinate-wise: both coordinates of
// q - 1 must have valuation >= n/2.
inline bool in_principal(const Quat& q, int n) {
    if (n < 1) throw domain_error("principal level must be >= 1");
    Quat d = q - Quat::one(q.alg);
    Val need = Val::of_half(n);
    auto coord_ok = [&](const PadicScalar& s, int64_t extra_half) {
        if (s.is_exact_zero()) return true;
        if (s.is_zero_at_prec()) {
            if (2 * s.zero_bound() + extra_half < need.half)
                throw precision_indeterminate("membership undecidable at working precision");
            return true;
        }
        return s.val().half + extra_half >= need.half;
    };
    return coord_ok(d.x.a, 0) && coord_ok(d.x.b, 1) && coord_ok(d.y.a, 0) && coord_ok(d.y.b, 1);
}

// ---- exponentials along the four basis axes (closed two-term forms) ----

namespace detail_quat {

// C(z) = sum z^k / (2k)!,  S(z) = sum z^k / (2k+1)!  for val(z) >= 1
inline void even_odd_series(const PadicCtx* c, const PadicScalar& z, PadicScalar& C, PadicScalar& S) {
    C = PadicScalar::from_int(c, 1);
    S = PadicScalar::from_int(c, 1);
    PadicScalar tc = C, ts = S;
    int64_t stop = c->digits + 2;
    for (int64_t k = 1; k < 200000; ++k) {
        tc = tc * z / PadicScalar::from_int(c, (2 * k - 1) * 2 * k);
        ts = ts * z / PadicScalar::from_int(c, 2 * k * (2 * k + 1));
        if (tc.is_zero_like() && ts.is_zero_like()) break;
        C = C + tc;
        S = S + ts;
        if (!tc.is_zero_like() && tc.val().half >= 2 * stop && (ts.is_zero_like() || ts.val().half >= 2 * stop))
            break;
    }
}

}  // namespace detail_quat

// exp(c * I); c in pZ_p
inline Quat exp_axis_I(const AlgebraParams* a, const PadicScalar& c) {
    return Quat::scalar(ext_exp(ExtScalar::of(c)), a);
}

// exp(c * h) with h = sqrt(pI): scalar exponential of c*sqrt(p)
inline Quat exp_axis_h(const AlgebraParams* a, const PadicScalar& c) {
    return Quat::scalar(ext_exp(ExtScalar(PadicScalar::zero(a->ctx), c)), a);
}

// exp(c * w) with w = tau, tau^2 = iota: cosh/sinh pair in iota*c^2
inline Quat exp_axis_w(const AlgebraParams* a, const PadicScalar& c) {
    if (c.is_zero_like()) return Quat::one(a);
    PadicScalar z = a->iota_scalar() * c * c;
    PadicScalar C, S;
    detail_quat::even_odd_series(a->ctx, z, C, S);
    return Quat(ExtScalar::of(C), ExtScalar::of(S * c), a);
}

// exp(c * v) with v = sqrt(p) tau, v^2 = -p*iota: pair in -p*iota*c^2
inline Quat exp_axis_v(const AlgebraParams* a, const PadicScalar& c) {
    if (c.is_zero_like()) return Quat::one(a);
    PadicScalar z = (-(a->iota_scalar()) * c * c).shift_p(1);
    PadicScalar C, S;
    detail_quat::even_odd_series(a->ctx, z, C, S);
    return Quat(ExtScalar::of(C), ExtScalar(PadicScalar::zero(a->ctx), S * c), a);
}

// generic exp for arguments in p O_D (converges for p >= 5)
inline Quat quat_exp(const Quat& q) {
    const AlgebraParams* a = q.alg;
    Quat sum = Quat::one(a);
    Quat term = Quat::one(a);
    int64_t stop = 2 * (a->ctx->digits + 2);
    for (int64_t k = 1; k < 200000; ++k) {
        term = term * q;
        PadicScalar ki = PadicScalar::from_int(a->ctx, k).inv();
        term = term.scaled(ExtScalar::of(ki));
        if (term.is_zero_like()) break;
        sum = sum + term;
        Val tv = min(term.x.val(), term.y.val());
        if (!tv.inf && tv.half >= stop) break;
    }
    return sum;
}

// log(q) for q in U^2_D, as a series in (q - 1)
inline Quat quat_log(const Quat& q) {
    const AlgebraParams* a = q.alg;
    Quat z = q - Quat::one(a);
    Quat sum = Quat::zero(a);
    Quat zk = Quat::one(a);
    int64_t stop = 2 * (a->ctx->digits + 2);
    for (int64_t k = 1; k < 400000; ++k) {
        zk = zk * z;
        if (zk.is_zero_like()) break;
        PadicScalar ki = PadicScalar::from_int(a->ctx, k).inv();
        Quat term = zk.scaled(ExtScalar::of(k % 2 == 0 ? -ki : ki));
        sum = sum + term;
        Val tv = min(zk.x.val(), zk.y.val());
        if (!tv.inf && tv.half >= stop) break;
    }
    return sum;
}

// p-th root within the principal filtration: given q in U^{2(n+1)}_D, find
// r in U^{2n}_D with r^p = q, by successive approximation on congruence
// levels.
inline Quat pth_root_in_lower(const Quat& q, int n) {
    const AlgebraParams* a = q.alg;
    if (!in_principal(q, 2 * (n + 1)))
        throw not_in_subgroup("argument not in U^{2(n+1)}_D");
    Quat r = Quat::one(a);
    PadicScalar pinv = PadicScalar::from_int(a->ctx, a->p).inv();
    int64_t target = 2 * (a->ctx->digits - 1);
    for (int iter = 0; iter < a->ctx->digits + 8; ++iter) {
        Quat defect = r.inv().pow_u64(a->p) * q;
        Quat l = quat_log(defect);
        Val lv = min(l.x.val(), l.y.val());
        if (l.is_zero_like() || lv.half >= target) break;
        Quat step = quat_exp(l.scaled(ExtScalar::of(pinv)));
        r = r * step;
    }
    return r;
}

}  // namespace padiq
