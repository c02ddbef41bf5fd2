#pragma once

#include <array>

#include "padiq/quaternion.hpp"

namespace padiq {

struct not_in_u2 : domain_error {
    using domain_error::domain_error;
};

struct bracket_not_closed : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Gen : uint8_t { W = 0, V = 1, H = 2, I = 3 };

inline const char* gen_name(Gen g) {
    switch (g) {
        case Gen::W: return "w";
        case Gen::V: return "v";
        case Gen::H: return "h";
        case Gen::I: return "I";
    }
    return "?";
}

// Element of g_D in the basis (I, h, w, v).  Under the identification
// g_D ~ O_D, the element is (cI + ch*sqrt(p)) + (cw + cv*sqrt(p))*tau.
struct LieVec {
    PadicScalar cI, ch, cw, cv;
    const AlgebraParams* alg;

    static LieVec zero(const AlgebraParams* a) {
        auto z = PadicScalar::zero(a->ctx);
        return LieVec{z, z, z, z, a};
    }

    static LieVec basis(const AlgebraParams* a, Gen g) {
        LieVec x = zero(a);
        x.coord(g) = PadicScalar::from_int(a->ctx, 1);
        return x;
    }

    PadicScalar& coord(Gen g) {
        switch (g) {
            case Gen::W: return cw;
            case Gen::V: return cv;
            case Gen::H: return ch;
            case Gen::I: return cI;
        }
        return cI;
    }
    const PadicScalar& coord(Gen g) const { return const_cast<LieVec*>(this)->coord(g); }

    Quat to_quat() const {
        return Quat(ExtScalar(cI, ch), ExtScalar(cw, cv), alg);
    }

    LieVec operator+(const LieVec& o) const {
        return LieVec{cI + o.cI, ch + o.ch, cw + o.cw, cv + o.cv, alg};
    }
    LieVec operator-(const LieVec& o) const {
        return LieVec{cI - o.cI, ch - o.ch, cw - o.cw, cv - o.cv, alg};
    }
    LieVec scaled(const PadicScalar& s) const {
        return LieVec{s * cI, s * ch, s * cw, s * cv, alg};
    }

    bool close_to(const LieVec& o, int64_t bound) const {
        return cI.close_to(o.cI, bound) && ch.close_to(o.ch, bound) &&
               cw.close_to(o.cw, bound) && cv.close_to(o.cv, bound);
    }

    bool is_zero_like() const {
        return cI.is_zero_like() && ch.is_zero_like() && cw.is_zero_like() && cv.is_zero_like();
    }

    Val min_val() const {
        return min(min(cI.val(), ch.val()), min(cw.val(), cv.val()));
    }
};

// reads (cI + ch s) + (cw + cv s) tau off the quaternion coordinates;
// when `integral` is set the coordinates must land in the Z_p-lattice
inline LieVec lievec_from_quat(const Quat& q, bool integral_required = false) {
    LieVec x{q.x.a, q.x.b, q.y.a, q.y.b, q.alg};
    if (integral_required) {
        for (Gen g : {Gen::I, Gen::H, Gen::W, Gen::V}) {
            const auto& c = x.coord(g);
            if (!c.is_zero_like() && c.val() < Val::of_int(0))
                throw bracket_not_closed("coordinates left the Z_p-lattice");
        }
    }
    return x;
}

// Lie bracket via the quaternion commutator, re-expressed in coordinates;
// must stay inside the lattice.
inline LieVec bracket(const LieVec& a, const LieVec& b) {
    Quat qa = a.to_quat(), qb = b.to_quat();
    Quat comm = qa * qb - qb * qa;
    return lievec_from_quat(comm, true);
}

// exp(p * x): lands in U^2_D for integral coordinates
inline Quat exp_g(const LieVec& x) {
    for (Gen g : {Gen::I, Gen::H, Gen::W, Gen::V}) {
        const auto& c = x.coord(g);
        if (!c.is_zero_like() && c.val() < Val::of_int(0))
            throw domain_error("exp_g requires Z_p coordinates");
    }
    Quat arg = x.to_quat();
    PadicScalar pp = PadicScalar::from_int(x.alg->ctx, x.alg->p);
    return quat_exp(arg.scaled(ExtScalar::of(pp)));
}

inline void require_u2(const Quat& g) {
    if (!in_principal(g, 2)) throw not_in_u2("element not in U^2_D");
}

// log(g)/p in the (I,h,w,v) basis
inline LieVec log_u2(const Quat& g) {
    require_u2(g);
    Quat l = quat_log(g);
    PadicScalar pinv = PadicScalar::from_int(g.alg->ctx, g.alg->p).inv();
    return lievec_from_quat(l.scaled(ExtScalar::of(pinv)), false);
}

// Coordinates of the second kind: g = exp(c_w w) exp(c_v v) exp(c_h h) exp(c_I I)
// for the default generator order; all coordinates lie in pZ_p.
struct SecondKindCoords {
    PadicScalar cw, cv, ch, cI;
    const AlgebraParams* alg;

    Val n_w() const { return cw.val(); }
    Val n_v() const { return cv.val(); }

    Quat to_group() const {
        return exp_axis_w(alg, cw) * exp_axis_v(alg, cv) * exp_axis_h(alg, ch) * exp_axis_I(alg, cI);
    }
};

using GenOrder = std::array<Gen, 4>;
inline constexpr GenOrder kOrderWVHI{Gen::W, Gen::V, Gen::H, Gen::I};
inline constexpr GenOrder kOrderIHWV{Gen::I, Gen::H, Gen::W, Gen::V};

inline Quat exp_axis(const AlgebraParams* a, Gen g, const PadicScalar& c) {
    switch (g) {
        case Gen::W: return exp_axis_w(a, c);
        case Gen::V: return exp_axis_v(a, c);
        case Gen::H: return exp_axis_h(a, c);
        case Gen::I: return exp_axis_I(a, c);
    }
    throw domain_error("bad generator");
}

// Iterative peeling: keep the running inverse product E = exp(-c4 o4)...exp(-c1 o1)
// and feed the log of the residual back into the coordinates.  Each pass gains
// at least one level of congruence depth.
inline std::array<PadicScalar, 4> peel_ordered(const Quat& g, const GenOrder& order) {
    const AlgebraParams* a = g.alg;
    require_u2(g);
    std::array<PadicScalar, 4> c{PadicScalar::zero(a->ctx), PadicScalar::zero(a->ctx),
                                 PadicScalar::zero(a->ctx), PadicScalar::zero(a->ctx)};
    std::array<Quat, 4> E{Quat::one(a), Quat::one(a), Quat::one(a), Quat::one(a)};
    int64_t target = 2 * (a->ctx->digits - 1);
    int64_t last_half = -1;
    for (int iter = 0; iter < a->ctx->digits + 12; ++iter) {
        Quat r = E[3] * E[2] * E[1] * E[0] * g;
        Quat l = quat_log(r);
        Val lv = min(l.x.val(), l.y.val());
        if (l.is_zero_like() || lv.half >= target) return c;
        if (lv.half <= last_half)
            throw domain_error("second-kind peeling failed to converge");
        last_half = lv.half;
        LieVec lx = lievec_from_quat(l, false);
        for (int i = 0; i < 4; ++i) {
            const PadicScalar& inc = lx.coord(order[static_cast<size_t>(i)]);
            if (inc.is_zero_like()) continue;
            c[static_cast<size_t>(i)] = c[static_cast<size_t>(i)] + inc;
            E[static_cast<size_t>(i)] = E[static_cast<size_t>(i)] * exp_axis(a, order[static_cast<size_t>(i)], -inc);
        }
    }
    return c;
}

inline SecondKindCoords to_second_kind(const Quat& g) {
    auto c = peel_ordered(g, kOrderWVHI);
    return SecondKindCoords{c[0], c[1], c[2], c[3], g.alg};
}

}  // namespace padiq
