#pragma once

#include <cstdlib>
#include <ostream>
#include <string>

#include "padiq/context.hpp"

namespace padiq {

// Valuation in (1/2)Z together with the +infinity sentinel used for values
// that vanish (exactly, or at working precision).
struct Val {
    int64_t half = 0;   // twice the valuation
    bool inf = false;

    static Val infinite() { return Val{0, true}; }
    static Val of_int(int64_t v) { return Val{2 * v, false}; }
    static Val of_half(int64_t h) { return Val{h, false}; }

    bool operator==(const Val& o) const {
        if (inf || o.inf) return inf == o.inf;
        return half == o.half;
    }
    bool operator!=(const Val& o) const { return !(*this == o); }
    bool operator<(const Val& o) const {
        if (inf) return false;
        if (o.inf) return true;
        return half < o.half;
    }
    bool operator<=(const Val& o) const { return *this < o || *this == o; }
    bool operator>(const Val& o) const { return o < *this; }
    bool operator>=(const Val& o) const { return o <= *this; }

    Val operator+(const Val& o) const {
        if (inf || o.inf) return infinite();
        return Val{half + o.half, false};
    }

    std::string str() const {
        if (inf) return "inf";
        if (half % 2 == 0) return std::to_string(half / 2);
        return std::to_string(half) + "/2";
    }
};

inline Val min(const Val& a, const Val& b) { return a < b ? a : b; }

inline std::ostream& operator<<(std::ostream& os, const Val& v) { return os << v.str(); }

// Element of Q_p at fixed working precision.  Stored as p^v * unit with the
// unit kept modulo p^digits; `rel` counts how many base-p digits of the unit
// are meaningful, so the absolute precision of the value is v + rel.
// A value whose digits all vanished keeps the bound `v` at which that
// happened ("zero at precision"), distinct from an exact zero.
class PadicScalar {
public:
    enum class State : uint8_t { Finite, ExactZero, ZeroAtPrec };

    PadicScalar() : ctx_(nullptr), state_(State::ExactZero) { u_.fill(0); }

    static PadicScalar zero(const PadicCtx* c) {
        PadicScalar x;
        x.ctx_ = c;
        x.state_ = State::ExactZero;
        return x;
    }

    static PadicScalar zero_at(const PadicCtx* c, int64_t abs_bound) {
        PadicScalar x;
        x.ctx_ = c;
        x.state_ = State::ZeroAtPrec;
        x.v_ = abs_bound;
        return x;
    }

    static PadicScalar from_int(const PadicCtx* c, int64_t n) {
        PadicScalar x;
        x.ctx_ = c;
        if (n == 0) return zero(c);
        x.state_ = State::Finite;
        uint64_t a = static_cast<uint64_t>(n < 0 ? -n : n);
        x.v_ = 0;
        while (a % c->p == 0) { a /= c->p; ++x.v_; }
        c->from_u64(x.u_, a);
        if (n < 0) c->negate(x.u_, x.u_);
        x.rel_ = c->digits;
        return x;
    }

    // p^v * unit where `unit` is given mod p^digits and must be a p-unit
    static PadicScalar from_unit(const PadicCtx* c, const detail::Limbs& unit, int64_t v, int rel) {
        PadicScalar x;
        x.ctx_ = c;
        x.state_ = State::Finite;
        x.u_ = unit;
        x.v_ = v;
        x.rel_ = rel;
        x.normalize();
        return x;
    }

    const PadicCtx* ctx() const { return ctx_; }
    State state() const { return state_; }
    bool is_exact_zero() const { return state_ == State::ExactZero; }
    bool is_zero_at_prec() const { return state_ == State::ZeroAtPrec; }
    bool is_zero_like() const { return state_ != State::Finite; }

    Val val() const {
        if (state_ == State::Finite) return Val::of_int(v_);
        return Val::infinite();
    }

    // for zero-at-precision values: the absolute precision at which the value
    // became indistinguishable from zero
    int64_t zero_bound() const { return v_; }

    int rel_prec() const { return state_ == State::Finite ? rel_ : 0; }
    int64_t abs_prec() const {
        if (state_ == State::ExactZero) return INT64_MAX;
        if (state_ == State::ZeroAtPrec) return v_;
        return v_ + rel_;
    }

    uint64_t unit_low_u64() const { return ctx_->low_u64(u_); }
    const detail::Limbs& unit() const { return u_; }

    PadicScalar operator-() const {
        if (state_ != State::Finite) return *this;
        PadicScalar z = *this;
        ctx_->negate(z.u_, u_);
        return z;
    }

    PadicScalar operator+(const PadicScalar& o) const {
        check(o);
        if (state_ == State::ExactZero) return o;
        if (o.state_ == State::ExactZero) return *this;
        int64_t abs = std::min(abs_prec(), o.abs_prec());
        if (state_ != State::Finite && o.state_ != State::Finite)
            return zero_at(ctx_, abs);
        if (state_ != State::Finite) return o.clamped(abs);
        if (o.state_ != State::Finite) return clamped(abs);
        int64_t vmin = std::min(v_, o.v_);
        if (abs <= vmin) return zero_at(ctx_, abs);
        detail::Limbs xs{}, ys{}, s{};
        ctx_->shift_up(xs, u_, clamp_shift(v_ - vmin));
        ctx_->shift_up(ys, o.u_, clamp_shift(o.v_ - vmin));
        ctx_->add(s, xs, ys);
        return renorm(ctx_, s, vmin, abs);
    }

    PadicScalar operator-(const PadicScalar& o) const { return *this + (-o); }

    PadicScalar operator*(const PadicScalar& o) const {
        check(o);
        if (state_ == State::ExactZero || o.state_ == State::ExactZero) return zero(ctx_);
        if (state_ != State::Finite || o.state_ != State::Finite) {
            // v_ holds the valuation when finite and the zero bound otherwise;
            // either way the product is zero below the sum
            return zero_at(ctx_, v_ + o.v_);
        }
        PadicScalar z;
        z.ctx_ = ctx_;
        z.state_ = State::Finite;
        ctx_->mul(z.u_, u_, o.u_);
        z.v_ = v_ + o.v_;
        z.rel_ = std::min(rel_, o.rel_);
        z.normalize();
        return z;
    }

    PadicScalar inv() const {
        if (state_ != State::Finite)
            throw precision_indeterminate("inverse of a value that is zero at working precision");
        PadicScalar z;
        z.ctx_ = ctx_;
        z.state_ = State::Finite;
        ctx_->inv(z.u_, u_);
        z.v_ = -v_;
        z.rel_ = rel_;
        return z;
    }

    PadicScalar operator/(const PadicScalar& o) const { return *this * o.inv(); }

    // multiply by p^k (k may be negative); pure valuation shift, lossless
    PadicScalar shift_p(int64_t k) const {
        if (state_ == State::ExactZero) return *this;
        PadicScalar z = *this;
        z.v_ += k;
        return z;
    }

    // copy with absolute precision capped at `abs`
    PadicScalar clamped(int64_t abs) const {
        if (state_ == State::ExactZero) return zero_at(ctx_, abs);
        if (state_ == State::ZeroAtPrec) return zero_at(ctx_, std::min(v_, abs));
        if (abs <= v_) return zero_at(ctx_, abs);
        PadicScalar z = *this;
        z.rel_ = static_cast<int>(std::min<int64_t>(rel_, abs - v_));
        return z;
    }

    // equality at the shared working precision
    bool same_value(const PadicScalar& o) const {
        check(o);
        if (is_zero_like() || o.is_zero_like()) return is_zero_like() && o.is_zero_like();
        if (v_ != o.v_) return false;
        return (*this - o).is_zero_like();
    }

    // |x - y| <= p^-(bound)?
    bool close_to(const PadicScalar& o, int64_t bound) const {
        PadicScalar d = *this - o;
        if (d.is_zero_like()) return true;
        return d.v_ >= bound;
    }

    // value mod p^k as a machine integer (needs v >= 0)
    uint64_t residue_mod_pk(int k) const {
        if (is_zero_like()) return 0;
        if (v_ < 0) throw domain_error("residue of a non-integral value");
        detail::Limbs t;
        ctx_->shift_up(t, u_, clamp_shift(v_));
        return ctx_->low_mod_pk(t, k);
    }

    std::string str() const {
        if (state_ == State::ExactZero) return "0";
        if (state_ == State::ZeroAtPrec) return "O(p^" + std::to_string(v_) + ")";
        std::string s = "p^" + std::to_string(v_) + "*[" + ctx_->to_string(u_) + "...]";
        return s;
    }

private:
    const PadicCtx* ctx_;
    detail::Limbs u_{};
    int64_t v_ = 0;     // valuation (Finite) or absolute zero bound (ZeroAtPrec)
    int rel_ = 0;       // meaningful base-p digits of the unit
    State state_;

    void check(const PadicScalar& o) const {
        if (ctx_ != o.ctx_) throw domain_error("mixed p-adic contexts");
    }

    int clamp_shift(int64_t s) const {
        return static_cast<int>(std::min<int64_t>(s, ctx_->digits));
    }

    void normalize() {
        if (state_ != State::Finite) return;
        int s = ctx_->val_p(u_);
        if (s >= rel_) {
            // all meaningful digits vanished
            int64_t bound = v_ + rel_;
            state_ = State::ZeroAtPrec;
            v_ = bound;
            rel_ = 0;
            return;
        }
        if (s > 0) {
            ctx_->shift_down(u_, u_, s);
            v_ += s;
            rel_ -= s;
        }
        if (rel_ > ctx_->digits) rel_ = ctx_->digits;
    }

    static PadicScalar renorm(const PadicCtx* c, const detail::Limbs& raw, int64_t vbase, int64_t abs) {
        PadicScalar z;
        z.ctx_ = c;
        z.state_ = State::Finite;
        z.u_ = raw;
        z.v_ = vbase;
        z.rel_ = static_cast<int>(std::min<int64_t>(abs - vbase, c->digits));
        z.normalize();
        return z;
    }
};

inline PadicScalar operator*(int64_t n, const PadicScalar& x) {
    return PadicScalar::from_int(x.ctx(), n) * x;
}

// lambda*(lambda-1)*...*(lambda-k+1) / k!
inline PadicScalar padic_binomial(const PadicScalar& lambda, uint64_t k) {
    const PadicCtx* c = lambda.ctx();
    if (!lambda.is_exact_zero() && lambda.val() < Val::of_int(0))
        throw domain_error("padic_binomial requires an integral argument");
    PadicScalar num = PadicScalar::from_int(c, 1);
    PadicScalar fact = PadicScalar::from_int(c, 1);
    for (uint64_t j = 0; j < k; ++j) {
        num = num * (lambda - PadicScalar::from_int(c, static_cast<int64_t>(j)));
        fact = fact * PadicScalar::from_int(c, static_cast<int64_t>(j) + 1);
    }
    return num / fact;
}

inline int64_t val_p_u64(uint64_t n, uint32_t p) {
    int64_t v = 0;
    while (n && n % p == 0) { n /= p; ++v; }
    return v;
}

inline int64_t val_p_factorial(uint64_t n, uint32_t p) {
    // Legendre: sum_{i>=1} floor(n/p^i)
    int64_t v = 0;
    uint64_t q = n / p;
    while (q) { v += static_cast<int64_t>(q); q /= p; }
    return v;
}

}  // namespace padiq
