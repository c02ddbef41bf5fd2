#pragma once

#include <array>
#include <functional>
#include <map>

#include "padiq/lie.hpp"
#include "padiq/weight.hpp"

namespace padiq {

using MultiIndex = std::array<uint16_t, 4>;

inline int mi_weight(const MultiIndex& a) { return a[0] + a[1] + a[2] + a[3]; }

// Truncated expansion sum_alpha lambda_alpha b^alpha in the group-ring
// generators b_i = g_i - 1, with the fixed generator order
// (g_1, g_2, g_3, g_4) = (exp of p*I, p*h, p*w, p*v).
struct BExpansion {
    int M = 0;  // bound on |alpha|
    std::map<MultiIndex, ExtScalar> coeffs;
    const PadicCtx* ctx = nullptr;

    void add(const MultiIndex& a, const ExtScalar& c) {
        if (c.is_exact_zero()) return;
        if (mi_weight(a) > M) return;
        auto [it, inserted] = coeffs.emplace(a, c);
        if (!inserted) {
            it->second = it->second + c;
            if (it->second.is_zero_like()) coeffs.erase(it);
        }
    }

    ExtScalar coeff(const MultiIndex& a) const {
        auto it = coeffs.find(a);
        return it == coeffs.end() ? ExtScalar::zero(ctx) : it->second;
    }
};

// g_i^{e_i} = (1 + b_i)^{e_i} expands with Mahler binomials; the ordered
// product makes the coefficient of b^alpha the product of the per-axis
// binomials, exactly.
inline BExpansion b_expand(const std::array<PadicScalar, 4>& exponents, int M) {
    const PadicCtx* ctx = exponents[0].ctx();
    for (const auto& e : exponents)
        if (!e.is_zero_like() && e.val() < Val::of_int(0))
            throw domain_error("b_expand requires Z_p exponents");
    BExpansion out;
    out.M = M;
    out.ctx = ctx;
    // per-axis binomial tables C(e_i, k), k <= M
    std::array<std::vector<PadicScalar>, 4> binom;
    for (int i = 0; i < 4; ++i) {
        binom[static_cast<size_t>(i)].reserve(static_cast<size_t>(M) + 1);
        PadicScalar cur = PadicScalar::from_int(ctx, 1);
        binom[static_cast<size_t>(i)].push_back(cur);
        for (int k = 1; k <= M; ++k) {
            // C(e, k) = C(e, k-1) * (e - k + 1) / k
            cur = cur * (exponents[static_cast<size_t>(i)] - PadicScalar::from_int(ctx, k - 1)) /
                  PadicScalar::from_int(ctx, k);
            binom[static_cast<size_t>(i)].push_back(cur);
        }
    }
    MultiIndex a{0, 0, 0, 0};
    // iterate all |alpha| <= M, skipping axes with exactly-zero binomials
    std::function<void(int, int, ExtScalar)> rec = [&](int axis, int left, ExtScalar acc) {
        if (axis == 4) {
            out.add(a, acc);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            const PadicScalar& bk = binom[static_cast<size_t>(axis)][static_cast<size_t>(k)];
            if (bk.is_exact_zero()) break;  // later binomials of an integer exponent stay zero
            if (bk.is_zero_like()) continue;
            a[static_cast<size_t>(axis)] = static_cast<uint16_t>(k);
            rec(axis + 1, left - k, acc * ExtScalar::of(bk));
            a[static_cast<size_t>(axis)] = 0;
        }
    };
    rec(0, M, ExtScalar::one(ctx));
    return out;
}

// b-expansion of a group element of U^2_D: peel in the (I, h, w, v) order
// and divide the coordinates by p to recover the generator powers.
inline BExpansion b_expand_group(const Quat& g, int M) {
    auto c = peel_ordered(g, kOrderIHWV);
    std::array<PadicScalar, 4> exps;
    for (int i = 0; i < 4; ++i) exps[static_cast<size_t>(i)] = c[static_cast<size_t>(i)].shift_p(-1);
    return b_expand(exps, M);
}

// Norm value |.|_r as an exact point of the value group p^Q union {0}:
// |x| = p^{-num/den}.
struct NormValue {
    bool zero = false;
    bool exact = true;  // whether the sup is certainly attained in truncation
    int64_t num = 0;
    int64_t den = 1;

    bool is_one() const { return !zero && num == 0; }
    std::string str() const {
        if (zero) return "0";
        if (num == 0) return "1";
        return "p^(" + std::to_string(-num) + "/" + std::to_string(den) + ")";
    }
    // compare |x| <= |y|
    static bool leq(const NormValue& x, const NormValue& y) {
        if (x.zero) return true;
        if (y.zero) return false;
        return static_cast<__int128>(x.num) * y.den >= static_cast<__int128>(y.num) * x.den;
    }
};

// sup_alpha |lambda_alpha| r^{|alpha|} for r = p^{-1/p^n}.  The flag is
// exact when the sup certainly dominates the untruncated tail, using the
// integrality bound |lambda_alpha| <= 1.
inline NormValue norm_r(const BExpansion& e, int n) {
    const PadicCtx* ctx = e.ctx;
    int64_t pn = 1;
    for (int i = 0; i < n; ++i) pn *= ctx->p;
    int64_t den = 2 * pn;
    NormValue best;
    best.zero = true;
    best.den = den;
    bool integral = true;
    for (const auto& [a, c] : e.coeffs) {
        if (c.is_zero_like()) continue;
        Val v = c.val();
        if (v < Val::of_int(0)) integral = false;
        // exponent of |c| r^{|a|} as num/den with den = 2 p^n
        int64_t num = v.half * pn + 2 * static_cast<int64_t>(mi_weight(a));
        if (best.zero || num < best.num) {
            best.zero = false;
            best.num = num;
        }
    }
    if (best.zero) {
        best.exact = true;  // the zero expansion has norm 0 exactly
        return best;
    }
    // tail terms have |lambda| <= 1 and |alpha| >= M+1, hence value at most
    // r^{M+1}; exact when that is strictly below the attained sup
    int64_t tail_num = 2 * static_cast<int64_t>(e.M + 1);
    best.exact = integral && (tail_num > best.num);
    return best;
}

// truncated product of two expansions (group-ring multiplication is used in
// tests only through the commutative single-generator case and the
// group-multiplication route)
inline BExpansion b_mul_truncated(const BExpansion& x, const BExpansion& y) {
    BExpansion out;
    out.M = std::min(x.M, y.M);
    out.ctx = x.ctx;
    for (const auto& [a, ca] : x.coeffs)
        for (const auto& [b, cb] : y.coeffs) {
            MultiIndex s{static_cast<uint16_t>(a[0] + b[0]), static_cast<uint16_t>(a[1] + b[1]),
                         static_cast<uint16_t>(a[2] + b[2]), static_cast<uint16_t>(a[3] + b[3])};
            if (mi_weight(s) > out.M) continue;
            out.add(s, ca * cb);
        }
    return out;
}

}  // namespace padiq
