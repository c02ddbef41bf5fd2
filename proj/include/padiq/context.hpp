#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace padiq {

// Raised when an operation needs to distinguish a value from zero but the
// value vanishes at its working precision.
struct precision_indeterminate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr int kMaxLimbs = 48;

using Limbs = std::array<uint32_t, kMaxLimbs>;

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
    uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull}) {
        if (n % q == 0) return n == q;
    }
    // deterministic Miller-Rabin for 64-bit
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

}  // namespace detail

// Shared arithmetic context for one (prime, precision) pair.  Unit parts of
// scalars are stored as little-endian digit arrays in base B = p^e with
// e chosen so that B < 2^31; the working modulus is B^limbs = p^digits.
class PadicCtx {
public:
    uint32_t p;
    int e;            // digits per limb
    uint32_t B;       // p^e
    int limbs;        // limb count of the working window
    int digits;       // e * limbs, >= requested precision
    int requested;    // precision as requested by the caller
    std::array<uint32_t, 32> ppow;  // p^0 .. p^e

    PadicCtx(uint32_t p_, int precision) : p(p_), requested(precision) {
        if (!detail::is_prime_u64(p_)) throw domain_error("p must be prime");
        if (p_ < 5) throw domain_error("p must be at least 5");
        if (precision < 4) throw domain_error("precision too small");
        e = 0;
        uint64_t b = 1;
        while (b * p < (1ull << 31)) { b *= p; ++e; }
        B = static_cast<uint32_t>(b);
        limbs = (precision + e - 1) / e;
        if (limbs > detail::kMaxLimbs) throw domain_error("precision exceeds supported window");
        digits = limbs * e;
        uint64_t q = 1;
        for (int i = 0; i <= e; ++i) { ppow[static_cast<size_t>(i)] = static_cast<uint32_t>(q); q *= p; }
    }

    int L() const { return limbs; }

    // --- limb-vector helpers; all arrays have `limbs` significant entries ---

    void zero(detail::Limbs& x) const { x.fill(0); }

    bool is_zero(const detail::Limbs& x) const {
        for (int i = 0; i < limbs; ++i)
            if (x[static_cast<size_t>(i)]) return false;
        return true;
    }

    void from_u64(detail::Limbs& x, uint64_t v) const {
        zero(x);
        int i = 0;
        while (v && i < limbs) {
            x[static_cast<size_t>(i++)] = static_cast<uint32_t>(v % B);
            v /= B;
        }
    }

    uint64_t low_u64(const detail::Limbs& x) const {
        uint64_t hi = limbs > 1 ? x[1] : 0;
        return hi * B + x[0];
    }

    void add(detail::Limbs& z, const detail::Limbs& x, const detail::Limbs& y) const {
        uint32_t carry = 0;
        for (int i = 0; i < limbs; ++i) {
            uint64_t t = static_cast<uint64_t>(x[static_cast<size_t>(i)]) + y[static_cast<size_t>(i)] + carry;
            if (t >= B) { t -= B; carry = 1; } else carry = 0;
            z[static_cast<size_t>(i)] = static_cast<uint32_t>(t);
        }
        // final carry wraps mod B^limbs
    }

    void sub(detail::Limbs& z, const detail::Limbs& x, const detail::Limbs& y) const {
        int64_t borrow = 0;
        for (int i = 0; i < limbs; ++i) {
            int64_t t = static_cast<int64_t>(x[static_cast<size_t>(i)]) - y[static_cast<size_t>(i)] - borrow;
            if (t < 0) { t += B; borrow = 1; } else borrow = 0;
            z[static_cast<size_t>(i)] = static_cast<uint32_t>(t);
        }
    }

    void negate(detail::Limbs& z, const detail::Limbs& x) const {
        detail::Limbs zero_{};
        sub(z, zero_, x);
    }

    // z = x*y mod B^limbs, column (comba) multiplication truncated at `limbs`.
    void mul(detail::Limbs& z, const detail::Limbs& x, const detail::Limbs& y) const {
        unsigned __int128 acc = 0;
        detail::Limbs out{};
        const uint64_t b = B;
        for (int j = 0; j < limbs; ++j) {
            for (int i = 0; i <= j; ++i)
                acc += static_cast<uint64_t>(x[static_cast<size_t>(i)]) * y[static_cast<size_t>(j - i)];
            // split acc = a1*2^32 + a0 and divide by B with two 64-bit divisions
            uint64_t a1 = static_cast<uint64_t>(acc >> 32);
            uint64_t a0 = static_cast<uint64_t>(acc) & 0xffffffffull;
            uint64_t q1 = a1 / b, r1 = a1 % b;
            uint64_t low = (r1 << 32) | a0;
            uint64_t q0 = low / b, r0 = low % b;
            out[static_cast<size_t>(j)] = static_cast<uint32_t>(r0);
            acc = (static_cast<unsigned __int128>(q1) << 32) + q0;
        }
        z = out;
    }

    // z = x * s for small s < B
    void mul_small(detail::Limbs& z, const detail::Limbs& x, uint32_t s) const {
        uint64_t carry = 0;
        for (int i = 0; i < limbs; ++i) {
            uint64_t t = static_cast<uint64_t>(x[static_cast<size_t>(i)]) * s + carry;
            z[static_cast<size_t>(i)] = static_cast<uint32_t>(t % B);
            carry = t / B;
        }
    }

    // number of trailing base-p digits equal to zero (capped at `digits`)
    int val_p(const detail::Limbs& x) const {
        int lz = 0;
        while (lz < limbs && x[static_cast<size_t>(lz)] == 0) ++lz;
        if (lz == limbs) return digits;
        int v = lz * e;
        uint32_t d = x[static_cast<size_t>(lz)];
        while (d % p == 0) { d /= p; ++v; }
        return v;
    }

    // z = x * p^k (digit shift), 0 <= k
    void shift_up(detail::Limbs& z, const detail::Limbs& x, int k) const {
        if (k >= digits) { zero(z); return; }
        int ql = k / e, r = k % e;
        detail::Limbs t{};
        for (int i = limbs - 1; i >= ql; --i) t[static_cast<size_t>(i)] = x[static_cast<size_t>(i - ql)];
        if (r) {
            mul_small(t, t, ppow[static_cast<size_t>(r)]);
        }
        z = t;
    }

    // z = x / p^k; requires p^k | x. Digits above limbs*e - k become garbage-free zeros.
    void shift_down(detail::Limbs& z, const detail::Limbs& x, int k) const {
        int ql = k / e, r = k % e;
        detail::Limbs t{};
        for (int i = 0; i + ql < limbs; ++i) t[static_cast<size_t>(i)] = x[static_cast<size_t>(i + ql)];
        if (r) {
            const uint32_t pr = ppow[static_cast<size_t>(r)];
            uint64_t rem = 0;
            for (int i = limbs - 1; i >= 0; --i) {
                uint64_t cur = rem * B + t[static_cast<size_t>(i)];
                t[static_cast<size_t>(i)] = static_cast<uint32_t>(cur / pr);
                rem = cur % pr;
            }
        }
        z = t;
    }

    // multiplicative inverse mod B^limbs; x must be a unit (p does not divide x)
    void inv(detail::Limbs& z, const detail::Limbs& x) const {
        uint64_t x0 = x[0] % p;
        if (x0 == 0) throw precision_indeterminate("inverse of non-unit");
        uint64_t i0 = detail::powmod_u64(x0, p - 2, p);
        detail::Limbs t, two, tmp, cur;
        from_u64(cur, i0);
        from_u64(two, 2);
        // Newton lifting: cur <- cur*(2 - x*cur), doubles correct p-digits per step
        int correct = 1;
        while (correct < digits) {
            mul(t, x, cur);
            sub(tmp, two, t);
            mul(cur, cur, tmp);
            correct *= 2;
        }
        z = cur;
    }

    bool eq(const detail::Limbs& x, const detail::Limbs& y) const {
        for (int i = 0; i < limbs; ++i)
            if (x[static_cast<size_t>(i)] != y[static_cast<size_t>(i)]) return false;
        return true;
    }

    // keep only the low `ndig` base-p digits
    void truncate_digits(detail::Limbs& x, int ndig) const {
        if (ndig >= digits) return;
        if (ndig < 0) ndig = 0;
        int ql = ndig / e, r = ndig % e;
        for (int i = ql + (r ? 1 : 0); i < limbs; ++i) x[static_cast<size_t>(i)] = 0;
        if (r) x[static_cast<size_t>(ql)] %= ppow[static_cast<size_t>(r)];
    }

    // low base-p digits as u64 (for residue classification), k*log2(p) <= 63
    uint64_t low_mod_pk(const detail::Limbs& x, int k) const {
        uint64_t m = 1;
        for (int i = 0; i < k; ++i) m *= p;
        // value mod p^k from the low limbs
        uint64_t acc = 0, scale = 1;
        for (int i = 0; i < limbs && scale < m; ++i) {
            acc = (acc + (x[static_cast<size_t>(i)] % m) * scale) % m;
            scale = scale * (B % m) % m;
            if (scale == 0) break;
        }
        return acc % m;
    }

    std::string to_string(const detail::Limbs& x, int max_digits = 12) const {
        // low base-p digits, most significant last, e.g. "…2103 (base 5)"
        std::string s;
        detail::Limbs t = x;
        for (int i = 0; i < max_digits; ++i) {
            if (is_zero(t)) break;
            uint32_t d = t[0] % p;
            s += std::to_string(d);
            detail::Limbs u = t;
            u[0] -= d;
            shift_down(t, u, 1);
        }
        if (s.empty()) s = "0";
        return s;
    }
};

// Contexts are interned and never freed; scalars hold plain pointers.
inline const PadicCtx* get_context(uint32_t p, int precision) {
    static std::mutex mu;
    static std::map<std::pair<uint32_t, int>, std::unique_ptr<PadicCtx>> registry;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(p, precision);
    auto it = registry.find(key);
    if (it == registry.end())
        it = registry.emplace(key, std::make_unique<PadicCtx>(p, precision)).first;
    return it->second.get();
}

}  // namespace padiq
