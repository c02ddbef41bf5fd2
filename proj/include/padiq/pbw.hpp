#pragma once

#include <map>
#include <vector>

#include "padiq/lie.hpp"

namespace padiq {

struct degree_cap_exceeded : std::length_error {
    using std::length_error::length_error;
};

// Ordered monomial w^kw v^kv h^kh I^kI; the written order is w < v < h < I.
struct PBWMono {
    uint16_t kw = 0, kv = 0, kh = 0, kI = 0;

    int degree() const { return kw + kv + kh + kI; }

    uint64_t key() const {
        return (static_cast<uint64_t>(kw) << 48) | (static_cast<uint64_t>(kv) << 32) |
               (static_cast<uint64_t>(kh) << 16) | kI;
    }
    static PBWMono from_key(uint64_t k) {
        return PBWMono{static_cast<uint16_t>(k >> 48), static_cast<uint16_t>(k >> 32),
                       static_cast<uint16_t>(k >> 16), static_cast<uint16_t>(k)};
    }

    std::string str() const {
        std::string s;
        auto app = [&](const char* n, uint16_t e) {
            if (!e) return;
            s += n;
            if (e > 1) s += "^" + std::to_string(e);
            s += " ";
        };
        app("w", kw);
        app("v", kv);
        app("h", kh);
        app("I", kI);
        if (s.empty()) s = "1";
        return s;
    }
};

// Element of U(g_D) in PBW normal form: finite map monomial -> coefficient.
class PBWPoly {
public:
    std::map<uint64_t, ExtScalar> terms;
    const AlgebraParams* alg = nullptr;
    int degree_cap = 64;

    static PBWPoly zero(const AlgebraParams* a, int cap = 64) {
        PBWPoly p;
        p.alg = a;
        p.degree_cap = cap;
        return p;
    }
    static PBWPoly one(const AlgebraParams* a, int cap = 64) {
        PBWPoly p = zero(a, cap);
        p.add_term(PBWMono{}, ExtScalar::one(a->ctx));
        return p;
    }
    static PBWPoly generator(const AlgebraParams* a, Gen g, int cap = 64) {
        PBWPoly p = zero(a, cap);
        PBWMono m;
        switch (g) {
            case Gen::W: m.kw = 1; break;
            case Gen::V: m.kv = 1; break;
            case Gen::H: m.kh = 1; break;
            case Gen::I: m.kI = 1; break;
        }
        p.add_term(m, ExtScalar::one(a->ctx));
        return p;
    }

    void add_term(const PBWMono& m, const ExtScalar& c) {
        if (c.is_exact_zero()) return;
        if (m.degree() > degree_cap)
            throw degree_cap_exceeded("PBW degree cap exceeded: " + m.str());
        auto [it, inserted] = terms.emplace(m.key(), c);
        if (!inserted) {
            it->second = it->second + c;
            if (it->second.is_zero_like()) terms.erase(it);
        }
    }

    int degree() const {
        int d = 0;
        for (const auto& [k, c] : terms) d = std::max(d, PBWMono::from_key(k).degree());
        return d;
    }

    bool is_zero_like() const {
        for (const auto& [k, c] : terms)
            if (!c.is_zero_like()) return false;
        return true;
    }

    PBWPoly operator+(const PBWPoly& o) const {
        PBWPoly r = *this;
        for (const auto& [k, c] : o.terms) r.add_term(PBWMono::from_key(k), c);
        return r;
    }
    PBWPoly operator-(const PBWPoly& o) const {
        PBWPoly r = *this;
        for (const auto& [k, c] : o.terms) r.add_term(PBWMono::from_key(k), -c);
        return r;
    }
    PBWPoly scaled(const ExtScalar& s) const {
        PBWPoly r = zero(alg, degree_cap);
        for (const auto& [k, c] : terms) r.add_term(PBWMono::from_key(k), s * c);
        return r;
    }

    // drop terms whose coefficient valuation is at least `min_half` halves
    PBWPoly pruned(int64_t min_half) const {
        PBWPoly r = zero(alg, degree_cap);
        for (const auto& [k, c] : terms) {
            if (c.is_zero_like()) continue;
            if (c.val().half >= min_half) continue;
            r.terms.emplace(k, c);
        }
        return r;
    }

    ExtScalar coeff(const PBWMono& m) const {
        auto it = terms.find(m.key());
        return it == terms.end() ? ExtScalar::zero(alg->ctx) : it->second;
    }

    bool close_to(const PBWPoly& o, int64_t bound_half) const {
        PBWPoly d = *this - o;
        for (const auto& [k, c] : d.terms) {
            Val v = c.val();
            if (!v.inf && v.half < bound_half) return false;
        }
        return true;
    }

    std::string str() const {
        std::string s;
        for (const auto& [k, c] : terms) {
            if (c.is_zero_like()) continue;
            if (!s.empty()) s += " + ";
            s += "(" + c.str() + ")*" + PBWMono::from_key(k).str();
        }
        return s.empty() ? "0" : s;
    }
};

enum class RewriteStrategy { LeftmostFirst, RightmostFirst };

// [a, b] for basis letters as a degree-<=1 polynomial
inline PBWPoly basis_bracket(const AlgebraParams* alg, Gen a, Gen b, int cap) {
    PBWPoly r = PBWPoly::zero(alg, cap);
    auto put = (
        [&](Gen g, int64_t c, bool times_iota) {
            ExtScalar s = ExtScalar::from_int(alg->ctx, c);
            if (times_iota) s = s * alg->iota_ext();
            r = r + PBWPoly::generator(alg, g, cap).scaled(s);
        });
    if (a == b || a == Gen::I || b == Gen::I) return r;   // alternating; I central
    auto pair = std::make_pair(a, b);
    if (pair == std::make_pair(Gen::H, Gen::W)) { put(Gen::V, 2, false); return r; }
    if (pair == std::make_pair(Gen::W, Gen::H)) { put(Gen::V, -2, false); return r; }
    if (pair == std::make_pair(Gen::H, Gen::V)) { put(Gen::W, 2 * static_cast<int64_t>(alg->p), false); return r; }
    if (pair == std::make_pair(Gen::V, Gen::H)) { put(Gen::W, -2 * static_cast<int64_t>(alg->p), false); return r; }
    if (pair == std::make_pair(Gen::W, Gen::V)) { put(Gen::H, -2, true); return r; }
    if (pair == std::make_pair(Gen::V, Gen::W)) { put(Gen::H, 2, true); return r; }
    throw domain_error("bad bracket pair");
}

// Rewrites an arbitrary word in {w, v, h, I} to PBW normal form using
// x y = y x + [x, y]; each swap strictly decreases the inversion count at
// fixed length and bracket terms are strictly shorter, so this terminates.
inline PBWPoly normal_form_word(const AlgebraParams* alg, const std::vector<Gen>& word,
                                const ExtScalar& coeff, int cap = 64,
                                RewriteStrategy strategy = RewriteStrategy::LeftmostFirst) {
    if (static_cast<int>(word.size()) > cap)
        throw degree_cap_exceeded("word longer than the degree cap");
    PBWPoly out = PBWPoly::zero(alg, cap);
    // Agenda keyed by (length, inversions, word), popped in decreasing order.
    // A swap lowers the inversion count by one and a bracket term shortens
    // the word, so every edge strictly decreases the key and each distinct
    // word is processed exactly once with merged coefficients.
    auto inversions = [](const std::vector<Gen>& w) {
        int inv = 0;
        for (size_t i = 0; i + 1 < w.size(); ++i)
            for (size_t j = i + 1; j < w.size(); ++j)
                if (static_cast<int>(w[i]) > static_cast<int>(w[j])) ++inv;
        return inv;
    };
    using Key = std::tuple<int, int, std::vector<Gen>>;
    std::map<Key, ExtScalar, std::greater<Key>> work;
    auto push = [&](std::vector<Gen>&& w, const ExtScalar& c) {
        Key key{static_cast<int>(w.size()), inversions(w), std::move(w)};
        auto [it, inserted] = work.emplace(std::move(key), c);
        if (!inserted) it->second = it->second + c;
    };
    {
        std::vector<Gen> w0 = word;
        push(std::move(w0), coeff);
    }
    while (!work.empty()) {
        auto node = work.extract(work.begin());
        std::vector<Gen> wrd = std::move(std::get<2>(node.key()));
        ExtScalar c = std::move(node.mapped());
        if (c.is_exact_zero()) continue;
        // locate an adjacent inversion
        int pos = -1;
        int n = static_cast<int>(wrd.size());
        if (strategy == RewriteStrategy::LeftmostFirst) {
            for (int i = 0; i + 1 < n; ++i)
                if (static_cast<int>(wrd[static_cast<size_t>(i)]) > static_cast<int>(wrd[static_cast<size_t>(i + 1)])) { pos = i; break; }
        } else {
            for (int i = n - 2; i >= 0; --i)
                if (static_cast<int>(wrd[static_cast<size_t>(i)]) > static_cast<int>(wrd[static_cast<size_t>(i + 1)])) { pos = i; break; }
        }
        if (pos < 0) {
            PBWMono m;
            for (Gen g : wrd) {
                switch (g) {
                    case Gen::W: ++m.kw; break;
                    case Gen::V: ++m.kv; break;
                    case Gen::H: ++m.kh; break;
                    case Gen::I: ++m.kI; break;
                }
            }
            out.add_term(m, c);
            continue;
        }
        Gen a = wrd[static_cast<size_t>(pos)], b = wrd[static_cast<size_t>(pos + 1)];
        // bracket terms, one shorter
        PBWPoly br = basis_bracket(alg, a, b, cap);
        for (const auto& [k, bc] : br.terms) {
            PBWMono bm = PBWMono::from_key(k);
            std::vector<Gen> shorter;
            shorter.reserve(wrd.size() - 1);
            for (int i = 0; i < pos; ++i) shorter.push_back(wrd[static_cast<size_t>(i)]);
            // the bracket is degree one; splice its letter in place
            for (int t = 0; t < bm.kw; ++t) shorter.push_back(Gen::W);
            for (int t = 0; t < bm.kv; ++t) shorter.push_back(Gen::V);
            for (int t = 0; t < bm.kh; ++t) shorter.push_back(Gen::H);
            for (int t = 0; t < bm.kI; ++t) shorter.push_back(Gen::I);
            for (int i = pos + 2; i < n; ++i) shorter.push_back(wrd[static_cast<size_t>(i)]);
            push(std::move(shorter), c * bc);
        }
        // swapped word
        std::swap(wrd[static_cast<size_t>(pos)], wrd[static_cast<size_t>(pos + 1)]);
        push(std::move(wrd), c);
    }
    return out;
}

inline std::vector<Gen> mono_word(const PBWMono& m) {
    std::vector<Gen> w;
    w.reserve(static_cast<size_t>(m.degree()));
    for (int t = 0; t < m.kw; ++t) w.push_back(Gen::W);
    for (int t = 0; t < m.kv; ++t) w.push_back(Gen::V);
    for (int t = 0; t < m.kh; ++t) w.push_back(Gen::H);
    for (int t = 0; t < m.kI; ++t) w.push_back(Gen::I);
    return w;
}

inline PBWPoly pbw_mul(const PBWPoly& P, const PBWPoly& Q,
                       RewriteStrategy strategy = RewriteStrategy::LeftmostFirst) {
    const AlgebraParams* alg = P.alg;
    int cap = std::max(P.degree_cap, Q.degree_cap);
    PBWPoly out = PBWPoly::zero(alg, cap);
    for (const auto& [kp, cp] : P.terms) {
        for (const auto& [kq, cq] : Q.terms) {
            std::vector<Gen> word = mono_word(PBWMono::from_key(kp));
            std::vector<Gen> wq = mono_word(PBWMono::from_key(kq));
            word.insert(word.end(), wq.begin(), wq.end());
            out = out + normal_form_word(alg, word, cp * cq, cap, strategy);
        }
    }
    return out;
}

inline PBWPoly pbw_commutator(const PBWPoly& P, const PBWPoly& Q) {
    return pbw_mul(P, Q) - pbw_mul(Q, P);
}

// The Casimir element iota h^2 + p w^2 - v^2 (already in normal form).
inline PBWPoly casimir(const AlgebraParams* a, int cap = 64) {
    PBWPoly r = PBWPoly::zero(a, cap);
    r.add_term(PBWMono{0, 0, 2, 0}, a->iota_ext());
    r.add_term(PBWMono{2, 0, 0, 0}, ExtScalar::from_int(a->ctx, static_cast<int64_t>(a->p)));
    r.add_term(PBWMono{0, 2, 0, 0}, ExtScalar::from_int(a->ctx, -1));
    return r;
}

}  // namespace padiq
