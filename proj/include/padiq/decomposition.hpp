#pragma once

#include <map>

#include "padiq/weight.hpp"

namespace padiq {

// Coset of T G^{p^n} in G = U^2_D, classified by the residues of the
// second-kind coordinates c_w, c_v modulo p^{n+1}.
struct CosetRep {
    int n = 0;
    uint64_t rw = 0, rv = 0;  // residues mod p^{n+1}, divisible by p

    bool operator<(const CosetRep& o) const {
        if (n != o.n) return n < o.n;
        if (rw != o.rw) return rw < o.rw;
        return rv < o.rv;
    }
    bool operator==(const CosetRep& o) const { return n == o.n && rw == o.rw && rv == o.rv; }

    std::string str() const {
        return "(" + std::to_string(rw) + "," + std::to_string(rv) + ") mod p^" + std::to_string(n + 1);
    }
};

// Finite-support stand-in for a distribution: coefficients attached to group
// elements of U^2_D.
struct FiniteDistribution {
    std::vector<std::pair<ExtScalar, Quat>> atoms;

    void add(const ExtScalar& c, const Quat& g) {
        if (!in_principal(g, 2)) throw not_in_u2("distribution atom not in U^2_D");
        atoms.emplace_back(c, g);
    }
};

// g in T G^{p^n}  iff  both second-kind coordinates c_w, c_v lie in
// p^{n+1} Z_p.
inline bool in_torus_times_Gpn(const Quat& g, int n) {
    SecondKindCoords c = to_second_kind(g);
    return c.n_w() > Val::of_int(n) && c.n_v() > Val::of_int(n);
}

inline uint64_t pow_u64(uint64_t b, int e) {
    uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

inline CosetRep coset_of(const Quat& g, int n) {
    SecondKindCoords c = to_second_kind(g);
    CosetRep r;
    r.n = n;
    r.rw = c.cw.is_zero_like() ? 0 : c.cw.residue_mod_pk(n + 1);
    r.rv = c.cv.is_zero_like() ? 0 : c.cv.residue_mod_pk(n + 1);
    return r;
}

// All p^{2n} classes at level n, ordered lexicographically by residues.
inline std::vector<CosetRep> enumerate_cosets(const AlgebraParams* a, int n) {
    std::vector<CosetRep> out;
    uint64_t p = a->p;
    uint64_t count = pow_u64(p, n);
    out.reserve(count * count);
    for (uint64_t i = 0; i < count; ++i)
        for (uint64_t j = 0; j < count; ++j)
            out.push_back(CosetRep{n, p * i, p * j});
    return out;
}

// the lexicographically smallest representative: exp(rw w) exp(rv v)
inline Quat rep_element(const AlgebraParams* a, const CosetRep& r) {
    PadicScalar cw = PadicScalar::from_int(a->ctx, static_cast<int64_t>(r.rw));
    PadicScalar cv = PadicScalar::from_int(a->ctx, static_cast<int64_t>(r.rv));
    return exp_axis_w(a, cw) * exp_axis_v(a, cv);
}

using Projection = std::map<CosetRep, WElement>;

// Splits r^{-1} g' as k t with k = exp(c_w w) exp(c_v v) in G^{p^n} and
// t = exp(c_h h) exp(c_I I) in T, and returns the pair (torus scalar, image
// of k).  The product lambda(t) * image(k) does not depend on the choice of
// decomposition.
inline WElement atom_component(const Quat& rep, const Quat& g, int n, const ModuleEngine& eng) {
    const AlgebraParams* a = g.alg;
    Quat q = rep.inv() * g;
    SecondKindCoords c = to_second_kind(q);
    if (!(c.n_w() > Val::of_int(n) && c.n_v() > Val::of_int(n)))
        throw domain_error("coset classifier routed an element outside T G^{p^n}");
    ExtScalar torus = ext_exp(ExtScalar::of(c.ch) * eng.mu + ExtScalar::of(c.cI) * eng.lambda_I);
    SecondKindCoords kpart{c.cw, c.cv, PadicScalar::zero(a->ctx), PadicScalar::zero(a->ctx), a};
    return group_image(kpart, eng).scaled(torus);
}

// Level-n projection of a finite distribution: route every atom to its coset
// and accumulate lambda(torus part) * image(G^{p^n} part) relative to the
// chosen representative.
inline Projection project(const FiniteDistribution& d, int n, const ModuleEngine& eng) {
    Projection out;
    for (const auto& [coeff, g] : d.atoms) {
        CosetRep cr = coset_of(g, n);
        Quat rep = rep_element(g.alg, cr);
        WElement comp = atom_component(rep, g, n, eng).scaled(coeff);
        auto it = out.find(cr);
        if (it == out.end())
            out.emplace(cr, comp);
        else
            it->second = it->second + comp;
    }
    return out;
}

// operator action of exp(c_w w) exp(c_v v) on a truncated element
inline WElement apply_wv_pair(const PadicScalar& cw, const PadicScalar& cv, const WElement& x,
                              const ModuleEngine& eng) {
    return eng.apply_exp_w(cw, eng.apply_exp_v(cv, x));
}

// Pairs every component back through its representative and sums; inverse of
// `project` against the direct image of the distribution.
//
// Operator application on truncated elements is accurate only up to the
// valuation of the top-degree coefficients, so round trips meant to hold to
// B digits should run on an engine whose truncation exceeds the nominal
// degree by roughly B * (p-1)/((2 n_v + 1)(p-1) - 2) indices; doubling the
// truncation is ample for the levels used here.
inline WElement recombine(const Projection& proj, const ModuleEngine& eng) {
    WElement out = WElement::zero(eng.ctx, eng.M);
    for (const auto& [cr, comp] : proj) {
        PadicScalar cw = PadicScalar::from_int(eng.ctx, static_cast<int64_t>(cr.rw));
        PadicScalar cv = PadicScalar::from_int(eng.ctx, static_cast<int64_t>(cr.rv));
        out = out + apply_wv_pair(cw, cv, comp, eng);
    }
    return out;
}

// direct image of the distribution, for round-trip comparisons
inline WElement distribution_image(const FiniteDistribution& d, const ModuleEngine& eng) {
    WElement out = WElement::zero(eng.ctx, eng.M);
    for (const auto& [coeff, g] : d.atoms) {
        SecondKindCoords c = to_second_kind(g);
        out = out + group_image(c, eng).scaled(coeff);
    }
    return out;
}

// operator action of a full group element given by second-kind coordinates;
// the central factor is a scalar but exp(c_h h) is a genuine operator away
// from the cyclic vector
inline WElement apply_group_element(const SecondKindCoords& s, const WElement& x,
                                    const ModuleEngine& eng) {
    ExtScalar central = ext_exp(ExtScalar::of(s.cI) * eng.lambda_I);
    WElement r = x.scaled(central);
    r = eng.apply_exp_h(s.ch, r);
    r = eng.apply_exp_v(s.cv, r);
    return eng.apply_exp_w(s.cw, r);
}

// Coarsen a level-n projection to level n' < n: transport each component
// along the operator action of r_{c1}^{-1} r_{c2} and accumulate on the
// coarser coset.
inline Projection coarsen(const Projection& fine, int n_coarse, const ModuleEngine& eng) {
    Projection out;
    for (const auto& [cr, comp] : fine) {
        const AlgebraParams* a = eng.alg;
        uint64_t mod = pow_u64(a->p, n_coarse + 1);
        CosetRep c1{n_coarse, cr.rw % mod, cr.rv % mod};
        Quat r1 = rep_element(a, c1);
        Quat r2 = rep_element(a, cr);
        Quat q = r1.inv() * r2;
        SecondKindCoords s = to_second_kind(q);
        if (!(s.n_w() > Val::of_int(n_coarse) && s.n_v() > Val::of_int(n_coarse)))
            throw domain_error("coset coarsening left the coarse class");
        WElement moved = apply_group_element(s, comp, eng);
        auto it = out.find(c1);
        if (it == out.end())
            out.emplace(c1, moved);
        else
            it->second = it->second + moved;
    }
    return out;
}

// Level compatibility: coarsening the level-n projection along the coset
// surjection agrees with projecting directly at level n' < n.  Components
// are compared up to degree compare_M (the engine truncation should carry
// headroom beyond it, see `recombine`).
inline bool compat_levels(const FiniteDistribution& d, int n, int n_coarse, const ModuleEngine& eng,
                          int64_t bound_half, int compare_M = -1) {
    if (!(n_coarse < n)) throw domain_error("compat_levels requires n' < n");
    if (compare_M < 0) compare_M = eng.M;
    Projection fine = project(d, n, eng);
    Projection coarse = coarsen(fine, n_coarse, eng);
    Projection direct = project(d, n_coarse, eng);
    for (const auto& [cr, comp] : direct) {
        WElement want = comp.truncated(compare_M);
        auto it = coarse.find(cr);
        if (it == coarse.end()) {
            if (!want.is_zero_like()) return false;
            continue;
        }
        if (!it->second.truncated(compare_M).close_to(want, bound_half)) return false;
    }
    for (const auto& [cr, comp] : coarse) {
        if (direct.find(cr) == direct.end() && !comp.truncated(compare_M).is_zero_like()) return false;
    }
    return true;
}

}  // namespace padiq
