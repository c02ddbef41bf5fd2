#pragma once

#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "padiq/config.hpp"
#include "padiq/decomposition.hpp"
#include "padiq/iwasawa.hpp"
#include "padiq/rng.hpp"

namespace padiq {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0;
    double limit_seconds = 0;
    std::string detail;  // deterministic for a fixed config
};

namespace detail_acc {

inline int thread_budget() {
    if (const char* env = std::getenv("PADIQ_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// deterministic parallel map: results are collected by index
template <typename F>
void parallel_for(int count, F&& fn) {
    int threads = std::min(thread_budget(), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

inline uint64_t subseed(uint64_t seed, uint64_t tag) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ull * (tag + 1)));
    return r.next();
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail_acc

// 1. Bracket table at N = 50 for p in {5, 7}.
inline CriterionResult criterion_brackets(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{1, "bracket table [h,w]=2v, [h,v]=2pw, [w,v]=-2iota h (p=5,7)", false, 0, 1.0, ""};
    (void)cfg;
    bool ok = true;
    std::ostringstream detail;
    for (uint32_t p : {5u, 7u}) {
        AlgebraParams a(p, 50);
        LieVec h = LieVec::basis(&a, Gen::H);
        LieVec w = LieVec::basis(&a, Gen::W);
        LieVec v = LieVec::basis(&a, Gen::V);
        LieVec hw = bracket(h, w), hv = bracket(h, v), wv = bracket(w, v);
        bool t1 = hw.cv.same_value(PadicScalar::from_int(a.ctx, 2)) && hw.cw.is_zero_like() &&
                  hw.ch.is_zero_like() && hw.cI.is_zero_like();
        bool t2 = hv.cw.same_value(PadicScalar::from_int(a.ctx, 2 * static_cast<int64_t>(p))) &&
                  hv.cv.is_zero_like() && hv.ch.is_zero_like() && hv.cI.is_zero_like();
        bool t3 = wv.ch.same_value(PadicScalar::from_int(a.ctx, -2 * static_cast<int64_t>(a.iota))) &&
                  wv.cw.is_zero_like() && wv.cv.is_zero_like() && wv.cI.is_zero_like();
        ok = ok && t1 && t2 && t3;
        detail << "p=" << p << (t1 && t2 && t3 ? " ok" : " FAIL") << "; ";
    }
    r.pass = ok;
    r.detail = detail.str();
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 2. Casimir centrality in the PBW algebra.
inline CriterionResult criterion_casimir(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{2, "normal_form of [Delta, x] vanishes for x in {I,h,w,v}", false, 0, 1.0, ""};
    AlgebraParams a(cfg.p, 50, cfg.iota);
    PBWPoly delta = casimir(&a);
    bool ok = true;
    std::ostringstream detail;
    for (Gen g : {Gen::I, Gen::H, Gen::W, Gen::V}) {
        PBWPoly comm = pbw_commutator(delta, PBWPoly::generator(&a, g));
        bool z = comm.is_zero_like();
        ok = ok && z;
        detail << "[Delta," << gen_name(g) << "]" << (z ? "=0 " : "!=0 ");
    }
    r.pass = ok;
    r.detail = detail.str();
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 3. exp/log round trip on 100 seeded elements of U^2_D at N = 50.
inline CriterionResult criterion_exp_log(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{3, "exp_g(log_u2(g)) = g for 100 seeded g at N=50, <=4 digits lost", false, 0, 5.0, ""};
    AlgebraParams a(cfg.p, 50, cfg.iota);
    Rng rng(detail_acc::subseed(cfg.seed, 3));
    int failures = 0;
    for (int i = 0; i < 100; ++i) {
        LieVec x = LieVec::zero(&a);
        x.cI = rng.padic(a.ctx, 0, 8, 3);
        x.ch = rng.padic(a.ctx, 0, 8, 3);
        x.cw = rng.padic(a.ctx, 0, 8, 3);
        x.cv = rng.padic(a.ctx, 0, 8, 3);
        Quat g = exp_g(x);
        Quat back = exp_g(log_u2(g));
        if (!back.close_to(g, 50 - 4)) ++failures;
    }
    r.pass = failures == 0;
    r.detail = "failures=" + std::to_string(failures) + "/100";
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 4. Exhaustive factorial-valuation sweep at p = 5 over N + a n <= 125.
inline CriterionResult criterion_factorial_sweep(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{4, "v_p(prod(N+ia)) <= k + n/(p-1) for all N+an <= 125 at p=5", false, 0, 5.0, ""};
    (void)cfg;
    const uint32_t p = 5;
    int64_t checked = 0, violations = 0;
    for (int64_t N = 1; N <= 125; ++N)
        for (int64_t a = 1; a < p; ++a)
            for (int64_t n = 0; N + a * n <= 125; ++n) {
                auto rep = factorial_pval_oracle(N, a, n, p);
                ++checked;
                if (!rep.holds) ++violations;
            }
    r.pass = violations == 0;
    r.detail = "checked=" + std::to_string(checked) + " violations=" + std::to_string(violations);
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 5. The v-exponential coefficient valuation at the indices p^k + 1.
inline CriterionResult criterion_k_power(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{5, "v_p(a_{p^k+1}) of exp_v_image equals v_p(c_v^{p^k+1} p^{(p^k+1)/2}/(p^k)!)",
                      false, 0, 60.0, ""};
    const uint32_t p = 5;
    const int M = 160;
    int N = std::max(cfg.precision, 200);
    AlgebraParams a(p, N, cfg.iota);
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    ExtScalar x = a.iota_ext() * ExtScalar::of(lam.lambda_h) * ExtScalar::of(lam.lambda_h) - chi.chi_delta;
    std::ostringstream detail;
    if (!x.is_zero_like() && x.val() < Val::of_int(0)) {
        r.detail = "precondition v_p(x) >= 0 violated by the configured characters";
        r.seconds = timer.seconds();
        return r;
    }
    int64_t vx = x.is_zero_like() ? 1000 : x.val().half / 2;
    ModuleEngine eng = ModuleEngine::dside(&a, lam, chi, M);
    bool ok = true;
    int ties = 0;
    for (int64_t cv : {5, 10, 25, 50}) {
        PadicScalar c = PadicScalar::from_int(a.ctx, cv);
        int64_t nv = c.val().half / 2;
        WElement img = exp_v_image(c, eng);
        for (int k = 1; k <= 2; ++k) {
            int64_t pk = k == 1 ? 5 : 25;
            int64_t idx = pk + 1;
            int64_t m = idx / 2;
            int64_t expected = idx * nv + m - val_p_factorial(static_cast<uint64_t>(pk), p);
            // tie scan over the other terms of the scalar unfolding
            bool tie = false;
            for (int64_t j = m + 1; j <= m + 400; ++j) {
                // v_p(binom(j, m)) via Legendre
                int64_t bin = val_p_factorial(static_cast<uint64_t>(j), p) -
                              val_p_factorial(static_cast<uint64_t>(m), p) -
                              val_p_factorial(static_cast<uint64_t>(j - m), p);
                int64_t vj = 2 * j * nv - val_p_factorial(static_cast<uint64_t>(2 * j), p) + m + bin +
                             (j - m) * vx;
                if (vj == expected) tie = true;
                if (vj > expected + 80) break;
            }
            Val got = img.a[static_cast<size_t>(idx)].val();
            bool match = got == Val::of_int(expected);
            if (tie) {
                ++ties;
                detail << "cv=" << cv << ",k=" << k << ": tie flagged (got " << got.str() << "); ";
            } else if (!match) {
                ok = false;
                detail << "cv=" << cv << ",k=" << k << ": got " << got.str() << " want " << expected << "; ";
            }
        }
    }
    detail << "ties=" << ties;
    r.pass = ok;
    r.detail = detail.str();
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 6. Dominance dichotomy for mixed group images.
inline CriterionResult criterion_dichotomy(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{6, "group_image a_{p^k+1} valuation matches the g_v/g_w dominant term", false, 0,
                      120.0, ""};
    const uint32_t p = 5;
    const int M = 40;
    int N = std::max(cfg.precision, 200);
    AlgebraParams a(p, N, cfg.iota);
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    ModuleEngine eng = ModuleEngine::dside(&a, lam, chi, M);
    Rng rng(detail_acc::subseed(cfg.seed, 6));
    bool ok = true;
    std::ostringstream detail;
    const std::pair<int, int> pairs[] = {{2, 1}, {1, 2}, {1, 1}, {3, 1}};
    for (auto [nw, nv] : pairs) {
        for (int variant = 0; variant < 2; ++variant) {
            // unit part 1, then a seeded unit
            PadicScalar uw = variant ? rng.padic(a.ctx, 0, 5) : PadicScalar::from_int(a.ctx, 1);
            PadicScalar uv = variant ? rng.padic(a.ctx, 0, 5) : PadicScalar::from_int(a.ctx, 1);
            SecondKindCoords c{uw.shift_p(nw), uv.shift_p(nv), PadicScalar::zero(a.ctx),
                               PadicScalar::zero(a.ctx), &a};
            WElement img = group_image(c, eng);
            for (int k = 1; k <= 2; ++k) {
                int64_t pk = k == 1 ? 5 : 25;
                int64_t idx = pk + 1;
                int64_t vfac = val_p_factorial(static_cast<uint64_t>(pk), p);
                int64_t expected = (nv < nw) ? idx * nv + idx / 2 - vfac : idx * nw - vfac;
                Val got = img.a[static_cast<size_t>(idx)].val();
                if (got != Val::of_int(expected)) {
                    ok = false;
                    detail << "(nw,nv)=(" << nw << "," << nv << "),k=" << k << ",variant=" << variant
                           << ": got " << got.str() << " want " << expected << "; ";
                }
            }
        }
    }
    if (ok) detail << "all 16 instances match";
    r.pass = ok;
    r.detail = detail.str();
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 7. Membership equivalence: the tail-slope proxy against the coordinate
// criterion, on 200 seeded samples and levels 1, 2.
inline CriterionResult criterion_membership(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{7, "in_Wn(group_image(g), n) == in_torus_times_Gpn(g, n), n in {1,2}", false, 0,
                      600.0, ""};
    const uint32_t p = 5;
    const int M = 160, window = 40, samples = 200;
    int N = std::max(cfg.precision, 200);
    AlgebraParams a(p, N, cfg.iota);
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    ModuleEngine eng = ModuleEngine::dside(&a, lam, chi, M);
    Rational margin = cfg.margin();
    std::vector<uint64_t> seeds(samples);
    for (int i = 0; i < samples; ++i)
        seeds[static_cast<size_t>(i)] = detail_acc::subseed(cfg.seed, 700 + static_cast<uint64_t>(i));
    std::vector<int> disagreements(samples, 0);
    std::vector<int> censored(samples, 0);
    detail_acc::parallel_for(samples, [&](int i) {
        Rng rng(seeds[static_cast<size_t>(i)]);
        int64_t vw = 1 + static_cast<int64_t>(rng.below(3));
        int64_t vv = 1 + static_cast<int64_t>(rng.below(3));
        int64_t vh = 1 + static_cast<int64_t>(rng.below(3));
        int64_t vi = 1 + static_cast<int64_t>(rng.below(3));
        Quat g = exp_axis_w(&a, rng.padic(a.ctx, vw, 6)) * exp_axis_v(&a, rng.padic(a.ctx, vv, 6)) *
                 exp_axis_h(&a, rng.padic(a.ctx, vh, 6)) * exp_axis_I(&a, rng.padic(a.ctx, vi, 6));
        SecondKindCoords c = to_second_kind(g);
        WElement img = group_image(c, eng);
        for (int n = 1; n <= 2; ++n) {
            bool coord = c.n_w() > Val::of_int(n) && c.n_v() > Val::of_int(n);
            MembershipVerdict v = in_Wn(img, n, window, margin);
            censored[static_cast<size_t>(i)] += v.fit_a.censored + v.fit_b.censored;
            if (v.in_Wn != coord) disagreements[static_cast<size_t>(i)]++;
        }
    });
    int total_dis = 0, total_cens = 0;
    for (int i = 0; i < samples; ++i) {
        total_dis += disagreements[static_cast<size_t>(i)];
        total_cens += censored[static_cast<size_t>(i)];
    }
    r.pass = total_dis == 0 && total_cens == 0;
    r.detail = "samples=200 levels={1,2} disagreements=" + std::to_string(total_dis) +
               " censored=" + std::to_string(total_cens);
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 8. Decomposition round trip, coset count and level compatibility.
inline CriterionResult criterion_decomposition(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{8, "project/recombine round trip, 25 cosets at level 1, compat (2,1)", false, 0,
                      120.0, ""};
    const uint32_t p = 5;
    const int M = 40, Mwork = 72, N = 120;
    AlgebraParams a(p, N, cfg.iota);
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    ModuleEngine eng = ModuleEngine::dside(&a, lam, chi, Mwork);
    const int64_t bound_half = 2 * 52;
    bool cosets_ok = enumerate_cosets(&a, 1).size() == 25;
    auto sample_dist = [&](Rng& rng, int max_atoms) {
        FiniteDistribution d;
        int atoms = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_atoms)));
        for (int i = 0; i < atoms; ++i) {
            int64_t nw = 1 + static_cast<int64_t>(rng.below(2));
            Quat g = exp_axis_w(&a, rng.padic(a.ctx, nw, 6)) * exp_axis_v(&a, rng.padic(a.ctx, 1, 6)) *
                     exp_axis_h(&a, rng.padic(a.ctx, 1 + static_cast<int64_t>(rng.below(3)), 6)) *
                     exp_axis_I(&a, rng.padic(a.ctx, 1 + static_cast<int64_t>(rng.below(3)), 6));
            d.add(rng.ext(a.ctx, 0, 6), g);
        }
        return d;
    };
    std::vector<uint64_t> seeds(100);
    for (int i = 0; i < 100; ++i)
        seeds[static_cast<size_t>(i)] = detail_acc::subseed(cfg.seed, 800 + static_cast<uint64_t>(i));
    std::vector<int> bad_rt(50, 0), bad_compat(50, 0);
    detail_acc::parallel_for(50, [&](int i) {
        Rng rng(seeds[static_cast<size_t>(i)]);
        FiniteDistribution d = sample_dist(rng, 3);
        Projection pr = project(d, 1, eng);
        WElement back = recombine(pr, eng).truncated(M);
        WElement direct = distribution_image(d, eng).truncated(M);
        if (!back.close_to(direct, bound_half)) bad_rt[static_cast<size_t>(i)] = 1;
    });
    detail_acc::parallel_for(50, [&](int i) {
        Rng rng(seeds[static_cast<size_t>(50 + i)]);
        FiniteDistribution d = sample_dist(rng, 2);
        if (!compat_levels(d, 2, 1, eng, bound_half, M)) bad_compat[static_cast<size_t>(i)] = 1;
    });
    int rt_fail = 0, compat_fail = 0;
    for (int i = 0; i < 50; ++i) {
        rt_fail += bad_rt[static_cast<size_t>(i)];
        compat_fail += bad_compat[static_cast<size_t>(i)];
    }
    r.pass = cosets_ok && rt_fail == 0 && compat_fail == 0;
    r.detail = std::string("cosets(level 1)=") + (cosets_ok ? "25" : "WRONG") +
               " roundtrip_failures=" + std::to_string(rt_fail) + "/50 compat_failures=" +
               std::to_string(compat_fail) + "/50";
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 9. Eigenspace uniqueness on the GL2-side module.
inline CriterionResult criterion_eigenspace(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{9, "h-eigenspace at the eigenvalue of the image of 1 is one-dimensional", false, 0,
                      10.0, ""};
    AlgebraParams a(5, 60, cfg.iota);
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    EigenReport rep = h_eigencheck(0, &a, lam, chi, 20);
    ExtScalar predicted = ExtScalar::of(lam.lambda_h);  // lambda(h) + 2k at k = 0
    bool eig_ok = rep.eigenvalue.close_to(predicted, 40);
    r.pass = rep.dimension == 1 && rep.eigen_relation_ok && eig_ok;
    r.detail = "dimension=" + std::to_string(rep.dimension) +
               " eigenvalue=lambda(h) (matches lambda(h)+2k at k=0: " + (eig_ok ? "yes" : "no") + ")";
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

// 10. Iwasawa norms of the generators and of g - 1.
inline CriterionResult criterion_iwasawa_norms(const RunConfig& cfg) {
    detail_acc::Timer timer;
    CriterionResult r{10, "norm_r(generator expansion) = 1 exactly; norm_r(g-1) <= r at n in {1,2}",
                      false, 0, 5.0, ""};
    AlgebraParams a(5, 60, cfg.iota);
    const int M = 60;
    bool ok = true;
    std::ostringstream detail;
    for (int n = 1; n <= 2; ++n) {
        int64_t pn = n == 1 ? 5 : 25;
        NormValue rval{false, true, 2, 2 * pn};
        for (int axis = 0; axis < 4; ++axis) {
            std::array<PadicScalar, 4> exps{PadicScalar::zero(a.ctx), PadicScalar::zero(a.ctx),
                                            PadicScalar::zero(a.ctx), PadicScalar::zero(a.ctx)};
            exps[static_cast<size_t>(axis)] = PadicScalar::from_int(a.ctx, 1);
            BExpansion e = b_expand(exps, M);
            NormValue norm = norm_r(e, n);
            if (!(norm.is_one() && norm.exact)) ok = false;
            BExpansion em = e;
            em.coeffs.erase(MultiIndex{0, 0, 0, 0});
            NormValue nm = norm_r(em, n);
            if (!NormValue::leq(nm, rval)) ok = false;
        }
        detail << "n=" << n << (ok ? " ok; " : " FAIL; ");
    }
    r.pass = ok;
    r.detail = detail.str();
    r.seconds = timer.seconds();
    r.pass = r.pass && r.seconds < r.limit_seconds;
    return r;
}

inline std::vector<CriterionResult> run_acceptance(const RunConfig& cfg) {
    std::vector<CriterionResult> out;
    out.push_back(criterion_brackets(cfg));
    out.push_back(criterion_casimir(cfg));
    out.push_back(criterion_exp_log(cfg));
    out.push_back(criterion_factorial_sweep(cfg));
    out.push_back(criterion_k_power(cfg));
    out.push_back(criterion_dichotomy(cfg));
    out.push_back(criterion_membership(cfg));
    out.push_back(criterion_decomposition(cfg));
    out.push_back(criterion_eigenspace(cfg));
    out.push_back(criterion_iwasawa_norms(cfg));
    return out;
}

}  // namespace padiq
