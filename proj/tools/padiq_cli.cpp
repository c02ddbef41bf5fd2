// Command-line front end: verification suites and valuation tables for the
// quaternion-order / weight-module kernels.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "padiq/acceptance.hpp"
#include "padiq/report.hpp"

using namespace padiq;

namespace {

std::ostream& open_out(const RunConfig& cfg, std::ofstream& file) {
    if (cfg.out.empty()) return std::cout;
    file.open(cfg.out);
    if (!file) throw domain_error("cannot open output file: " + cfg.out);
    return file;
}

struct ExpandData {
    std::vector<ProfileRow> rows;
    MembershipVerdict verdict;
    bool coord_membership = false;
};

ExpandData run_expand(const RunConfig& cfg, const AlgebraParams& a) {
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    ModuleEngine eng = ModuleEngine::dside(&a, lam, chi, cfg.truncation);
    SecondKindCoords coords = cfg.coords(a);
    WElement img = group_image(coords, eng);
    ExpandData d;
    d.rows = valuation_profile(img);
    d.verdict = in_Wn(img, cfg.level, cfg.window, cfg.margin());
    d.coord_membership =
        coords.n_w() > Val::of_int(cfg.level) && coords.n_v() > Val::of_int(cfg.level);
    return d;
}

void write_rows(const RunConfig& cfg, const std::vector<ProfileRow>& rows) {
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    if (cfg.format == "json")
        write_profile_json(os, rows, cfg);
    else
        write_profile_csv(os, rows);
}

int cmd_brackets_verify(const RunConfig& cfg) {
    AlgebraParams a = cfg.algebra();
    bool ok = true;
    // bracket table
    LieVec h = LieVec::basis(&a, Gen::H), w = LieVec::basis(&a, Gen::W), v = LieVec::basis(&a, Gen::V);
    LieVec hw = bracket(h, w), hv = bracket(h, v), wv = bracket(w, v);
    bool table = hw.cv.same_value(PadicScalar::from_int(a.ctx, 2)) &&
                 hv.cw.same_value(PadicScalar::from_int(a.ctx, 2 * static_cast<int64_t>(a.p))) &&
                 wv.ch.same_value(PadicScalar::from_int(a.ctx, -2 * static_cast<int64_t>(a.iota)));
    std::cout << "bracket-table: " << (table ? "pass" : "FAIL") << "\n";
    ok = ok && table;
    // Jacobi on seeded triples
    Rng rng(cfg.seed);
    bool jacobi = true;
    for (int i = 0; i < 100; ++i) {
        LieVec x = LieVec::zero(&a), y = LieVec::zero(&a), z = LieVec::zero(&a);
        for (LieVec* t : {&x, &y, &z}) {
            t->cI = rng.padic(a.ctx, 0, 6, 2);
            t->ch = rng.padic(a.ctx, 0, 6, 2);
            t->cw = rng.padic(a.ctx, 0, 6, 2);
            t->cv = rng.padic(a.ctx, 0, 6, 2);
        }
        LieVec s = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
        jacobi = jacobi && s.is_zero_like();
    }
    std::cout << "jacobi(100 seeded triples): " << (jacobi ? "pass" : "FAIL") << "\n";
    ok = ok && jacobi;
    // Casimir centrality
    PBWPoly delta = casimir(&a);
    bool central = true;
    for (Gen g : {Gen::I, Gen::H, Gen::W, Gen::V})
        central = central && pbw_commutator(delta, PBWPoly::generator(&a, g)).is_zero_like();
    std::cout << "casimir-centrality: " << (central ? "pass" : "FAIL") << "\n";
    ok = ok && central;
    if (cfg.verbose) {
        std::cout << "  [h,w]=2v [h,v]=2pw [w,v]=-2*iota*h with iota=" << a.iota << ", p=" << a.p << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_expand(const RunConfig& cfg, bool table_only) {
    AlgebraParams a = cfg.algebra();
    ExpandData d = run_expand(cfg, a);
    write_rows(cfg, d.rows);
    if (!table_only) {
        std::cout << "slope_a=";
        if (d.verdict.fit_a.defined)
            std::cout << d.verdict.fit_a.slope.str() << " (~" << d.verdict.fit_a.slope.approx() << ")";
        else
            std::cout << "undefined";
        std::cout << " slope_b=";
        if (d.verdict.fit_b.defined)
            std::cout << d.verdict.fit_b.slope.str() << " (~" << d.verdict.fit_b.slope.approx() << ")";
        else
            std::cout << "undefined";
        std::cout << "\nin_Wn(level=" << cfg.level << "): " << (d.verdict.in_Wn ? "true" : "false")
                  << "  censored=" << d.verdict.fit_a.censored + d.verdict.fit_b.censored << "\n";
    }
    return 0;
}

int cmd_membership(const RunConfig& cfg) {
    AlgebraParams a = cfg.algebra();
    ExpandData d = run_expand(cfg, a);
    std::cout << "coordinate criterion (n_w > n and n_v > n): "
              << (d.coord_membership ? "true" : "false") << "\n";
    std::cout << "tail-slope proxy in_Wn: " << (d.verdict.in_Wn ? "true" : "false") << "\n";
    bool agree = d.coord_membership == d.verdict.in_Wn;
    std::cout << "agreement: " << (agree ? "yes" : "NO") << "\n";
    return agree ? 0 : 1;
}

int cmd_decompose(const RunConfig& cfg) {
    AlgebraParams a = cfg.algebra();
    WeightChar lam = cfg.weight(a);
    InfChar chi = cfg.inf_char(a);
    ModuleEngine eng = ModuleEngine::dside(&a, lam, chi, cfg.truncation);
    SecondKindCoords coords = cfg.coords(a);
    FiniteDistribution d;
    d.add(ExtScalar::one(a.ctx), coords.to_group());
    Projection pr = project(d, cfg.level, eng);
    nlohmann::json j;
    j["header"] = config_json(cfg);
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& [cr, comp] : pr) {
        auto rows = valuation_profile(comp);
        Val mina = Val::infinite(), minb = Val::infinite();
        for (const auto& row : rows) {
            mina = min(mina, row.val_a);
            minb = min(minb, row.val_b);
        }
        comps.push_back(nlohmann::json{{"residue_w", cr.rw},
                                       {"residue_v", cr.rv},
                                       {"level", cr.n},
                                       {"min_val_a", mina.str()},
                                       {"min_val_b", minb.str()}});
    }
    j["components"] = std::move(comps);
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    os << j.dump(2) << "\n";
    return 0;
}

int cmd_suite(const RunConfig& cfg) {
    auto results = run_acceptance(cfg);
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    bool all = true;
    for (const auto& r : results) {
        os << (r.pass ? "[PASS] " : "[FAIL] ") << "C" << r.id << " " << r.name;
        if (cfg.verbose || !r.pass) os << " -- " << r.detail;
        os << "\n";
        std::cerr << "C" << r.id << ": " << r.seconds << "s (limit " << r.limit_seconds << "s)\n";
        all = all && r.pass;
    }
    os << (all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "\n";
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact p-adic quaternion-order and weight-module verification"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig overrides;
    bool seed_set = false, format_set = false, out_set = false, verbose_set = false;
    uint64_t seed_val = 0;
    std::string format_val, out_val;

    app.add_option("--config", config_path, "flat key=value configuration file");
    auto* seed_opt = app.add_option("--seed", seed_val, "seed for all sampled checks");
    auto* fmt_opt = app.add_option("--format", format_val, "output format: csv or json");
    auto* out_opt = app.add_option("--out", out_val, "output path (default stdout)");
    auto* verb_flag = app.add_flag("--verbose", "per-check detail in reports");

    auto* c_brackets = app.add_subcommand("brackets-verify", "bracket table, Jacobi and Casimir checks");
    auto* c_expand = app.add_subcommand("expand", "valuation table with slope and membership verdicts");
    auto* c_table = app.add_subcommand("valuation-table", "valuation table only");
    auto* c_member = app.add_subcommand("membership", "coordinate criterion vs tail-slope proxy");
    auto* c_decomp = app.add_subcommand("decompose", "level-n projection report of the configured atom");
    auto* c_suite = app.add_subcommand("suite", "all acceptance criteria");
    for (auto* sub : {c_brackets, c_expand, c_table, c_member, c_decomp, c_suite})
        sub->fallthrough();  // accept the global flags after the subcommand

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::load(config_path);
        if (*seed_opt) { cfg.seed = seed_val; seed_set = true; }
        if (*fmt_opt) { cfg.format = format_val; format_set = true; }
        if (*out_opt) { cfg.out = out_val; out_set = true; }
        if (*verb_flag) { cfg.verbose = true; verbose_set = true; }
        (void)seed_set; (void)format_set; (void)out_set; (void)verbose_set;
        cfg.validate();
        std::cerr << "seed=" << cfg.seed << "\n";
        if (*c_brackets) return cmd_brackets_verify(cfg);
        if (*c_expand) return cmd_expand(cfg, false);
        if (*c_table) return cmd_expand(cfg, true);
        if (*c_member) return cmd_membership(cfg);
        if (*c_decomp) return cmd_decompose(cfg);
        if (*c_suite) return cmd_suite(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
