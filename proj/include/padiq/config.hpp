#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "padiq/quaternion.hpp"
#include "padiq/weight.hpp"

namespace padiq {

// Flat key-value run configuration shared by the CLI subcommands.  Every
// field mirrors a module parameter and is re-validated on load; environment
// variables of the form PADIQ_<KEY> override file values.
struct RunConfig {
    uint32_t p = 5;
    uint32_t iota = 0;  // 0 = smallest quadratic non-residue mod p
    int precision = 200;
    int truncation = 160;
    int64_t lambda_i = 1;
    int64_t lambda_h = 1;
    int64_t chi_a = 1;  // chi(Delta) = chi_a + chi_b sqrt(p)
    int64_t chi_b = 0;
    int64_t c_w = 25;
    int64_t c_v = 5;
    int64_t c_h = 0;
    int64_t c_i = 0;
    int level = 1;
    int window = 40;
    int64_t margin_num = 1;
    int64_t margin_den = 2;
    uint64_t seed = 20250401;
    std::string format = "csv";
    std::string out;
    bool verbose = false;

    void set(const std::string& key, const std::string& value) {
        auto to_i64 = [&](int64_t& slot) { slot = std::stoll(value); };
        auto to_u64 = [&](uint64_t& slot) { slot = std::stoull(value); };
        auto to_int = [&](int& slot) { slot = std::stoi(value); };
        if (key == "p") { p = static_cast<uint32_t>(std::stoul(value)); return; }
        if (key == "iota") { iota = static_cast<uint32_t>(std::stoul(value)); return; }
        if (key == "precision") { to_int(precision); return; }
        if (key == "truncation") { to_int(truncation); return; }
        if (key == "lambda_i") { to_i64(lambda_i); return; }
        if (key == "lambda_h") { to_i64(lambda_h); return; }
        if (key == "chi_a") { to_i64(chi_a); return; }
        if (key == "chi_b") { to_i64(chi_b); return; }
        if (key == "c_w") { to_i64(c_w); return; }
        if (key == "c_v") { to_i64(c_v); return; }
        if (key == "c_h") { to_i64(c_h); return; }
        if (key == "c_i") { to_i64(c_i); return; }
        if (key == "level") { to_int(level); return; }
        if (key == "window") { to_int(window); return; }
        if (key == "margin_num") { to_i64(margin_num); return; }
        if (key == "margin_den") { to_i64(margin_den); return; }
        if (key == "seed") { to_u64(seed); return; }
        if (key == "format") { format = value; return; }
        if (key == "out") { out = value; return; }
        if (key == "verbose") { verbose = (value == "1" || value == "true"); return; }
        throw domain_error("unknown config key: " + key);
    }

    static RunConfig load(const std::string& path) {
        RunConfig cfg;
        if (!path.empty()) {
            std::ifstream in(path);
            if (!in) throw domain_error("cannot open config file: " + path);
            std::string line;
            while (std::getline(in, line)) {
                auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                auto eq = line.find('=');
                if (eq == std::string::npos) continue;
                auto trim = [](std::string s) {
                    size_t b = s.find_first_not_of(" \t\r");
                    size_t e = s.find_last_not_of(" \t\r");
                    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
                };
                std::string key = trim(line.substr(0, eq));
                std::string value = trim(line.substr(eq + 1));
                if (!key.empty()) cfg.set(key, value);
            }
        }
        cfg.apply_env();
        return cfg;
    }

    void apply_env() {
        static const char* keys[] = {"p", "iota", "precision", "truncation", "lambda_i", "lambda_h",
                                     "chi_a", "chi_b", "c_w", "c_v", "c_h", "c_i", "level",
                                     "window", "margin_num", "margin_den", "seed", "format", "out",
                                     "verbose"};
        for (const char* k : keys) {
            std::string env = "PADIQ_";
            for (const char* c = k; *c; ++c) env += static_cast<char>(::toupper(*c));
            if (const char* v = std::getenv(env.c_str())) set(k, v);
        }
    }

    void validate() const {
        if (!detail::is_prime_u64(p) || p < 5) throw domain_error("p must be a prime >= 5");
        if (iota && is_qr_mod_p(iota, p)) throw domain_error("iota must be a quadratic non-residue mod p");
        if (precision < 16 || precision > 600) throw domain_error("precision out of range");
        if (truncation < 4 || truncation > 2000) throw domain_error("truncation out of range");
        if (level < 1) throw domain_error("level must be >= 1");
        if (window < 2 || window > truncation / 2) throw domain_error("window out of range");
        if (margin_den <= 0) throw domain_error("margin denominator must be positive");
        if (format != "csv" && format != "json") throw domain_error("format must be csv or json");
        for (int64_t c : {c_w, c_v, c_h, c_i})
            if (c % static_cast<int64_t>(p) != 0)
                throw domain_error("group coordinates must be divisible by p");
    }

    AlgebraParams algebra() const { return AlgebraParams(p, precision, iota); }

    WeightChar weight(const AlgebraParams& a) const {
        return WeightChar{PadicScalar::from_int(a.ctx, lambda_i), PadicScalar::from_int(a.ctx, lambda_h)};
    }
    InfChar inf_char(const AlgebraParams& a) const {
        return InfChar{ExtScalar(PadicScalar::from_int(a.ctx, chi_a), PadicScalar::from_int(a.ctx, chi_b))};
    }
    // `a` must outlive the returned coordinates
    SecondKindCoords coords(const AlgebraParams& a) const {
        return SecondKindCoords{PadicScalar::from_int(a.ctx, c_w), PadicScalar::from_int(a.ctx, c_v),
                                PadicScalar::from_int(a.ctx, c_h), PadicScalar::from_int(a.ctx, c_i),
                                &a};
    }
    Rational margin() const { return Rational::of(margin_num, margin_den); }

    std::string echo() const {
        std::ostringstream os;
        os << "p=" << p << " iota=" << (iota ? iota : smallest_nonresidue(p)) << " precision=" << precision
           << " truncation=" << truncation << " lambda_i=" << lambda_i << " lambda_h=" << lambda_h
           << " chi=" << chi_a << "+" << chi_b << "*sqrt(p)"
           << " coords=(" << c_w << "," << c_v << "," << c_h << "," << c_i << ")"
           << " level=" << level << " window=" << window
           << " margin=" << margin_num << "/" << margin_den << " seed=" << seed;
        return os.str();
    }
};

}  // namespace padiq
