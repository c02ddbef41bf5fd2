#pragma once

#include <ostream>

#include "json.hpp"
#include "padiq/config.hpp"
#include "padiq/weight.hpp"

namespace padiq {

inline std::string val_str(const Val& v) { return v.str(); }

// drop the all-exactly-zero tail so finitely supported elements print small
inline size_t profile_emit_count(const std::vector<ProfileRow>& rows) {
    size_t last = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        bool blank = r.val_a.inf && r.val_b.inf && !r.censored_a && !r.censored_b;
        if (!blank) last = i + 1;
    }
    return last == 0 ? 1 : last;
}

// CSV columns: m, val_a, val_b, censored
inline void write_profile_csv(std::ostream& os, const std::vector<ProfileRow>& rows) {
    os << "m,val_a,val_b,censored\n";
    size_t n = profile_emit_count(rows);
    for (size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        os << r.m << "," << val_str(r.val_a) << "," << val_str(r.val_b) << ","
           << ((r.censored_a || r.censored_b) ? 1 : 0) << "\n";
    }
}

inline nlohmann::json config_json(const RunConfig& cfg) {
    return nlohmann::json{{"p", cfg.p},
                          {"iota", cfg.iota ? cfg.iota : smallest_nonresidue(cfg.p)},
                          {"precision", cfg.precision},
                          {"truncation", cfg.truncation},
                          {"lambda_i", cfg.lambda_i},
                          {"lambda_h", cfg.lambda_h},
                          {"chi_a", cfg.chi_a},
                          {"chi_b", cfg.chi_b},
                          {"c_w", cfg.c_w},
                          {"c_v", cfg.c_v},
                          {"c_h", cfg.c_h},
                          {"c_i", cfg.c_i},
                          {"level", cfg.level},
                          {"window", cfg.window},
                          {"margin", cfg.margin().str()},
                          {"seed", cfg.seed}};
}

// JSON: array of row objects with the CSV keys plus a header echoing the run
// configuration
inline void write_profile_json(std::ostream& os, const std::vector<ProfileRow>& rows,
                               const RunConfig& cfg) {
    nlohmann::json j;
    j["header"] = config_json(cfg);
    nlohmann::json arr = nlohmann::json::array();
    size_t n = profile_emit_count(rows);
    for (size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        arr.push_back(nlohmann::json{{"m", r.m},
                                     {"val_a", val_str(r.val_a)},
                                     {"val_b", val_str(r.val_b)},
                                     {"censored", (r.censored_a || r.censored_b) ? 1 : 0}});
    }
    j["rows"] = std::move(arr);
    os << j.dump(2) << "\n";
}

}  // namespace padiq
