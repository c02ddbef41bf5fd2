// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Run directly or through ctest.
#include <cstdio>

#include "padiq/acceptance.hpp"

int main(int argc, char** argv) {
    padiq::RunConfig cfg;
    if (argc > 1) cfg = padiq::RunConfig::load(argv[1]);
    cfg.validate();
    std::printf("acceptance suite  (%s)\n", cfg.echo().c_str());
    auto results = padiq::run_acceptance(cfg);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] C%-2d %-70s  %6.2fs/%.0fs  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds, r.limit_seconds, r.detail.c_str());
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return all ? 0 : 1;
}
