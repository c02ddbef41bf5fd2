#pragma once

#include <cstdint>

#include "padiq/ext.hpp"

namespace padiq {

// Deterministic splitmix64 generator; all sampling in tests and suites goes
// through this so runs are replayable from the printed seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t below(uint64_t n) { return n ? next() % n : 0; }

    // random p-adic with valuation exactly vmin + below(spread), unit sampled
    // digit by digit
    PadicScalar padic(const PadicCtx* c, int64_t vmin, int ndigits, int vspread = 1) {
        int64_t v = vmin + static_cast<int64_t>(below(static_cast<uint64_t>(vspread)));
        uint64_t first = 1 + below(c->p - 1);
        PadicScalar x = PadicScalar::from_int(c, static_cast<int64_t>(first));
        uint64_t scale = c->p;
        for (int i = 1; i < ndigits && i < 9; ++i) {
            uint64_t d = below(c->p);
            x = x + PadicScalar::from_int(c, static_cast<int64_t>(d * scale));
            scale *= c->p;
        }
        return x.shift_p(v);
    }

    ExtScalar ext(const PadicCtx* c, int64_t vmin, int ndigits) {
        return ExtScalar(padic(c, vmin, ndigits, 2), padic(c, vmin, ndigits, 2));
    }

private:
    uint64_t state_;
};

}  // namespace padiq
