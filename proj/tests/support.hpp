#pragma once

// Small generators for property tests.

#include <random>

#include "pinnacle/lattice.hpp"

namespace pinnacle::gen {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }

    /// Heights uniform in [lo, hi].
    HeightConfig config(int L, int lo, int hi, int boundary = 0) {
        HeightConfig c(L, boundary);
        for (int& v : c.data()) v = integer(lo, hi);
        return c;
    }

    /// Random config with every bond gradient in {-1, 0, 1}, boundary included.
    HeightConfig rsos_config(int L, int boundary = 0, int sweeps = 20) {
        HeightConfig c = HeightConfig::flat(L, boundary);
        for (int s = 0; s < sweeps; ++s)
            for (int y = 0; y < L; ++y)
                for (int x = 0; x < L; ++x) {
                    const Point p{x, y};
                    const int h = c[p] + integer(-1, 1);
                    bool ok = true;
                    for (Point off : kNeighborOffsets) ok = ok && std::abs(h - c.at(p + off)) <= 1;
                    if (ok) c[p] = h;
                }
        return c;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace pinnacle::gen
