#pragma once

// Exhaustive Gibbs measure on a tiny box with heights truncated to
// [j - K, j + K] (intersected with [0, inf) under a floor), where j is the
// boundary height. Used as ground truth for the sampler.

#include <cmath>
#include <cstdint>
#include <vector>

#include "pinnacle/error.hpp"
#include "pinnacle/lattice.hpp"

namespace pinnacle {

class TruncatedEnsemble {
public:
    static constexpr double kMaxStates = 1e8;
    static constexpr std::uint64_t kDenseTableLimit = 1ULL << 22;

    [[nodiscard]] int side() const { return L_; }
    [[nodiscard]] int cutoff() const { return K_; }
    [[nodiscard]] const ModelParams& params() const { return params_; }
    [[nodiscard]] int height_lo() const { return lo_; }
    [[nodiscard]] int height_hi() const { return hi_; }
    [[nodiscard]] int base() const { return hi_ - lo_ + 1; }
    /// Size of the product space (admissible or not).
    [[nodiscard]] std::uint64_t state_count() const { return states_; }
    [[nodiscard]] std::uint64_t admissible_count() const { return admissible_; }
    /// Z = sum over admissible truncated states of exp(-beta H).
    [[nodiscard]] double partition_value() const { return Z_; }

    /// Mixed-radix code of a configuration; the last site in raster order is the fastest digit.
    [[nodiscard]] bool contains(const HeightConfig& c) const {
        if (c.side() != L_ || c.boundary_height() != params_.boundary_height) return false;
        for (int v : c.data())
            if (v < lo_ || v > hi_) return false;
        return true;
    }
    [[nodiscard]] std::uint64_t index_of(const HeightConfig& c) const {
        if (!contains(c)) throw DomainError("ensemble: configuration outside the truncated state space");
        std::uint64_t idx = 0;
        for (int v : c.data()) idx = idx * std::uint64_t(base()) + std::uint64_t(v - lo_);
        return idx;
    }
    [[nodiscard]] HeightConfig config_at(std::uint64_t idx) const {
        HeightConfig c(L_, params_.boundary_height);
        auto& h = c.data();
        for (size_t i = h.size(); i-- > 0;) {
            h[i] = lo_ + int(idx % std::uint64_t(base()));
            idx /= std::uint64_t(base());
        }
        return c;
    }

    /// Normalised probability; zero for inadmissible (RSOS) states.
    [[nodiscard]] double probability(std::uint64_t idx) const {
        if (!table_.empty()) return table_[idx];
        return probability(config_at(idx));
    }
    [[nodiscard]] double probability(const HeightConfig& c) const {
        if (!contains(c) || !is_admissible(c, params_)) return 0.0;
        return std::exp(-params_.beta * hamiltonian(c, params_)) / Z_;
    }

    /// P(eta_site = h).
    [[nodiscard]] double marginal(Point site, int h) const {
        if (h < lo_ || h > hi_) return 0.0;
        return marginals_[site_index(site) * size_t(base()) + size_t(h - lo_)];
    }

    /// P(eta_site >= h), summed exactly from the table mass.
    [[nodiscard]] double marginal_tail(Point site, int h) const {
        double s = 0.0;
        for (int k = std::max(h, lo_); k <= hi_; ++k) s += marginal(site, k);
        return s;
    }

    friend TruncatedEnsemble enumerate(int L, int K, const ModelParams& params);

private:
    [[nodiscard]] size_t site_index(Point p) const {
        if (p.x < 0 || p.y < 0 || p.x >= L_ || p.y >= L_) throw DomainError("ensemble: site outside the box");
        return size_t(p.y) * size_t(L_) + size_t(p.x);
    }

    int L_ = 0;
    int K_ = 0;
    ModelParams params_;
    int lo_ = 0;
    int hi_ = 0;
    std::uint64_t states_ = 0;
    std::uint64_t admissible_ = 0;
    double Z_ = 0.0;
    std::vector<double> marginals_;
    std::vector<double> table_;
};

/// Exhaustive enumeration; throws BudgetError when the product space exceeds 1e8 states.
inline TruncatedEnsemble enumerate(int L, int K, const ModelParams& params) {
    if (L < 1 || L > 4) throw DomainError("enumerate: L must be in 1..4");
    if (K < 0) throw DomainError("enumerate: K must be >= 0");
    if (!(params.beta >= 0.0)) throw ConfigError("enumerate: beta must be >= 0");
    if (params.floor && params.boundary_height < 0) throw ConfigError("enumerate: floor needs boundary >= 0");

    TruncatedEnsemble e;
    e.L_ = L;
    e.K_ = K;
    e.params_ = params;
    const int j = params.boundary_height;
    e.lo_ = params.floor ? std::max(j - K, 0) : j - K;
    e.hi_ = j + K;
    const int base = e.hi_ - e.lo_ + 1;
    const int n = L * L;
    const double count = std::pow(double(base), double(n));
    if (count > TruncatedEnsemble::kMaxStates)
        throw BudgetError("enumerate: truncated state space too large", count);
    e.states_ = std::uint64_t(std::llround(count));

    // Bond costs by |difference|; RSOS violations get a sentinel that marks the state inadmissible.
    constexpr double kForbidden = 1e18;
    const int maxd = std::max(base, std::abs(j - e.lo_) + 1) + base;
    std::vector<double> cost(size_t(maxd + 1));
    for (int d = 0; d <= maxd; ++d)
        cost[size_t(d)] = params.p.is_infinite() && d > 1 ? kForbidden : params.p.bond_cost(d);
    auto bond = [&](int a, int b) { return cost[size_t(std::abs(a - b))]; };

    // e_i holds the bonds of site i to earlier sites in raster order plus its boundary bonds,
    // so prefix[i] = e_0 + ... + e_i depends only on sites 0..i.
    std::vector<int> h(size_t(n), e.lo_);
    std::vector<double> prefix(size_t(n), 0.0);
    auto recompute_from = [&](int first) {
        for (int i = first; i < n; ++i) {
            const int x = i % L, y = i / L, v = h[size_t(i)];
            double s = 0.0;
            s += x > 0 ? bond(v, h[size_t(i - 1)]) : bond(v, j);
            s += y > 0 ? bond(v, h[size_t(i - L)]) : bond(v, j);
            if (x == L - 1) s += bond(v, j);
            if (y == L - 1) s += bond(v, j);
            prefix[size_t(i)] = (i > 0 ? prefix[size_t(i - 1)] : 0.0) + s;
        }
    };
    recompute_from(0);

    e.marginals_.assign(size_t(n) * size_t(base), 0.0);
    const bool dense = e.states_ <= TruncatedEnsemble::kDenseTableLimit;
    if (dense) e.table_.assign(e.states_, 0.0);

    double Z = 0.0, comp = 0.0;  // Neumaier-compensated sum
    for (std::uint64_t idx = 0; idx < e.states_; ++idx) {
        const double energy = prefix[size_t(n - 1)];
        if (energy < kForbidden) {
            const double w = std::exp(-params.beta * energy);
            const double t = Z + w;
            comp += std::abs(Z) >= w ? (Z - t) + w : (w - t) + Z;
            Z = t;
            ++e.admissible_;
            for (int i = 0; i < n; ++i) e.marginals_[size_t(i) * size_t(base) + size_t(h[size_t(i)] - e.lo_)] += w;
            if (dense) e.table_[idx] = w;
        }
        // odometer increment, last site fastest
        int i = n - 1;
        while (i >= 0 && h[size_t(i)] == e.hi_) h[size_t(i--)] = e.lo_;
        if (i < 0) break;
        ++h[size_t(i)];
        recompute_from(i);
    }
    e.Z_ = Z + comp;
    for (double& m : e.marginals_) m /= e.Z_;
    for (double& t : e.table_) t /= e.Z_;
    return e;
}

}  // namespace pinnacle
