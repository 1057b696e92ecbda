#pragma once

// Heat-bath (single-site Gibbs) dynamics for the p-gradient surface with an
// optional floor, plus the monotone grand coupling of two chains driven by
// shared uniforms.
//
// Every update draws the new height by inverse-CDF sampling of the exact
// single-site conditional
//
//   P(k) ~ exp(-beta * sum_{y~x} |k - eta_y|^p),
//
// restricted to k >= 0 under a floor and to [max_y eta_y - 1, min_y eta_y + 1]
// for RSOS. For finite p the candidates are the window
// [min_y eta_y - W, max_y eta_y + W], W = ceil((40/beta)^{1/p}) + 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "pinnacle/error.hpp"
#include "pinnacle/lattice.hpp"
#include "pinnacle/rng.hpp"

namespace pinnacle {

enum class Schedule { Sequential, Checkerboard };

struct ChainSpec {
    ModelParams params;
    int L = 8;
    std::uint64_t seed = 1;
    long long sweeps_burnin = 0;
    long long sweeps_sample = 0;
    long long thinning = 1;
    Schedule schedule = Schedule::Sequential;
    bool keep_snapshots = false;
    /// Threads used by the checkerboard schedule; results do not depend on it.
    int workers = 1;

    void validate() const {
        params.validate();
        if (L <= 0) throw ConfigError("chain: L must be positive");
        if (sweeps_burnin < 0 || sweeps_sample < 0) throw ConfigError("chain: sweep counts must be >= 0");
        if (thinning < 1) throw ConfigError("chain: thinning must be >= 1");
        if (workers < 1) throw ConfigError("chain: workers must be >= 1");
    }
};

/// Burn-in used when none is given: 200 sweeps per unit of side length.
[[nodiscard]] constexpr long long default_burnin(int L) { return 200LL * L; }

struct SampleRecord {
    long long sweep_index = 0;  ///< sweeps completed when the sample was taken
    int max_height = 0;
    double mean_height = 0.0;
    int center_height = 0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

[[nodiscard]] inline SampleRecord observe(const HeightConfig& c, long long sweep) {
    SampleRecord r;
    r.sweep_index = sweep;
    const auto& h = c.data();
    r.max_height = *std::max_element(h.begin(), h.end());
    long long sum = 0;
    for (int v : h) sum += v;
    r.mean_height = double(sum) / double(h.size());
    r.center_height = c[c.center()];
    return r;
}

struct SampleStream {
    std::vector<SampleRecord> records;
    std::vector<HeightConfig> snapshots;  ///< filled only when keep_snapshots is set
    HeightConfig final_state;
};

/// Callback invoked for each retained sample.
using SampleVisitor = std::function<void(const SampleRecord&, const HeightConfig&)>;

/// Exact single-site conditional law: probabilities of heights lo, lo+1, ...
struct Conditional {
    int lo = 0;
    std::vector<double> prob;

    [[nodiscard]] int hi() const { return lo + int(prob.size()) - 1; }
    [[nodiscard]] double operator()(int k) const {
        return k < lo || k > hi() ? 0.0 : prob[size_t(k - lo)];
    }
};

class HeatBathKernel {
public:
    explicit HeatBathKernel(const ModelParams& params) : params_(params) {
        params_.validate();
        if (!params_.p.is_infinite())
            window_ = int(std::ceil(std::pow(40.0 / params_.beta, 1.0 / params_.p.value()))) + 2;
        table_.resize(kTableSize);
        for (int d = 0; d < kTableSize; ++d) table_[size_t(d)] = std::exp(-params_.beta * params_.p.bond_cost(d));
    }

    [[nodiscard]] const ModelParams& params() const { return params_; }
    [[nodiscard]] int window() const { return window_; }

    /// Candidate range for the site given its neighbours.
    void candidate_range(const int (&nb)[4], int& lo, int& hi) const {
        const auto [mn, mx] = std::minmax({nb[0], nb[1], nb[2], nb[3]});
        if (params_.p.is_infinite()) {
            lo = mx - 1;
            hi = mn + 1;
        } else {
            lo = mn - window_;
            hi = mx + window_;
        }
        if (params_.floor) lo = std::max(lo, 0);
    }

    [[nodiscard]] Conditional conditional(const HeightConfig& c, Point site) {
        int nb[4];
        gather(c, site, nb);
        Conditional out;
        const double total = fill_weights(nb, out.lo);
        out.prob.assign(weights_.begin(), weights_.end());
        for (double& w : out.prob) w /= total;
        return out;
    }

    /// New height drawn by inverse CDF from the uniform u in [0, 1).
    [[nodiscard]] int draw(const HeightConfig& c, Point site, double u) {
        int nb[4];
        gather(c, site, nb);
        int lo = 0;
        const double total = fill_weights(nb, lo);
        const double target = u * total;
        double cum = 0.0;
        const size_t n = weights_.size();
        for (size_t i = 0; i + 1 < n; ++i) {
            cum += weights_[i];
            if (cum > target) return lo + int(i);
        }
        return lo + int(n) - 1;
    }

private:
    static constexpr int kTableSize = 512;

    static void gather(const HeightConfig& c, Point s, int (&nb)[4]) {
        const int L = c.side();
        if (s.x > 0 && s.y > 0 && s.x + 1 < L && s.y + 1 < L) {
            const int* row = c.data().data() + c.index(s);
            nb[0] = row[1];
            nb[1] = row[-1];
            nb[2] = row[L];
            nb[3] = row[-L];
        } else {
            for (int k = 0; k < 4; ++k) nb[k] = c.at(s + kNeighborOffsets[k]);
        }
    }

    [[nodiscard]] double bond_weight(long long d) const {
        const long long a = d < 0 ? -d : d;
        return a < kTableSize ? table_[size_t(a)] : std::exp(-params_.beta * params_.p.bond_cost(a));
    }

    double fill_weights(const int (&nb)[4], int& lo) {
        int hi = 0;
        candidate_range(nb, lo, hi);
        if (lo > hi)
            throw AdmissibilityError("heat bath: neighbourhood admits no RSOS height (configuration inadmissible)");
        weights_.resize(size_t(hi - lo + 1));
        double total = 0.0;
        for (int k = lo; k <= hi; ++k) {
            const double w = bond_weight((long long)k - nb[0]) * bond_weight((long long)k - nb[1]) *
                             bond_weight((long long)k - nb[2]) * bond_weight((long long)k - nb[3]);
            weights_[size_t(k - lo)] = w;
            total += w;
        }
        if (total > 1e-250) return total;
        // Widely spread neighbours: renormalise in the log domain.
        double emin = std::numeric_limits<double>::infinity();
        for (int k = lo; k <= hi; ++k) {
            double e = 0.0;
            for (int v : nb) e += params_.p.bond_cost((long long)k - v);
            weights_[size_t(k - lo)] = e;
            emin = std::min(emin, e);
        }
        total = 0.0;
        for (double& w : weights_) {
            w = std::exp(-params_.beta * (w - emin));
            total += w;
        }
        return total;
    }

    ModelParams params_;
    int window_ = 1;
    std::vector<double> table_;
    std::vector<double> weights_;
};

/// One heat-bath update at site using the supplied uniform draw.
inline void heat_bath_update(HeightConfig& config, Point site, const ModelParams& params, double u) {
    if (!config.inside(site)) throw DomainError("heat_bath_update: site outside the box");
    HeatBathKernel kernel(params);
    config[site] = kernel.draw(config, site, u);
}

namespace detail {

/// Runs sweeps over a set of configurations that share every uniform draw.
/// The draw for (sweep, phase, site) depends only on the seed, never on scheduling.
template <size_t N>
class SweepEngine {
public:
    SweepEngine(const ChainSpec& spec, std::array<HeightConfig*, N> states,
                std::array<ModelParams, N> params)
        : spec_(spec), rng_(spec.seed), states_(states) {
        for (size_t i = 0; i < N; ++i) kernels_.emplace_back(params[i]);
    }

    void sweep(long long s) {
        const int L = spec_.L;
        if (spec_.schedule == Schedule::Sequential) {
            for (int y = 0; y < L; ++y)
                for (int x = 0; x < L; ++x) update({x, y}, std::uint64_t(s), kernels_);
            return;
        }
        for (int parity = 0; parity < 2; ++parity) half_sweep(s, parity);
    }

private:
    void update(Point p, std::uint64_t stream, std::vector<HeatBathKernel>& kernels) {
        const double u = rng_.uniform(stream, states_[0]->index(p));
        for (size_t i = 0; i < N; ++i) (*states_[i])[p] = kernels[i].draw(*states_[i], p, u);
    }

    void stripe(long long s, int parity, int y0, int y1, std::vector<HeatBathKernel>& kernels) {
        const std::uint64_t stream = 2 * std::uint64_t(s) + std::uint64_t(parity) + (1ULL << 62);
        for (int y = y0; y < y1; ++y)
            for (int x = (y + parity) & 1; x < spec_.L; x += 2) update({x, y}, stream, kernels);
    }

    void half_sweep(long long s, int parity) {
        const int workers = std::min(spec_.workers, spec_.L);
        if (workers <= 1) {
            stripe(s, parity, 0, spec_.L, kernels_);
            return;
        }
        // Same-parity sites are never adjacent, so stripes can run concurrently.
        std::vector<std::vector<HeatBathKernel>> local(size_t(workers), kernels_);
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            const int y0 = spec_.L * w / workers, y1 = spec_.L * (w + 1) / workers;
            pool.emplace_back([this, s, parity, y0, y1, &local, w] { stripe(s, parity, y0, y1, local[size_t(w)]); });
        }
    }

    const ChainSpec& spec_;
    CounterRng rng_;
    std::array<HeightConfig*, N> states_;
    std::vector<HeatBathKernel> kernels_;
};

inline void check_initial(const ChainSpec& spec, const HeightConfig& init, const ModelParams& params) {
    if (init.side() != spec.L) throw ConfigError("chain: initial configuration has the wrong side length");
    if (init.boundary_height() != params.boundary_height)
        throw ConfigError("chain: initial boundary height differs from the model's boundary height");
    check_admissible(init, params);
}

}  // namespace detail

/// Burn-in followed by sampling; every thinning-th sampling sweep is retained.
inline SampleStream run_chain(const ChainSpec& spec, HeightConfig initial, const SampleVisitor& visit = {}) {
    spec.validate();
    detail::check_initial(spec, initial, spec.params);
    SampleStream out;
    out.final_state = std::move(initial);
    detail::SweepEngine<1> engine(spec, {&out.final_state}, {spec.params});
    const long long total = spec.sweeps_burnin + spec.sweeps_sample;
    for (long long s = 0; s < total; ++s) {
        engine.sweep(s);
        if (s < spec.sweeps_burnin || (s - spec.sweeps_burnin + 1) % spec.thinning != 0) continue;
        const SampleRecord rec = observe(out.final_state, s + 1);
        out.records.push_back(rec);
        if (spec.keep_snapshots) out.snapshots.push_back(out.final_state);
        if (visit) visit(rec, out.final_state);
    }
    return out;
}

/// Raised when the coupled pair loses its sitewise order.
class CouplingError : public Error {
public:
    using Error::Error;
};

struct PairRecord {
    long long sweep_index = 0;
    bool ordered = true;
    SampleRecord lower;
    SampleRecord upper;
};

struct PairedStream {
    std::vector<PairRecord> records;  ///< one per retained sweep
    long long sweeps_checked = 0;     ///< ordering is asserted after every sweep, burn-in included
    HeightConfig lower_final;
    HeightConfig upper_final;
};

[[nodiscard]] inline bool dominates(const HeightConfig& upper, const HeightConfig& lower) {
    const auto& u = upper.data();
    const auto& l = lower.data();
    for (size_t i = 0; i < u.size(); ++i)
        if (u[i] < l[i]) return false;
    return true;
}

/// Two chains driven by the same uniforms. The upper chain may use its own
/// parameters (e.g. a floor or a higher boundary); the lower chain uses spec.params.
inline PairedStream monotone_pair(const ChainSpec& spec, HeightConfig lower_init, HeightConfig upper_init,
                                  std::optional<ModelParams> upper_params = std::nullopt) {
    spec.validate();
    const ModelParams lp = spec.params;
    const ModelParams up = upper_params.value_or(spec.params);
    up.validate();
    if (!(lp.p == up.p) || lp.beta != up.beta)
        throw ConfigError("monotone_pair: both chains need the same exponent and beta");
    if (lp.boundary_height > up.boundary_height)
        throw ConfigError("monotone_pair: lower boundary must not exceed upper boundary");
    if (lp.floor && !up.floor) throw ConfigError("monotone_pair: a floored lower chain cannot be dominated");
    detail::check_initial(spec, lower_init, lp);
    detail::check_initial(spec, upper_init, up);
    if (!dominates(upper_init, lower_init)) throw ConfigError("monotone_pair: initial pair is not ordered");

    PairedStream out;
    out.lower_final = std::move(lower_init);
    out.upper_final = std::move(upper_init);
    detail::SweepEngine<2> engine(spec, {&out.lower_final, &out.upper_final}, {lp, up});
    const long long total = spec.sweeps_burnin + spec.sweeps_sample;
    for (long long s = 0; s < total; ++s) {
        engine.sweep(s);
        ++out.sweeps_checked;
        if (!dominates(out.upper_final, out.lower_final))
            throw CouplingError("monotone coupling lost sitewise order after sweep " + std::to_string(s + 1));
        if (s < spec.sweeps_burnin || (s - spec.sweeps_burnin + 1) % spec.thinning != 0) continue;
        out.records.push_back({s + 1, true, observe(out.lower_final, s + 1), observe(out.upper_final, s + 1)});
    }
    return out;
}

}  // namespace pinnacle
