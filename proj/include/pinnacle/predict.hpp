#pragma once

// Leading-order tails pi(eta_0 >= h) and the predicted centres M(L), H(L) and M*(L).
//
//   M = max{h : pi(eta_0 >= h) >= L^-2 (log L)^5}
//   H = max{h : pi(eta_0 >= h) >= 5 beta / L}
//   M* = H + M
//
// All logarithms are natural. Analytic tails keep only the leading exponent.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pinnacle/error.hpp"
#include "pinnacle/lattice.hpp"
#include "pinnacle/sampler.hpp"

namespace pinnacle {

/// Leading large-deviation exponent r_p(beta, h), so that pi(eta_0 >= h) ~ exp(-r_p).
struct RateTable {
    Exponent p = Exponent::finite(2.0);
    double beta = 1.0;
    std::optional<double> c_p;    ///< needed for 1 < p < 2
    std::optional<double> c_low;  ///< bracket for 2 < p < inf
    std::optional<double> c_high;

    /// Smallest h for which the exponent is defined.
    [[nodiscard]] int h_min() const { return p.kind() == Exponent::Kind::Quadratic ? 2 : 1; }

    /// Bracket [lower, upper] of the exponent; equal ends when the leading constant is known.
    [[nodiscard]] std::pair<double, double> exponent(int h) const {
        if (!(beta > 0.0)) throw ConfigError("rate table: beta must be positive");
        if (h < h_min()) throw DomainError("rate table: exponent undefined for h = " + std::to_string(h));
        const double x = double(h);
        switch (p.kind()) {
            case Exponent::Kind::Linear: {
                const double r = 4.0 * beta * x;
                return {r, r};
            }
            case Exponent::Kind::Quadratic: {
                const double r = 2.0 * std::numbers::pi * beta * x * x / std::log(x);
                return {r, r};
            }
            case Exponent::Kind::Infinite: {
                const double r = 4.0 * (beta + 2.0 * std::log(27.0 / 16.0)) * x * x;
                return {r, r};
            }
            case Exponent::Kind::General: break;
        }
        const double pv = p.value();
        if (pv < 2.0) {
            if (!c_p) throw ConfigError("rate table: c_p is required for 1 < p < 2");
            const double r = *c_p * beta * std::pow(x, pv);
            return {r, r};
        }
        if (!c_low || !c_high) throw ConfigError("rate table: both bracket constants are required for p > 2");
        const double a = std::min(*c_low, *c_high), b = std::max(*c_low, *c_high);
        return {a * beta * x * x, b * beta * x * x};
    }

    [[nodiscard]] bool bracketed() const { return p.kind() == Exponent::Kind::General && p.value() > 2.0; }
};

/// log pi(eta_0 >= h) under the leading-order surrogate; the lower exponent is used for brackets.
[[nodiscard]] inline double log_analytic_tail(const RateTable& rates, int h) { return -rates.exponent(h).first; }

[[nodiscard]] inline double analytic_tail(const RateTable& rates, int h) { return std::exp(log_analytic_tail(rates, h)); }

enum class TailBackend { Analytic, Empirical };

/// Tabulated tail h -> pi(eta_0 >= h) on [h_min, h_min + size). Below the table the tail is
/// taken as 1; above it, as 0.
struct TailEstimate {
    TailBackend backend = TailBackend::Analytic;
    ModelParams params;
    int h_min = 0;
    std::vector<double> log_value;  ///< log of the estimate
    std::vector<double> se;         ///< standard errors (empirical only)
    long long samples = 0;          ///< observations behind each empirical entry
    std::string provenance;

    [[nodiscard]] int h_max() const { return h_min + int(log_value.size()) - 1; }
    [[nodiscard]] double log_at(int h) const {
        if (h < h_min) return 0.0;
        if (h > h_max()) return -std::numeric_limits<double>::infinity();
        return log_value[size_t(h - h_min)];
    }
    [[nodiscard]] double at(int h) const { return std::exp(log_at(h)); }

    void validate() const {
        for (size_t i = 0; i < log_value.size(); ++i) {
            if (!(log_value[i] <= 1e-12)) throw ValidityError("tail: value above 1 at h = " + std::to_string(h_min + int(i)));
            if (i > 0 && log_value[i] > log_value[i - 1] + 1e-12)
                throw ValidityError("tail: increases at h = " + std::to_string(h_min + int(i)));
        }
        if (backend == TailBackend::Empirical && samples < 1) throw ValidityError("tail: empirical estimate without samples");
    }
};

/// Analytic table from h_min up to the first h whose exponent exceeds max_exponent.
[[nodiscard]] inline TailEstimate analytic_tail_estimate(const RateTable& rates, const ModelParams& params,
                                                         double max_exponent = 1e4) {
    TailEstimate t;
    t.backend = TailBackend::Analytic;
    t.params = params;
    t.h_min = rates.h_min();
    for (int h = t.h_min;; ++h) {
        const double lv = log_analytic_tail(rates, h);
        t.log_value.push_back(lv);
        if (-lv > max_exponent || h > 1'000'000) break;
    }
    t.provenance = rates.bracketed() ? "analytic (lower end of bracket)" : "analytic";
    return t;
}

/// Pools observed heights into an empirical tail.
class TailAccumulator {
public:
    void add(int height) {
        if (counts_.empty()) lo_ = height;
        if (height < lo_) {
            counts_.insert(counts_.begin(), size_t(lo_ - height), 0);
            lo_ = height;
        }
        if (size_t(height - lo_) >= counts_.size()) counts_.resize(size_t(height - lo_) + 1, 0);
        ++counts_[size_t(height - lo_)];
        ++total_;
    }

    /// Adds every box site at least `margin` away from the boundary.
    void add_bulk(const HeightConfig& c, int margin) {
        const int L = c.side();
        for (int y = margin; y < L - margin; ++y)
            for (int x = margin; x < L - margin; ++x) add(c[{x, y}]);
    }

    [[nodiscard]] long long total() const { return total_; }

    /// Tail on [min observed, max observed + 1] with binomial standard errors.
    [[nodiscard]] TailEstimate finish(const ModelParams& params, std::string provenance) const {
        if (total_ < 1) throw DomainError("empirical tail: no observations");
        if (params.floor) throw ConfigError("empirical tail: floored samples estimate the conditioned law, not pi");
        TailEstimate t;
        t.backend = TailBackend::Empirical;
        t.params = params;
        t.samples = total_;
        t.provenance = std::move(provenance);
        t.h_min = lo_;
        long long above = total_;
        const double n = double(total_);
        for (size_t k = 0; k <= counts_.size(); ++k) {
            const double q = double(above) / n;
            t.log_value.push_back(above > 0 ? std::log(q) : -std::numeric_limits<double>::infinity());
            t.se.push_back(std::sqrt(q * (1.0 - q) / n));
            if (k < counts_.size()) above -= counts_[k];
        }
        return t;
    }

private:
    int lo_ = 0;
    std::vector<long long> counts_;
    long long total_ = 0;
};

/// Tail of the centre height over the retained samples of an unfloored chain.
[[nodiscard]] inline TailEstimate empirical_tail(const SampleStream& stream, const ModelParams& params) {
    if (params.floor) throw ConfigError("empirical tail: floored samples estimate the conditioned law, not pi");
    TailAccumulator acc;
    for (const SampleRecord& r : stream.records) acc.add(r.center_height);
    return acc.finish(params, "centre site, " + std::to_string(stream.records.size()) + " samples");
}

struct Prediction {
    int value = 0;
    double log_threshold = 0.0;
    std::optional<double> asymptote;   ///< closed-form leading-order value, where available
    std::optional<double> comparison;  ///< backend-specific reference value
    std::vector<std::string> warnings;
};

/// L^-2 (log L)^5, in logs.
[[nodiscard]] inline double log_threshold_M(double L) { return -2.0 * std::log(L) + 5.0 * std::log(std::log(L)); }

/// 5 beta / L, in logs.
[[nodiscard]] inline double log_threshold_H(double L, double beta) { return std::log(5.0 * beta) - std::log(L); }

namespace detail {

/// Largest h with log tail(h) >= log_t, inclusive.
inline Prediction scan_threshold(const TailEstimate& tail, double log_t) {
    tail.validate();
    Prediction out;
    out.log_threshold = log_t;
    if (log_t >= 0.0) {
        out.value = 0;
        out.warnings.push_back("degenerate threshold: at least 1");
        return out;
    }
    if (tail.log_value.empty() || tail.log_at(tail.h_min) < log_t) {
        out.value = tail.h_min - 1;
        out.warnings.push_back("threshold crossed below the tabulated range");
        return out;
    }
    int h = tail.h_min;
    while (h < tail.h_max() && tail.log_at(h + 1) >= log_t) ++h;
    out.value = h;
    if (h == tail.h_max()) out.warnings.push_back("tail stays above the threshold to the end of the table");
    return out;
}

inline bool quadratic(const TailEstimate& t) { return t.params.p.kind() == Exponent::Kind::Quadratic; }

}  // namespace detail

/// sqrt((1 / 2 pi beta) log L log log L)
[[nodiscard]] inline double asymptote_M(double L, double beta) {
    return std::sqrt(std::log(L) * std::log(std::log(L)) / (2.0 * std::numbers::pi * beta));
}

/// sqrt((1 / 4 pi beta) log L log log L)
[[nodiscard]] inline double asymptote_H(double L, double beta) {
    return std::sqrt(std::log(L) * std::log(std::log(L)) / (4.0 * std::numbers::pi * beta));
}

/// ((1 + sqrt 2) / (2 sqrt(pi beta))) sqrt(log L log log L)
[[nodiscard]] inline double asymptote_M_star(double L, double beta) {
    return (1.0 + std::numbers::sqrt2) / (2.0 * std::sqrt(std::numbers::pi * beta)) *
           std::sqrt(std::log(L) * std::log(std::log(L)));
}

[[nodiscard]] inline Prediction predict_M(double L, const TailEstimate& tail) {
    if (!(L > std::numbers::e)) throw DomainError("predict_M: L must exceed e");
    Prediction out = detail::scan_threshold(tail, log_threshold_M(L));
    if (tail.backend == TailBackend::Analytic && detail::quadratic(tail)) out.asymptote = asymptote_M(L, tail.params.beta);
    return out;
}

[[nodiscard]] inline Prediction predict_H(double L, double beta, const TailEstimate& tail) {
    if (!(L > 1.0)) throw DomainError("predict_H: L must exceed 1");
    if (!(beta > 0.0)) throw DomainError("predict_H: beta must be positive");
    Prediction out = detail::scan_threshold(tail, log_threshold_H(L, beta));
    if (tail.backend == TailBackend::Analytic && detail::quadratic(tail)) out.asymptote = asymptote_H(L, beta);
    if (tail.params.p.kind() == Exponent::Kind::Linear) out.comparison = std::ceil(std::log(L) / (4.0 * beta));
    return out;
}

struct MaxWindow {
    int M = 0;
    int H = 0;
    int M_star = 0;  ///< H + M; the floored maximum sits in {M*, M* + 1, M* + 2}
    std::optional<double> asymptote;
    std::vector<std::string> warnings;
};

[[nodiscard]] inline MaxWindow predict_M_star(double L, double beta, const TailEstimate& tail) {
    if (!detail::quadratic(tail)) throw DomainError("predict_M_star: defined for p = 2");
    const Prediction m = predict_M(L, tail);
    const Prediction h = predict_H(L, beta, tail);
    MaxWindow w{m.value, h.value, m.value + h.value, std::nullopt, m.warnings};
    w.warnings.insert(w.warnings.end(), h.warnings.begin(), h.warnings.end());
    if (tail.backend == TailBackend::Analytic) w.asymptote = asymptote_M_star(L, beta);
    return w;
}

}  // namespace pinnacle
