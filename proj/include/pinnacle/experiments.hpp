#pragma once

// End-to-end Monte Carlo experiments: the unconstrained maximum, the floored
// plateau, the one-point tail, and the tile side-length window. Every report is a
// pair of CSV tables reproducible from (config, seed).

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "pinnacle/contours.hpp"
#include "pinnacle/error.hpp"
#include "pinnacle/lattice.hpp"
#include "pinnacle/predict.hpp"
#include "pinnacle/rng.hpp"
#include "pinnacle/sampler.hpp"

namespace pinnacle {

/// Shortest round-trip text for a double.
[[nodiscard]] inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    template <class... Ts>
    void add(const Ts&... cells) {
        std::vector<std::string> row;
        (row.push_back(cell(cells)), ...);
        if (row.size() != columns.size()) throw DomainError("table: row width does not match the header");
        rows.push_back(std::move(row));
    }

    [[nodiscard]] size_t column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw DomainError("table: no column " + name);
        return size_t(it - columns.begin());
    }
    [[nodiscard]] double number(size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }

    void write_csv(std::ostream& os) const {
        for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
    }

private:
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    static std::string cell(double v) { return format_number(v); }
    template <class T>
        requires std::is_integral_v<T>
    static std::string cell(T v) {
        return std::to_string(v);
    }
};

enum class ExperimentKind { MaxHeight, FloorPlateau, LdpTail, TileRelation };

[[nodiscard]] inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::MaxHeight: return "MAX_HEIGHT";
        case ExperimentKind::FloorPlateau: return "FLOOR_PLATEAU";
        case ExperimentKind::LdpTail: return "LDP_TAIL";
        case ExperimentKind::TileRelation: return "TILE_RELATION";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::MaxHeight;
    ModelParams params;
    std::vector<int> L{32};
    int trials = 1;
    std::uint64_t seed = 1;
    long long burnin = -1;  ///< negative: 200 L sweeps
    long long sweeps = 0;   ///< retained sweeps (tail experiment) after burn-in
    long long thinning = 1;
    Schedule schedule = Schedule::Sequential;
    int workers = 1;        ///< concurrent trials
    int margin = 0;         ///< tail experiment: pool sites this far from the boundary; 0 uses the centre only
    bool coupled = false;   ///< floor experiment: also run the unfloored chain under shared randomness
    int h_lo = 1;
    int h_hi = 3;
    std::optional<double> c_p, c_low, c_high;
    std::string out_dir = ".";

    [[nodiscard]] long long burnin_for(int side) const { return burnin >= 0 ? burnin : default_burnin(side); }

    void validate() const {
        params.validate();
        if (L.empty()) throw ConfigError("experiment: L list is empty");
        if (kind != ExperimentKind::TileRelation)
            for (int l : L)
                if (l < 8) throw ConfigError("experiment: every L must be >= 8");
        if (trials < 1) throw ConfigError("experiment: trials must be >= 1");
        if (thinning < 1 || sweeps < 0) throw ConfigError("experiment: bad sweep counts");
        if (workers < 1) throw ConfigError("experiment: workers must be >= 1");
        if (margin < 0) throw ConfigError("experiment: margin must be >= 0");
        if (h_hi < h_lo) throw ConfigError("experiment: h_hi below h_lo");
        if (kind == ExperimentKind::MaxHeight && params.floor) throw ConfigError("MAX_HEIGHT: floor must be off");
        if (kind == ExperimentKind::FloorPlateau && (!params.floor || params.boundary_height != 0))
            throw ConfigError("FLOOR_PLATEAU: floor on and boundary 0 required");
        if (kind == ExperimentKind::LdpTail) {
            if (params.floor) throw ConfigError("LDP_TAIL: floor must be off");
            for (int l : L)
                if (l < 64) throw ConfigError("LDP_TAIL: L must be >= 64");
        }
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("config: bad value for " + key + ": " + v);
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": " + v);
}

}  // namespace detail

/// Reads `key = value` lines; `#` starts a comment. Unknown keys are errors.
[[nodiscard]] inline ExperimentConfig parse_experiment_config(std::istream& in) {
    using detail::parse_number;
    ExperimentConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string v = detail::trim(line.substr(eq + 1));
        if (key == "experiment") {
            if (v == "MAX_HEIGHT") c.kind = ExperimentKind::MaxHeight;
            else if (v == "FLOOR_PLATEAU") c.kind = ExperimentKind::FloorPlateau;
            else if (v == "LDP_TAIL") c.kind = ExperimentKind::LdpTail;
            else if (v == "TILE_RELATION") c.kind = ExperimentKind::TileRelation;
            else throw ConfigError("config: unknown experiment " + v);
        } else if (key == "p") {
            try {
                c.params.p = Exponent::parse(v);
            } catch (const Error& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
        } else if (key == "beta") c.params.beta = parse_number<double>(key, v);
        else if (key == "floor") c.params.floor = detail::parse_bool(key, v);
        else if (key == "boundary") c.params.boundary_height = parse_number<int>(key, v);
        else if (key == "L") {
            c.L.clear();
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) c.L.push_back(parse_number<int>(key, detail::trim(item)));
        } else if (key == "trials") c.trials = parse_number<int>(key, v);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
        else if (key == "burnin") c.burnin = parse_number<long long>(key, v);
        else if (key == "sweeps") c.sweeps = parse_number<long long>(key, v);
        else if (key == "thinning") c.thinning = parse_number<long long>(key, v);
        else if (key == "schedule") {
            if (v == "sequential") c.schedule = Schedule::Sequential;
            else if (v == "checkerboard") c.schedule = Schedule::Checkerboard;
            else throw ConfigError("config: unknown schedule " + v);
        } else if (key == "workers") c.workers = parse_number<int>(key, v);
        else if (key == "margin") c.margin = parse_number<int>(key, v);
        else if (key == "coupled") c.coupled = detail::parse_bool(key, v);
        else if (key == "h_lo") c.h_lo = parse_number<int>(key, v);
        else if (key == "h_hi") c.h_hi = parse_number<int>(key, v);
        else if (key == "c_p") c.c_p = parse_number<double>(key, v);
        else if (key == "c_low") c.c_low = parse_number<double>(key, v);
        else if (key == "c_high") c.c_high = parse_number<double>(key, v);
        else if (key == "out") c.out_dir = v;
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
    c.validate();
    return c;
}

struct ExperimentReport {
    std::string name;
    Table rows;
    Table summary;

    /// Writes <dir>/<name>_rows.csv and <dir>/<name>_summary.csv.
    void write(const std::string& dir) const {
        std::filesystem::create_directories(dir);
        for (auto [suffix, table] : {std::pair{"_rows.csv", &rows}, std::pair{"_summary.csv", &summary}}) {
            std::ofstream os(std::filesystem::path(dir) / (name + suffix));
            if (!os) throw ConfigError("cannot write to " + dir);
            table->write_csv(os);
        }
    }
};

namespace detail {

/// Runs f(i) for i in [0, n) on up to `workers` threads; results are placed by index.
template <class F>
void run_indexed(int n, int workers, F&& f) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < std::min(workers, n); ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int i = next++; i < n; i = next++) f(i);
                } catch (...) {
                    errors[size_t(w)] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline ChainSpec chain_for(const ExperimentConfig& c, int L, int trial, const ModelParams& params) {
    ChainSpec s;
    s.params = params;
    s.L = L;
    s.seed = derive_seed(c.seed, std::uint64_t(L), std::uint64_t(trial));
    s.sweeps_burnin = c.burnin_for(L);
    s.sweeps_sample = 0;
    s.thinning = c.thinning;
    s.schedule = c.schedule;
    return s;
}

/// Largest mass carried by two consecutive values.
inline std::pair<int, double> best_two(const std::map<int, long long>& hist) {
    long long total = 0;
    for (auto [k, n] : hist) total += n;
    std::pair<int, double> best{0, 0.0};
    for (auto [k, n] : hist) {
        const auto it = hist.find(k + 1);
        const double mass = double(n + (it == hist.end() ? 0 : it->second)) / double(total);
        if (mass > best.second) best = {k, mass};
    }
    return best;
}

inline std::string histogram_text(const std::map<int, long long>& hist) {
    std::string s;
    for (auto [k, n] : hist) s += (s.empty() ? "" : " ") + std::to_string(k) + ":" + std::to_string(n);
    return s;
}

}  // namespace detail

/// Equilibrates from the flat configuration at the boundary height and records X_L, the
/// maximum height, for each (L, trial).
[[nodiscard]] inline ExperimentReport run_max_experiment(const ExperimentConfig& c) {
    c.validate();
    ExperimentReport r;
    r.name = "max_height";
    r.rows.columns = {"L", "trial", "seed", "X_L", "mean_height"};
    r.summary.columns = {"L", "trials", "median", "mode", "best_two_start", "best_two_mass", "histogram"};
    for (int L : c.L) {
        std::vector<SampleRecord> obs(size_t(c.trials));
        detail::run_indexed(c.trials, c.workers, [&](int t) {
            const ChainSpec s = detail::chain_for(c, L, t, c.params);
            const SampleStream out = run_chain(s, HeightConfig::flat(L, c.params.boundary_height));
            obs[size_t(t)] = observe(out.final_state, s.sweeps_burnin);
        });
        std::map<int, long long> hist;
        std::vector<int> xs;
        for (int t = 0; t < c.trials; ++t) {
            const auto& o = obs[size_t(t)];
            r.rows.add(L, t, derive_seed(c.seed, std::uint64_t(L), std::uint64_t(t)), o.max_height, o.mean_height);
            ++hist[o.max_height];
            xs.push_back(o.max_height);
        }
        std::sort(xs.begin(), xs.end());
        const double median = xs.size() % 2 ? xs[xs.size() / 2] : 0.5 * (xs[xs.size() / 2 - 1] + xs[xs.size() / 2]);
        const int mode = std::max_element(hist.begin(), hist.end(), [](auto a, auto b) { return a.second < b.second; })->first;
        const auto [start, mass] = detail::best_two(hist);
        r.summary.add(L, c.trials, median, mode, start, mass, detail::histogram_text(hist));
    }
    return r;
}

/// Floored chains from the zero configuration; per trial the height histogram, modal level,
/// two-level fraction and macroscopic contour counts at levels 1 .. modal + 1.
[[nodiscard]] inline ExperimentReport run_floor_experiment(const ExperimentConfig& c) {
    c.validate();
    ExperimentReport r;
    r.name = "floor_plateau";
    r.rows.columns = {"L", "trial", "mean_height", "unfloored_mean", "modal_level", "modal_fraction",
                      "two_level_start", "two_level_fraction", "macroscopic_by_level", "negative_macroscopic", "histogram"};
    r.summary.columns = {"L", "trials", "mean_height", "unfloored_mean", "median_modal_level", "mean_two_level_fraction"};
    struct Trial {
        double mean = 0.0, unfloored = std::nan("");
        std::map<int, long long> hist;
        std::string macro;
        bool negative = false;
    };
    for (int L : c.L) {
        std::vector<Trial> res(size_t(c.trials));
        detail::run_indexed(c.trials, c.workers, [&](int t) {
            Trial& tr = res[size_t(t)];
            HeightConfig state;
            if (c.coupled) {
                ModelParams free = c.params;
                free.floor = false;
                const ChainSpec s = detail::chain_for(c, L, t, free);
                const PairedStream out = monotone_pair(s, HeightConfig(L, 0), HeightConfig(L, 0), c.params);
                state = out.upper_final;
                tr.unfloored = observe(out.lower_final, 0).mean_height;
            } else {
                const ChainSpec s = detail::chain_for(c, L, t, c.params);
                state = run_chain(s, HeightConfig(L, 0)).final_state;
            }
            tr.mean = observe(state, 0).mean_height;
            for (int v : state.data()) ++tr.hist[v];
            const int modal = std::max_element(tr.hist.begin(), tr.hist.end(), [](auto a, auto b) { return a.second < b.second; })->first;
            for (int h = 1; h <= modal + 1; ++h) {
                const AreaSummary a = area_statistics(extract_level_lines(state, h), L);
                tr.macro += (tr.macro.empty() ? "" : " ") + std::to_string(h) + ":" + std::to_string(a.n_macroscopic);
                tr.negative = tr.negative || a.has_negative_macroscopic;
            }
        });
        std::vector<int> modes;
        double sum_mean = 0.0, sum_free = 0.0, sum_two = 0.0;
        for (int t = 0; t < c.trials; ++t) {
            const Trial& tr = res[size_t(t)];
            const auto top = std::max_element(tr.hist.begin(), tr.hist.end(), [](auto a, auto b) { return a.second < b.second; });
            const double n = double(L) * double(L);
            const auto [start, two] = detail::best_two(tr.hist);
            r.rows.add(L, t, tr.mean, tr.unfloored, top->first, double(top->second) / n, start, two, tr.macro, tr.negative,
                       detail::histogram_text(tr.hist));
            modes.push_back(top->first);
            sum_mean += tr.mean;
            sum_free += tr.unfloored;
            sum_two += two;
        }
        std::sort(modes.begin(), modes.end());
        const double k = double(c.trials);
        r.summary.add(L, c.trials, sum_mean / k, sum_free / k, modes[modes.size() / 2], sum_two / k);
    }
    return r;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::vector<int> used;
};

/// Weighted least squares y = intercept + slope * x.
[[nodiscard]] inline SlopeFit weighted_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    if (x.size() < 2) throw DomainError("fit: at least two points are required");
    double sw = 0, sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) sw += w[i], sx += w[i] * x[i], sy += w[i] * y[i];
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) sxx += w[i] * (x[i] - mx) * (x[i] - mx), sxy += w[i] * (x[i] - mx) * (y[i] - my);
    if (!(sxx > 0)) throw DomainError("fit: degenerate abscissae");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.slope_se = std::sqrt(1.0 / sxx);
    return f;
}

/// Shape s(h) whose coefficient is the leading rate: h, h^p, h^2 / log h or h^2.
[[nodiscard]] inline double rate_shape(const Exponent& p, int h) {
    const double x = double(h);
    switch (p.kind()) {
        case Exponent::Kind::Linear: return x;
        case Exponent::Kind::Quadratic: return x * x / std::log(x);
        case Exponent::Kind::Infinite: return x * x;
        case Exponent::Kind::General: return p.value() < 2.0 ? std::pow(x, p.value()) : x * x;
    }
    return x;
}

struct LdpTailResult {
    ExperimentReport report;
    TailEstimate tail;
    SlopeFit fit;
};

/// Samples an unfloored chain, pools the chosen sites into an empirical tail and fits
/// -log tail(h) against the rate shape over [h_lo, h_hi], dropping levels never reached.
[[nodiscard]] inline LdpTailResult run_ldp_tail_experiment(const ExperimentConfig& c) {
    c.validate();
    const int L = c.L.front();
    TailAccumulator acc;
    for (int t = 0; t < c.trials; ++t) {
        ChainSpec s = detail::chain_for(c, L, t, c.params);
        s.sweeps_sample = c.sweeps;
        run_chain(s, HeightConfig::flat(L, c.params.boundary_height), [&](const SampleRecord& rec, const HeightConfig& state) {
            if (c.margin > 0)
                acc.add_bulk(state, c.margin);
            else
                acc.add(rec.center_height);
        });
    }
    LdpTailResult out;
    out.tail = acc.finish(c.params, c.margin > 0 ? "bulk sites, margin " + std::to_string(c.margin) : "centre site");
    ExperimentReport& r = out.report;
    r.name = "ldp_tail";
    r.rows.columns = {"h", "tail", "se", "neg_log_tail", "shape", "ratio_to_previous"};
    std::vector<double> xs, ys, ws;
    double prev = 1.0;
    const long long n = out.tail.samples;
    for (int h = c.h_lo; h <= c.h_hi; ++h) {
        const double q = out.tail.at(h);
        const double se = h >= out.tail.h_min && h <= out.tail.h_max() ? out.tail.se[size_t(h - out.tail.h_min)] : 0.0;
        const double shape = h >= 2 || c.params.p.kind() != Exponent::Kind::Quadratic ? rate_shape(c.params.p, h) : std::nan("");
        r.rows.add(h, q, se, -std::log(q), shape, prev > 0 ? q / prev : std::nan(""));
        prev = q;
        if (q > 0.0 && q < 1.0 && std::isfinite(shape)) {
            xs.push_back(shape);
            ys.push_back(-std::log(q));
            ws.push_back(double(n) * q / (1.0 - q));  // inverse delta-method variance of -log q
            out.fit.used.push_back(h);
        }
    }
    r.summary.columns = {"L", "samples", "slope", "slope_se", "intercept", "levels_used", "dropped"};
    std::string used, dropped;
    for (int h = c.h_lo; h <= c.h_hi; ++h) {
        const bool u = std::find(out.fit.used.begin(), out.fit.used.end(), h) != out.fit.used.end();
        (u ? used : dropped) += ((u ? used : dropped).empty() ? "" : " ") + std::to_string(h);
    }
    if (xs.size() >= 2) {
        const auto kept = out.fit.used;
        out.fit = weighted_fit(xs, ys, ws);
        out.fit.used = kept;
    } else {
        out.fit.slope = out.fit.intercept = out.fit.slope_se = std::nan("");
    }
    r.summary.add(L, n, out.fit.slope, out.fit.slope_se, out.fit.intercept, used, dropped);
    return out;
}

struct TileWindow {
    int h = 0;
    double tail = 0.0;
    double l_min = 0.0;  ///< (4 beta + 2) / tail
    double l_max = 0.0;  ///< (4 beta + 4) / tail
    double log_l_min = 0.0;
};

/// Side-length window (4 beta + 2) / pi(eta_0 >= h) <= l <= (4 beta + 4) / pi(eta_0 >= h).
[[nodiscard]] inline std::vector<TileWindow> check_tile_relation(double beta, int h_lo, int h_hi, const TailEstimate& tail) {
    if (!(beta > 0.0)) throw DomainError("tile relation: beta must be positive");
    std::vector<TileWindow> out;
    for (int h = h_lo; h <= h_hi; ++h) {
        TileWindow w;
        w.h = h;
        const double lq = tail.log_at(h);
        w.tail = std::exp(lq);
        w.log_l_min = std::log(4.0 * beta + 2.0) - lq;
        w.l_min = std::exp(w.log_l_min);
        w.l_max = std::exp(std::log(4.0 * beta + 4.0) - lq);
        out.push_back(w);
    }
    return out;
}

[[nodiscard]] inline ExperimentReport run_tile_experiment(const ExperimentConfig& c) {
    c.validate();
    RateTable rates{c.params.p, c.params.beta, c.c_p, c.c_low, c.c_high};
    const TailEstimate tail = analytic_tail_estimate(rates, c.params);
    ExperimentReport r;
    r.name = "tile_relation";
    r.rows.columns = {"h", "tail", "l_min", "l_max", "log_l_min"};
    for (const TileWindow& w : check_tile_relation(c.params.beta, std::max(c.h_lo, tail.h_min), c.h_hi, tail))
        r.rows.add(w.h, w.tail, w.l_min, w.l_max, w.log_l_min);
    r.summary.columns = {"beta", "levels"};
    r.summary.add(c.params.beta, r.rows.rows.size());
    return r;
}

[[nodiscard]] inline ExperimentReport run_experiment(const ExperimentConfig& c) {
    switch (c.kind) {
        case ExperimentKind::MaxHeight: return run_max_experiment(c);
        case ExperimentKind::FloorPlateau: return run_floor_experiment(c);
        case ExperimentKind::LdpTail: return run_ldp_tail_experiment(c).report;
        case ExperimentKind::TileRelation: return run_tile_experiment(c);
    }
    throw ConfigError("unknown experiment");
}

}  // namespace pinnacle
