#pragma once

// Integer height functions on an L x L box of Z^2 with a constant boundary
// height, and the p-power gradient Hamiltonian
//
//   H(eta) = sum_{x~y} |eta_x - eta_y|^p ,   p in [1, inf],
//
// where the sum runs over every bond with at least one endpoint in the box.
// p = inf is the restricted SOS model: gradients are confined to {0, +-1}
// and each non-flat bond costs 1.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pinnacle/error.hpp"

namespace pinnacle {

/// A point of Z^2. Box sites have 0 <= x, y < L; everything else is boundary.
struct Point {
    int x = 0;
    int y = 0;

    friend constexpr bool operator==(Point, Point) = default;
    friend constexpr auto operator<=>(Point, Point) = default;
};

inline constexpr Point kNeighborOffsets[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

[[nodiscard]] constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
[[nodiscard]] constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

[[nodiscard]] inline double norm(Point p) { return std::hypot(double(p.x), double(p.y)); }
[[nodiscard]] constexpr long long norm2(Point p) { return 1LL * p.x * p.x + 1LL * p.y * p.y; }

/// Gradient exponent p: a finite real >= 1 or infinity (RSOS).
class Exponent {
public:
    enum class Kind { Linear, Quadratic, General, Infinite };

    constexpr Exponent() = default;

    [[nodiscard]] static Exponent finite(double p) {
        if (!(p >= 1.0) || !std::isfinite(p))
            throw ConfigError("exponent p must be a finite real >= 1 or infinity, got " + std::to_string(p));
        Exponent e;
        e.value_ = p;
        e.kind_ = p == 1.0 ? Kind::Linear : p == 2.0 ? Kind::Quadratic : Kind::General;
        return e;
    }
    [[nodiscard]] static constexpr Exponent infinity() {
        Exponent e;
        e.value_ = std::numeric_limits<double>::infinity();
        e.kind_ = Kind::Infinite;
        return e;
    }

    /// Accepts a decimal number or one of "inf", "infinity", "INFINITY".
    [[nodiscard]] static Exponent parse(std::string_view text) {
        std::string s(text);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "inf" || s == "infinity") return infinity();
        double p = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), p);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw ConfigError("cannot parse exponent '" + std::string(text) + "'");
        return finite(p);
    }

    [[nodiscard]] constexpr bool is_infinite() const { return kind_ == Kind::Infinite; }
    [[nodiscard]] constexpr Kind kind() const { return kind_; }
    [[nodiscard]] constexpr double value() const { return value_; }

    /// Cost |d|^p of a single bond with height difference d.
    [[nodiscard]] double bond_cost(long long d) const {
        const long long a = d < 0 ? -d : d;
        switch (kind_) {
        case Kind::Linear: return double(a);
        case Kind::Quadratic: return double(a * a);
        case Kind::Infinite: return a == 0 ? 0.0 : 1.0;
        case Kind::General: return a == 0 ? 0.0 : std::pow(double(a), value_);
        }
        return 0.0;
    }

    [[nodiscard]] bool exact_integer() const { return kind_ != Kind::General; }

    friend bool operator==(const Exponent&, const Exponent&) = default;

private:
    double value_ = 2.0;
    Kind kind_ = Kind::Quadratic;
};

[[nodiscard]] inline std::string to_string(const Exponent& p) {
    if (p.is_infinite()) return "inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, p.value());
    return std::string(buf, res.ptr);
}

struct ModelParams {
    Exponent p = Exponent::finite(2.0);
    double beta = 1.0;
    bool floor = false;
    int boundary_height = 0;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw ConfigError("beta must be a positive finite number");
        if (floor && boundary_height < 0)
            throw ConfigError("a floored model needs boundary_height >= 0");
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Nearest-neighbour bond; either endpoint may lie outside the box.
struct Bond {
    Point a;
    Point b;

    [[nodiscard]] bool valid() const { return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1; }
    friend bool operator==(const Bond&, const Bond&) = default;
};

[[nodiscard]] inline std::string to_string(const Bond& b) {
    std::ostringstream os;
    os << "(" << b.a.x << "," << b.a.y << ")-(" << b.b.x << "," << b.b.y << ")";
    return os.str();
}

/// Heights on sites (0..L-1)^2, stored row-major with row index y.
class HeightConfig {
public:
    HeightConfig() = default;
    explicit HeightConfig(int L, int boundary_height = 0, int fill = 0)
        : L_(L), boundary_(boundary_height), heights_(size_t(checked_side(L)) * size_t(L), fill) {}

    [[nodiscard]] static HeightConfig flat(int L, int height) { return HeightConfig(L, height, height); }

    [[nodiscard]] int side() const { return L_; }
    [[nodiscard]] int boundary_height() const { return boundary_; }
    void set_boundary_height(int j) { boundary_ = j; }
    [[nodiscard]] size_t site_count() const { return heights_.size(); }

    [[nodiscard]] bool inside(Point p) const { return p.x >= 0 && p.y >= 0 && p.x < L_ && p.y < L_; }
    [[nodiscard]] size_t index(Point p) const { return size_t(p.y) * size_t(L_) + size_t(p.x); }
    [[nodiscard]] Point point(size_t i) const { return {int(i % size_t(L_)), int(i / size_t(L_))}; }

    /// Height at any point of Z^2; outside the box this is the boundary height.
    [[nodiscard]] int at(Point p) const { return inside(p) ? heights_[index(p)] : boundary_; }
    [[nodiscard]] int& operator[](Point p) { return heights_[index(p)]; }
    [[nodiscard]] int operator[](Point p) const { return heights_[index(p)]; }

    [[nodiscard]] std::vector<int>& data() { return heights_; }
    [[nodiscard]] const std::vector<int>& data() const { return heights_; }

    [[nodiscard]] Point center() const { return {L_ / 2, L_ / 2}; }

    friend bool operator==(const HeightConfig&, const HeightConfig&) = default;

private:
    static int checked_side(int L) {
        if (L <= 0) throw ConfigError("side length L must be positive");
        return L;
    }

    int L_ = 0;
    int boundary_ = 0;
    std::vector<int> heights_;
};

/// Visits every bond with at least one endpoint in the box exactly once.
template <class F>
void for_each_bond(int L, F&& f) {
    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            const Point p{x, y};
            f(Bond{p, {x + 1, y}});
            f(Bond{p, {x, y + 1}});
            if (x == 0) f(Bond{{-1, y}, p});
            if (y == 0) f(Bond{{x, -1}, p});
        }
    }
}

namespace detail {
inline void check_rsos_bond(const HeightConfig& c, const Bond& b, long long d) {
    if (d > 1 || d < -1)
        throw AdmissibilityError("RSOS gradient restriction violated on bond " + to_string(b) + ": |" +
                                 std::to_string(c.at(b.a)) + " - " + std::to_string(c.at(b.b)) + "| > 1");
}
}  // namespace detail

/// Throws AdmissibilityError naming the first violating bond, if any.
inline void check_admissible(const HeightConfig& config, const ModelParams& params) {
    if (params.floor) {
        for (size_t i = 0; i < config.site_count(); ++i)
            if (config.data()[i] < 0)
                throw AdmissibilityError("floor violated at site (" + std::to_string(config.point(i).x) + "," +
                                         std::to_string(config.point(i).y) + ")");
    }
    if (!params.p.is_infinite()) return;
    for_each_bond(config.side(), [&](const Bond& b) {
        detail::check_rsos_bond(config, b, (long long)config.at(b.a) - config.at(b.b));
    });
}

[[nodiscard]] inline bool is_admissible(const HeightConfig& config, const ModelParams& params) {
    try {
        check_admissible(config, params);
        return true;
    } catch (const AdmissibilityError&) {
        return false;
    }
}

/// Total energy sum_{x~y} |eta_x - eta_y|^p; for p = inf, the number of non-flat bonds.
[[nodiscard]] inline double hamiltonian(const HeightConfig& config, const ModelParams& params) {
    const Exponent& p = params.p;
    if (p.exact_integer()) {
        long long total = 0;
        for_each_bond(config.side(), [&](const Bond& b) {
            const long long d = (long long)config.at(b.a) - config.at(b.b);
            if (p.is_infinite()) detail::check_rsos_bond(config, b, d);
            total += (long long)p.bond_cost(d);
        });
        return double(total);
    }
    double total = 0.0;
    for_each_bond(config.side(), [&](const Bond& b) {
        total += p.bond_cost((long long)config.at(b.a) - config.at(b.b));
    });
    return total;
}

/// Sum of |new_height - eta_y|^p over the four neighbours y of site.
[[nodiscard]] inline double local_energy(const HeightConfig& config, Point site, long long height,
                                         const Exponent& p) {
    double e = 0.0;
    for (Point off : kNeighborOffsets) e += p.bond_cost(height - config.at(site + off));
    return e;
}

/// H(after) - H(before) for setting an interior site to new_height, from the incident bonds only.
[[nodiscard]] inline double energy_delta(const HeightConfig& config, Point site, int new_height,
                                         const ModelParams& params) {
    if (!config.inside(site)) throw DomainError("energy_delta: site outside the box");
    if (params.p.is_infinite()) {
        for (Point off : kNeighborOffsets) {
            const Point q = site + off;
            detail::check_rsos_bond(config, Bond{site, q}, (long long)new_height - config.at(q));
        }
    }
    const int old = config[site];
    if (params.p.exact_integer()) {
        long long d = 0;
        for (Point off : kNeighborOffsets) {
            const int nb = config.at(site + off);
            d += (long long)params.p.bond_cost((long long)new_height - nb) -
                 (long long)params.p.bond_cost((long long)old - nb);
        }
        return double(d);
    }
    return local_energy(config, site, new_height, params.p) - local_energy(config, site, old, params.p);
}

// Snapshot text format:
//   line 1: "L p beta floor boundary_height"
//   lines 2..L+1: L integers each, row y = 0 first.
// Floating fields use the shortest round-trip representation, so read(write(x)) == x bit for bit.

struct Snapshot {
    HeightConfig config;
    ModelParams params;
};

inline void write_snapshot(std::ostream& os, const HeightConfig& config, const ModelParams& params) {
    char beta[64];
    auto res = std::to_chars(beta, beta + sizeof beta, params.beta);
    os << config.side() << ' ' << to_string(params.p) << ' ' << std::string(beta, res.ptr) << ' '
       << (params.floor ? 1 : 0) << ' ' << config.boundary_height() << '\n';
    const int L = config.side();
    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            if (x) os << ' ';
            os << config[Point{x, y}];
        }
        os << '\n';
    }
}

[[nodiscard]] inline Snapshot read_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw ConfigError("snapshot: missing header line");
    std::istringstream hs(header);
    int L = 0, floor = 0, boundary = 0;
    std::string p_text, beta_text;
    if (!(hs >> L >> p_text >> beta_text >> floor >> boundary) || L <= 0 || (floor != 0 && floor != 1))
        throw ConfigError("snapshot: malformed header '" + header + "'");
    Snapshot snap;
    snap.params.p = Exponent::parse(p_text);
    auto [ptr, ec] = std::from_chars(beta_text.data(), beta_text.data() + beta_text.size(), snap.params.beta);
    if (ec != std::errc{} || ptr != beta_text.data() + beta_text.size())
        throw ConfigError("snapshot: bad beta '" + beta_text + "'");
    snap.params.floor = floor == 1;
    snap.params.boundary_height = boundary;
    snap.config = HeightConfig(L, boundary);
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x)
            if (!(is >> snap.config[Point{x, y}]))
                throw ConfigError("snapshot: expected " + std::to_string(L * L) + " heights");
    return snap;
}

}  // namespace pinnacle
