#pragma once

// Minimisation of E(phi) = sum_{x~y} |phi_x - phi_y|^p over fields on B_R with
// phi_0 = 1 and phi = 0 off B_R, and the energy of nested dual circuit families.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pinnacle/dual.hpp"
#include "pinnacle/error.hpp"
#include "pinnacle/harmonic.hpp"

namespace pinnacle {

enum class PMethod { Newton, CoordinateDescent };

struct PMinimizer {
    double p = 2.0;
    DiscreteBall ball;
    std::vector<double> values;  ///< aligned with ball.sites(); the origin holds 1
    double energy = 0.0;
    double residual = 0.0;       ///< max over free sites of |phi_x - argmin_t sum_y |t - phi_y|^p|
    int iterations = 0;

    [[nodiscard]] double operator()(Point q) const {
        const int i = ball.index(q);
        return i < 0 ? 0.0 : values[size_t(i)];
    }
};

namespace detail {

/// Minimiser of t -> sum_k |t - a_k|^p by bisection on the increasing derivative.
inline double site_minimum(const std::array<double, 4>& a, double p) {
    double lo = *std::min_element(a.begin(), a.end());
    double hi = *std::max_element(a.begin(), a.end());
    for (int it = 0; it < 60; ++it) {
        const double t = 0.5 * (lo + hi);
        double d = 0.0;
        for (double v : a) d += std::copysign(std::pow(std::abs(t - v), p - 1.0), t - v);
        (d > 0.0 ? hi : lo) = t;
    }
    return 0.5 * (lo + hi);
}

/// Flattened neighbour table of a ball: -1 marks a site off the ball.
struct BallGraph {
    const DiscreteBall* ball;
    std::vector<std::array<int, 4>> nbr;
    int origin;

    explicit BallGraph(const DiscreteBall& b) : ball(&b), nbr(b.size()), origin(b.origin_index()) {
        for (size_t i = 0; i < b.size(); ++i)
            for (int k = 0; k < 4; ++k) nbr[i][size_t(k)] = b.index(b.sites()[i] + kNeighborOffsets[k]);
    }

    [[nodiscard]] double energy(const std::vector<double>& v, double p) const {
        double e = 0.0;
        for (size_t i = 0; i < v.size(); ++i)
            for (int k = 0; k < 4; ++k) {
                const int j = nbr[i][size_t(k)];
                if (j >= 0 && size_t(j) < i) continue;
                e += std::pow(std::abs(v[i] - (j < 0 ? 0.0 : v[size_t(j)])), p);
            }
        return e;
    }

    [[nodiscard]] double site_gradient(const std::vector<double>& v, size_t i, double p) const {
        double g = 0.0;
        for (int j : nbr[i]) {
            const double d = v[i] - (j < 0 ? 0.0 : v[size_t(j)]);
            g += p * std::copysign(std::pow(std::abs(d), p - 1.0), d);
        }
        return g;
    }

    /// Largest distance between a free value and its one-site optimum given the neighbours.
    [[nodiscard]] double max_displacement(const std::vector<double>& v, double p) const {
        double r = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            if (int(i) == origin) continue;
            std::array<double, 4> a{};
            for (int k = 0; k < 4; ++k) a[size_t(k)] = nbr[i][size_t(k)] < 0 ? 0.0 : v[size_t(nbr[i][size_t(k)])];
            r = std::max(r, std::abs(v[i] - site_minimum(a, p)));
        }
        return r;
    }
};

/// Newton's method on the smoothed energy sum (d^2 + eps^2)^{p/2}, with eps lowered by
/// decades from 0.1 to 1e-12 and each stage warm-started from the last.
inline void newton_solve(PMinimizer& m, const BallGraph& g, double tol, int max_iter) {
    const double p = m.p;
    const size_t n = m.values.size();
    std::vector<int> var(n, -1);
    int nv = 0;
    for (size_t i = 0; i < n; ++i)
        if (int(i) != g.origin) var[i] = nv++;

    auto diff = [&](const std::vector<double>& v, size_t i, int j) { return v[i] - (j < 0 ? 0.0 : v[size_t(j)]); };
    auto smoothed = [&](const std::vector<double>& v, double eps) {
        const double e2 = eps * eps, base = std::pow(eps, p);
        double e = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (int j : g.nbr[i]) {
                if (j >= 0 && size_t(j) < i) continue;
                const double d = diff(v, i, j);
                e += std::pow(d * d + e2, 0.5 * p) - base;
            }
        return e;
    };

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analysed = false;
    int total = 0;
    for (double eps = 0.1; eps >= 0.99e-12; eps *= 0.1) {
        const double e2 = eps * eps;
        double energy = smoothed(m.values, eps);
        for (;;) {
            if (total >= max_iter) {
                m.residual = g.max_displacement(m.values, p);
                throw SolverError("minimize_p_energy: iteration cap reached", m.residual);
            }
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(nv);
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(size_t(nv) * 5);
            for (size_t i = 0; i < n; ++i) {
                if (var[i] < 0) continue;
                double diag = 0.0;
                for (int j : g.nbr[i]) {
                    const double d = diff(m.values, i, j);
                    const double s = d * d + e2;
                    grad[var[i]] += p * d * std::pow(s, 0.5 * p - 1.0);
                    const double w = p * std::pow(s, 0.5 * p - 2.0) * ((p - 1.0) * d * d + e2);
                    diag += w;
                    if (j >= 0 && var[size_t(j)] >= 0) trip.emplace_back(var[i], var[size_t(j)], -w);
                }
                trip.emplace_back(var[i], var[i], diag);
            }
            Eigen::SparseMatrix<double> H(nv, nv);
            H.setFromTriplets(trip.begin(), trip.end());
            if (!analysed) ldlt.analyzePattern(H), analysed = true;
            ldlt.factorize(H);
            if (ldlt.info() != Eigen::Success)
                throw SolverError("minimize_p_energy: Hessian factorisation failed", grad.lpNorm<Eigen::Infinity>());
            const Eigen::VectorXd step = ldlt.solve(grad);
            const double decrement = grad.dot(step);
            ++total;
            if (!(decrement > 1e-28)) break;

            double t = 1.0;
            std::vector<double> trial(m.values);
            bool accepted = false;
            for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
                for (size_t i = 0; i < n; ++i)
                    if (var[i] >= 0) trial[i] = m.values[i] - t * step[var[i]];
                const double e = smoothed(trial, eps);
                if (e <= energy - 1e-4 * t * decrement) {
                    m.values.swap(trial);
                    energy = e;
                    accepted = true;
                    break;
                }
            }
            if (!accepted || t * step.lpNorm<Eigen::Infinity>() < 1e-15) break;
        }
    }
    m.iterations = total;
    m.residual = g.max_displacement(m.values, p);
    if (!(m.residual <= tol)) throw SolverError("minimize_p_energy: optimality residual above tolerance", m.residual);
}

inline void coordinate_descent(PMinimizer& m, const BallGraph& g, double tol, int max_sweeps) {
    const double p = m.p;
    const size_t n = m.values.size();
    // two-colour order: no two neighbours in the same half-sweep
    std::vector<size_t> order;
    for (int parity = 0; parity < 2; ++parity)
        for (size_t i = 0; i < n; ++i) {
            const Point q = m.ball.sites()[i];
            if (int(i) != g.origin && (((q.x + q.y) % 2) + 2) % 2 == parity) order.push_back(i);
        }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (size_t i : order) {
            std::array<double, 4> a{};
            for (int k = 0; k < 4; ++k) {
                const int j = g.nbr[i][size_t(k)];
                a[size_t(k)] = j < 0 ? 0.0 : m.values[size_t(j)];
            }
            m.values[i] = site_minimum(a, p);
        }
        m.iterations = sweep + 1;
        m.residual = g.max_displacement(m.values, p);
        if (m.residual <= tol) return;
    }
    throw SolverError("minimize_p_energy: sweep cap reached", m.residual);
}

}  // namespace detail

/// Minimises the p-energy on B_R. The residual is the largest distance between a free value
/// and the exact one-site minimiser given its neighbours.
inline PMinimizer minimize_p_energy(double p, double R, double tol = 1e-9, PMethod method = PMethod::Newton,
                                    int max_iter = 0) {
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("minimize_p_energy: p must lie in (1, inf)");
    if (!(R >= 4.0)) throw DomainError("minimize_p_energy: R must be >= 4");
    if (!(tol > 0.0)) throw DomainError("minimize_p_energy: tol must be positive");
    // start from the radial profile 1 - log(1 + |x|) / log(R + 2)
    DiscreteBall ball(R);
    std::vector<double> start(ball.size());
    for (size_t i = 0; i < ball.size(); ++i) start[i] = 1.0 - std::log1p(norm(ball.sites()[i])) / std::log(R + 2.0);
    PMinimizer m{p, std::move(ball), std::move(start)};
    const detail::BallGraph g(m.ball);
    if (method == PMethod::Newton)
        detail::newton_solve(m, g, tol, max_iter > 0 ? max_iter : 500);
    else
        detail::coordinate_descent(m, g, tol, max_iter > 0 ? max_iter : 200000);
    m.energy = g.energy(m.values, p);
    return m;
}

/// Energy of an arbitrary field on the minimiser's ball (zero outside).
[[nodiscard]] inline double p_energy(const DiscreteBall& ball, const std::vector<double>& values, double p) {
    if (values.size() != ball.size()) throw DomainError("p_energy: field size does not match the ball");
    return detail::BallGraph(ball).energy(values, p);
}

/// Nested dual circuits gamma_1 (outermost) ... gamma_h (innermost), all around the origin.
struct NestedContourFamily {
    std::vector<std::vector<DualEdge>> circuits;

    [[nodiscard]] size_t depth() const { return circuits.size(); }
    [[nodiscard]] size_t total_length() const {
        size_t s = 0;
        for (const auto& c : circuits) s += c.size();
        return s;
    }
};

/// Checks that every circuit is closed and surrounds the origin and that interiors decrease.
inline void validate(const NestedContourFamily& family) {
    std::vector<Point> outer;
    for (size_t i = 0; i < family.circuits.size(); ++i) {
        const auto& c = family.circuits[i];
        const std::string tag = "circuit " + std::to_string(i + 1);
        if (c.size() < 4) throw ValidityError(tag + " has fewer than four edges");
        std::vector<std::uint64_t> keys;
        for (const DualEdge& e : c) keys.push_back(e.key());
        std::sort(keys.begin(), keys.end());
        if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) throw ValidityError(tag + " repeats an edge");
        for (size_t k = 0; k < c.size(); ++k) {
            const auto a = endpoints(c[k]), b = endpoints(c[(k + 1) % c.size()]);
            if (a[0] != b[0] && a[0] != b[1] && a[1] != b[0] && a[1] != b[1])
                throw ValidityError(tag + " is not connected at edge " + std::to_string(k));
        }
        const std::vector<Point> inside = enclosed_sites(c);
        if (!std::binary_search(inside.begin(), inside.end(), Point{0, 0}))
            throw ValidityError(tag + " does not surround the origin");
        // every edge must separate the interior from the exterior
        for (const DualEdge& e : c)
            if (std::binary_search(inside.begin(), inside.end(), e.first()) ==
                std::binary_search(inside.begin(), inside.end(), e.second()))
                throw ValidityError(tag + " is not a simple circuit");
        if (i > 0 && !std::includes(outer.begin(), outer.end(), inside.begin(), inside.end()))
            throw ValidityError(tag + " is not nested inside circuit " + std::to_string(i));
        outer = inside;
    }
}

/// sum over dual edges of Delta_e^p, Delta_e = number of circuits using e.
[[nodiscard]] inline double nested_energy(const NestedContourFamily& family, double p) {
    if (!(p >= 1.0)) throw DomainError("nested_energy: p must be >= 1");
    validate(family);
    std::vector<std::uint64_t> keys;
    for (const auto& c : family.circuits)
        for (const DualEdge& e : c) keys.push_back(e.key());
    std::sort(keys.begin(), keys.end());
    double e = 0.0;
    for (size_t i = 0; i < keys.size();) {
        size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        e += std::pow(double(j - i), p);
        i = j;
    }
    return e;
}

/// Squares of half-widths h-1, ..., 0 around the origin: disjoint circuits of lengths 8j + 4.
[[nodiscard]] inline NestedContourFamily pyramid_family(int h) {
    NestedContourFamily f;
    for (int j = h - 1; j >= 0; --j) f.circuits.push_back(rectangle_circuit(-j, -j, j, j));
    return f;
}

struct NestedProbeResult {
    NestedContourFamily family;
    std::vector<std::pair<int, int>> half_widths;  ///< (a_i, b_i): circuit i surrounds [-a_i, a_i] x [-b_i, b_i]
    double energy = 0.0;
    double ratio = 0.0;  ///< energy / h^2
    bool exhaustive = false;
    std::uint64_t evaluated = 0;
};

namespace detail {

/// Energy of centred rectangles from their half-widths; equal sides overlap on the shorter span.
inline double rectangle_family_energy(const std::vector<int>& a, const std::vector<int>& b, double p) {
    const size_t h = a.size();
    double e = 0.0;
    // vertical sides: at column offset a_i (and -a_i-1), rows [-b_i, b_i]. Nested => spans are nested too.
    auto side_energy = [&](const std::vector<int>& pos, const std::vector<int>& span) {
        double s = 0.0;
        for (size_t i = 0; i < h;) {
            size_t j = i;
            while (j < h && pos[j] == pos[i]) ++j;
            // circuits i..j-1 share the line; spans are non-increasing
            for (size_t k = i; k < j; ++k) {
                const int width = 2 * span[k] + 1 - (k + 1 < j ? 2 * span[k + 1] + 1 : 0);
                s += double(width) * std::pow(double(k - i + 1), p);
            }
            i = j;
        }
        return 2.0 * s;  // both opposite sides
    };
    e += side_energy(a, b);
    e += side_energy(b, a);
    return e;
}

inline bool next_monotone(std::vector<int>& v, int top) {
    // non-increasing sequences with entries in [0, top], enumerated in lexicographic order
    for (size_t i = v.size(); i-- > 0;) {
        const int cap = i == 0 ? top : v[i - 1];
        if (v[i] < cap) {
            ++v[i];
            for (size_t k = i + 1; k < v.size(); ++k) v[k] = 0;
            return true;
        }
    }
    return false;
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

}  // namespace detail

/// Searches nested centred rectangles (half-widths bounded by 2h) for the least nested energy.
/// Exhaustive when the search space fits the budget, otherwise a seeded local search.
inline NestedProbeResult probe_nested_lower_bound(int h, double p, std::uint64_t search_budget = 2'000'000,
                                                  std::uint64_t seed = 1) {
    if (h < 1 || h > 12) throw DomainError("probe_nested_lower_bound: h must be in 1..12");
    if (!(p >= 1.0)) throw DomainError("probe_nested_lower_bound: p must be >= 1");
    const int top = 2 * h;
    NestedProbeResult best;
    std::vector<int> ba(static_cast<size_t>(h)), bb(static_cast<size_t>(h));
    for (int i = 0; i < h; ++i) ba[size_t(i)] = bb[size_t(i)] = h - 1 - i;
    best.energy = detail::rectangle_family_energy(ba, bb, p);

    const double per_axis = detail::binomial(top + h, h);
    if (per_axis * per_axis <= double(search_budget)) {
        best.exhaustive = true;
        std::vector<int> a(size_t(h), 0);
        do {
            std::vector<int> b(size_t(h), 0);
            do {
                ++best.evaluated;
                const double e = detail::rectangle_family_energy(a, b, p);
                if (e < best.energy - 1e-12) best.energy = e, ba = a, bb = b;
            } while (detail::next_monotone(b, top));
        } while (detail::next_monotone(a, top));
    } else {
        std::mt19937_64 rng(seed);
        std::vector<int> a = ba, b = bb;
        double cur = best.energy;
        while (best.evaluated < search_budget) {
            std::vector<int> na = a, nb = b;
            auto& v = (rng() & 1) ? na : nb;
            const size_t i = size_t(rng() % std::uint64_t(h));
            v[i] += (rng() & 1) ? 1 : -1;
            const bool ok = v[i] >= 0 && v[i] <= top && (i == 0 || v[i] <= v[i - 1]) && (i + 1 == v.size() || v[i] >= v[i + 1]);
            if (!ok) continue;
            ++best.evaluated;
            const double e = detail::rectangle_family_energy(na, nb, p);
            // occasional uphill moves let the walk leave shallow basins
            if (e <= cur || (rng() % 64) == 0) a = na, b = nb, cur = e;
            if (e < best.energy - 1e-12) best.energy = e, ba = na, bb = nb;
        }
    }
    for (int i = 0; i < h; ++i) {
        best.half_widths.emplace_back(ba[size_t(i)], bb[size_t(i)]);
        best.family.circuits.push_back(rectangle_circuit(-ba[size_t(i)], -bb[size_t(i)], ba[size_t(i)], bb[size_t(i)]));
    }
    best.ratio = best.energy / (double(h) * double(h));
    return best;
}

}  // namespace pinnacle
