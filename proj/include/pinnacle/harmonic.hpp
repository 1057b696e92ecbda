#pragma once

// The real-valued pinnacle problem on the discrete ball B_r = {x : |x| <= r}:
//
//   I_r(h) = inf { sum_{x~y} (phi_x - phi_y)^2 : phi = 0 off B_r, phi_0 = h },
//
// whose minimiser is harmonic on B_r \ {0}. Also the hitting-time identity
// I_r(h) = 4 h^2 sum_x P_x(tau_0 < tau_out) / E_0 tau_out, the potential
// kernel a(x) of simple random walk, and the rounded integer pinnacle.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pinnacle/error.hpp"
#include "pinnacle/lattice.hpp"

namespace pinnacle {

/// kappa = gamma + (3/2) log 2, the constant term of the potential kernel expansion.
inline constexpr double kKappa = std::numbers::egamma + 1.5 * std::numbers::ln2;

/// Closed Euclidean ball B_r with its external boundary.
class DiscreteBall {
public:
    explicit DiscreteBall(double r) : r_(r) {
        if (!(r >= 1.0) || !std::isfinite(r)) throw DomainError("DiscreteBall: radius must be >= 1");
        reach_ = int(std::floor(r)) + 1;
        const int w = 2 * reach_ + 1;
        grid_.assign(size_t(w) * size_t(w), -1);
        const double r2 = r * r;
        for (int y = -reach_; y <= reach_; ++y)
            for (int x = -reach_; x <= reach_; ++x)
                if (double(norm2({x, y})) <= r2) {
                    grid_[slot({x, y})] = int(sites_.size());
                    sites_.push_back({x, y});
                }
        for (int y = -reach_; y <= reach_; ++y)
            for (int x = -reach_; x <= reach_; ++x) {
                const Point p{x, y};
                if (contains(p)) continue;
                for (Point off : kNeighborOffsets)
                    if (contains(p + off)) {
                        boundary_.push_back(p);
                        break;
                    }
            }
    }

    [[nodiscard]] double radius() const { return r_; }
    [[nodiscard]] const std::vector<Point>& sites() const { return sites_; }
    [[nodiscard]] const std::vector<Point>& boundary() const { return boundary_; }
    [[nodiscard]] size_t size() const { return sites_.size(); }

    /// Position of p in sites(), or -1 when p is not in the ball.
    [[nodiscard]] int index(Point p) const {
        if (std::abs(p.x) > reach_ || std::abs(p.y) > reach_) return -1;
        return grid_[slot(p)];
    }
    [[nodiscard]] bool contains(Point p) const { return index(p) >= 0; }
    [[nodiscard]] int origin_index() const { return index({0, 0}); }

private:
    [[nodiscard]] size_t slot(Point p) const {
        const int w = 2 * reach_ + 1;
        return size_t(p.y + reach_) * size_t(w) + size_t(p.x + reach_);
    }

    double r_;
    int reach_ = 0;
    std::vector<int> grid_;
    std::vector<Point> sites_;
    std::vector<Point> boundary_;
};

/// Real field on B_r (zero on the boundary and beyond) with phi_0 = h.
struct PinnacleProfile {
    DiscreteBall ball;
    std::vector<double> values;  ///< aligned with ball.sites()
    double peak = 0.0;
    double residual = 0.0;       ///< max |Laplacian| over B_r \ {0}

    [[nodiscard]] double operator()(Point p) const {
        const int i = ball.index(p);
        return i < 0 ? 0.0 : values[size_t(i)];
    }
};

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Max over free sites of |(1/4) sum_y f_y - f_x - source_x| for a field given on the ball.
template <class Field>
double laplacian_residual(const DiscreteBall& ball, const Field& f, bool skip_origin, double origin_source = 0.0) {
    double worst = 0.0;
    for (const Point& p : ball.sites()) {
        const bool is_origin = p == Point{0, 0};
        if (is_origin && skip_origin) continue;
        double s = 0.0;
        for (Point off : kNeighborOffsets) s += f(p + off);
        const double lap = 0.25 * s - f(p) - (is_origin ? origin_source : 0.0);
        worst = std::max(worst, std::abs(lap));
    }
    return worst;
}

inline Eigen::VectorXd solve_spd(const SparseMatrix& A, const Eigen::VectorXd& b, const char* what) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    ldlt.compute(A);
    if (ldlt.info() != Eigen::Success) throw SolverError(std::string(what) + ": factorisation failed", -1.0);
    Eigen::VectorXd x = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success) throw SolverError(std::string(what) + ": solve failed", -1.0);
    return x;
}

}  // namespace detail

/// Harmonic profile on B_r \ {0} with phi_0 = h and phi = 0 on the external boundary.
/// The linear system is solved directly; the max-norm Laplacian residual must not exceed tol.
inline PinnacleProfile solve_dirichlet(double r, double h, double tol = 1e-10) {
    if (!(tol > 0.0)) throw DomainError("solve_dirichlet: tol must be positive");
    DiscreteBall ball(r);
    const int origin = ball.origin_index();
    const int n = int(ball.size());
    // unknowns: every ball site except the origin
    std::vector<int> var(size_t(n), -1);
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (i != origin) var[size_t(i)] = m++;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(m) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
        if (i == origin) continue;
        const int row = var[size_t(i)];
        trip.emplace_back(row, row, 4.0);
        for (Point off : kNeighborOffsets) {
            const int k = ball.index(ball.sites()[size_t(i)] + off);
            if (k < 0) continue;
            if (k == origin)
                rhs[row] += 1.0;
            else
                trip.emplace_back(row, var[size_t(k)], -1.0);
        }
    }
    detail::SparseMatrix A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());

    std::vector<double> unit(size_t(n), 0.0);
    if (m > 0) {
        const Eigen::VectorXd x = detail::solve_spd(A, rhs, "solve_dirichlet");
        for (int i = 0; i < n; ++i)
            if (i != origin) unit[size_t(i)] = x[var[size_t(i)]];
    }
    unit[size_t(origin)] = 1.0;

    // linear in h: scale the unit-peak solution
    PinnacleProfile prof{std::move(ball), std::move(unit), h, 0.0};
    for (double& v : prof.values) v *= h;
    prof.residual = detail::laplacian_residual(prof.ball, prof, true);
    if (!(prof.residual <= tol * std::max(1.0, std::abs(h))))
        throw SolverError("solve_dirichlet: residual above tolerance", prof.residual);
    return prof;
}

/// D(phi) = sum of squared gradients over all bonds touching B_r (including bonds to the boundary).
[[nodiscard]] inline double dirichlet_energy(const PinnacleProfile& prof) {
    double e = 0.0;
    for (const Point& p : prof.ball.sites()) {
        const double v = prof(p);
        for (Point off : kNeighborOffsets) {
            const Point q = p + off;
            const bool q_in = prof.ball.contains(q);
            if (q_in && q < p) continue;  // interior bonds once
            const double d = v - prof(q);
            e += d * d;
        }
    }
    return e;
}

/// Leading-order closed form 2 pi h^2 / (log r + kappa).
[[nodiscard]] inline double asymptotic_I(double r, double h) {
    if (!(r > 1.0)) throw DomainError("asymptotic_I: r must exceed 1");
    return 2.0 * std::numbers::pi * h * h / (std::log(r) + kKappa);
}

struct ConductanceCheck {
    double direct = 0.0;        ///< D(phi) of the Dirichlet solution
    double identity = 0.0;      ///< 4 h^2 sum_x P_x(tau_0 < tau_out) / E_0 tau_out
    double hit_sum = 0.0;       ///< sum over B_r of P_x(tau_0 < tau_out)
    double exit_time = 0.0;     ///< E_0 tau_out
    double residual = 0.0;      ///< max residual of the exit-time equation
};

/// Expected exit time from B_r for simple random walk started at each site: (1/4) sum m_y - m_x = -1.
inline std::vector<double> exit_times(const DiscreteBall& ball, double tol = 1e-10, double* residual = nullptr) {
    const int n = int(ball.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(n) * 5);
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, 4.0);
        for (Point off : kNeighborOffsets) {
            const int k = ball.index(ball.sites()[size_t(i)] + off);
            if (k >= 0) trip.emplace_back(i, k, -1.0);
        }
    }
    detail::SparseMatrix A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    const Eigen::VectorXd x = detail::solve_spd(A, Eigen::VectorXd::Constant(n, 4.0), "exit_times");
    std::vector<double> m(x.data(), x.data() + n);
    auto field = [&](Point p) {
        const int i = ball.index(p);
        return i < 0 ? 0.0 : m[size_t(i)];
    };
    double worst = 0.0;
    for (const Point& p : ball.sites()) {
        double s = 0.0;
        for (Point off : kNeighborOffsets) s += field(p + off);
        worst = std::max(worst, std::abs(0.25 * s - field(p) + 1.0));
    }
    if (residual) *residual = worst;
    if (!(worst <= tol * std::max(1.0, m[size_t(ball.origin_index())])))
        throw SolverError("exit_times: residual above tolerance", worst);
    return m;
}

inline ConductanceCheck conductance_identity_check(double r, double h, double tol = 1e-10) {
    const PinnacleProfile unit = solve_dirichlet(r, 1.0, tol);
    ConductanceCheck out;
    out.direct = h * h * dirichlet_energy(unit);
    for (double v : unit.values) out.hit_sum += v;
    const std::vector<double> m = exit_times(unit.ball, tol, &out.residual);
    out.exit_time = m[size_t(unit.ball.origin_index())];
    out.identity = 4.0 * h * h * out.hit_sum / out.exit_time;
    return out;
}

/// max over 1 < |x| < r of |P_x(tau_out < tau_0) - (log|x| + kappa)/(log r + kappa)| * log r / (|x|^-2 + 1/r).
[[nodiscard]] inline double escape_formula_constant(const PinnacleProfile& unit) {
    const double r = unit.ball.radius();
    const double lr = std::log(r) + kKappa;
    double worst = 0.0;
    for (const Point& p : unit.ball.sites()) {
        const double d = norm(p);
        if (!(d > 1.0 && d < r)) continue;
        const double escape = 1.0 - unit(p) / unit.peak;
        const double dev = std::abs(escape - (std::log(d) + kKappa) / lr);
        worst = std::max(worst, dev * std::log(r) / (1.0 / (d * d) + 1.0 / r));
    }
    return worst;
}

/// Potential kernel on the square window |x|_inf <= R.
class KernelTable {
public:
    KernelTable(int R, std::vector<double> values, double residual, double source, double shift)
        : R_(R), values_(std::move(values)), residual_(residual), source_(source), shift_(shift) {}

    [[nodiscard]] int half_width() const { return R_; }
    [[nodiscard]] double operator()(Point p) const {
        if (std::abs(p.x) > R_ || std::abs(p.y) > R_) throw DomainError("KernelTable: point outside window");
        return values_[size_t(p.y + R_) * size_t(2 * R_ + 1) + size_t(p.x + R_)];
    }
    /// max |Laplacian| off the origin
    [[nodiscard]] double residual() const { return residual_; }
    /// Laplacian at the origin, (1/4) sum_{y~0} a(y)
    [[nodiscard]] double source() const { return source_; }
    /// constant subtracted so that a(0) = 0
    [[nodiscard]] double shift() const { return shift_; }

    /// Two-term expansion (2/pi)(log|x| + kappa).
    [[nodiscard]] static double expansion(Point p) { return 2.0 / std::numbers::pi * (std::log(norm(p)) + kKappa); }

private:
    int R_;
    std::vector<double> values_;
    double residual_;
    double source_;
    double shift_;
};

/// Solves Laplacian(a) = delta_0 inside the window with the expansion imposed on the window edge,
/// then shifts by a constant so a(0) = 0.
inline KernelTable potential_kernel(int R, double tol = 1e-10) {
    if (R < 8) throw DomainError("potential_kernel: half-width must be >= 8");
    const int w = 2 * R + 1;
    auto slot = [&](Point p) { return size_t(p.y + R) * size_t(w) + size_t(p.x + R); };
    auto on_edge = [&](Point p) { return std::abs(p.x) == R || std::abs(p.y) == R; };
    const int inner = 2 * R - 1;
    auto var = [&](Point p) { return (p.y + R - 1) * inner + (p.x + R - 1); };
    const int m = inner * inner;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(m) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int y = -R + 1; y < R; ++y)
        for (int x = -R + 1; x < R; ++x) {
            const Point p{x, y};
            const int row = var(p);
            trip.emplace_back(row, row, 4.0);
            for (Point off : kNeighborOffsets) {
                const Point q = p + off;
                if (on_edge(q))
                    rhs[row] += KernelTable::expansion(q);
                else
                    trip.emplace_back(row, var(q), -1.0);
            }
            if (x == 0 && y == 0) rhs[row] -= 4.0;  // unit source
        }
    detail::SparseMatrix A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    const Eigen::VectorXd sol = detail::solve_spd(A, rhs, "potential_kernel");

    std::vector<double> a(size_t(w) * size_t(w));
    for (int y = -R; y <= R; ++y)
        for (int x = -R; x <= R; ++x) {
            const Point p{x, y};
            a[slot(p)] = on_edge(p) ? KernelTable::expansion(p) : sol[var(p)];
        }
    const double shift = a[slot({0, 0})];
    for (double& v : a) v -= shift;

    auto at = [&](Point p) { return a[slot(p)]; };
    double worst = 0.0, source = 0.0;
    for (int y = -R + 1; y < R; ++y)
        for (int x = -R + 1; x < R; ++x) {
            const Point p{x, y};
            double s = 0.0;
            for (Point off : kNeighborOffsets) s += at(p + off);
            const double lap = 0.25 * s - at(p);
            if (x == 0 && y == 0)
                source = lap;
            else
                worst = std::max(worst, std::abs(lap));
        }
    if (!(worst <= tol) || !(std::abs(source - 1.0) <= tol))
        throw SolverError("potential_kernel: residual above tolerance", std::max(worst, std::abs(source - 1.0)));
    return KernelTable(R, std::move(a), worst, source, shift);
}

/// Integer pinnacle obtained by rounding the harmonic profile, zero wherever phi < 1.
struct IntegerPinnacle {
    std::vector<std::pair<Point, int>> support;  ///< sites with positive height
    double support_radius = 0.0;                 ///< max |x| over the support
    long long energy = 0;                        ///< exact sum of squared gradients

    /// Embeds the pinnacle centred in an L x L box with boundary 0.
    [[nodiscard]] HeightConfig to_config(int L) const {
        HeightConfig c(L, 0);
        const Point ctr = c.center();
        for (auto [p, v] : support) {
            const Point q = p + ctr;
            if (!c.inside(q)) throw DomainError("IntegerPinnacle: box too small for the support");
            c[q] = v;
        }
        return c;
    }
};

inline IntegerPinnacle round_profile(const PinnacleProfile& prof) {
    IntegerPinnacle out;
    const auto& ball = prof.ball;
    std::vector<int> z(ball.size(), 0);
    for (size_t i = 0; i < ball.size(); ++i) {
        const double v = prof.values[i];
        z[i] = v < 1.0 ? 0 : int(std::lround(v));
        if (z[i] > 0) {
            out.support.emplace_back(ball.sites()[i], z[i]);
            out.support_radius = std::max(out.support_radius, norm(ball.sites()[i]));
        }
    }
    auto height = [&](Point p) {
        const int i = ball.index(p);
        return i < 0 ? 0 : z[size_t(i)];
    };
    for (const Point& p : ball.sites())
        for (Point off : kNeighborOffsets) {
            const Point q = p + off;
            if (ball.contains(q) && q < p) continue;
            const long long d = height(p) - height(q);
            out.energy += d * d;
        }
    return out;
}

}  // namespace pinnacle
