#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "pinnacle/harmonic.hpp"
#include "pinnacle/pvar.hpp"

using namespace pinnacle;

TEST(SiteMinimum, MatchesGridSearch) {
    std::mt19937_64 eng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double p : {1.2, 1.5, 2.0, 3.0, 5.0}) {
        for (int trial = 0; trial < 50; ++trial) {
            const std::array<double, 4> a{u(eng), u(eng), u(eng), u(eng)};
            const double t = detail::site_minimum(a, p);
            auto f = [&](double x) {
                double s = 0;
                for (double v : a) s += std::pow(std::abs(x - v), p);
                return s;
            };
            double best = 0.0, fb = 1e300;
            for (int k = 0; k <= 100000; ++k) {
                const double x = k * 1e-5;
                if (f(x) < fb) fb = f(x), best = x;
            }
            EXPECT_NEAR(t, best, 2e-5);
        }
    }
    EXPECT_NEAR(detail::site_minimum({0.0, 0.0, 1.0, 1.0}, 2.0), 0.5, 1e-12);
}

TEST(PMinimizer, QuadraticMatchesHarmonic) {
    const PMinimizer m = minimize_p_energy(2.0, 20.0);
    const double I = dirichlet_energy(solve_dirichlet(20.0, 1.0));
    EXPECT_NEAR(m.energy / I, 1.0, 1e-6);
}

TEST(PMinimizer, Invariants) {
    for (double p : {1.3, 1.5, 2.5, 3.0}) {
        const PMinimizer m = minimize_p_energy(p, 12.0, 1e-9);
        EXPECT_LE(m.residual, 1e-9);
        EXPECT_EQ(m(Point{0, 0}), 1.0);
        for (double v : m.values) {
            EXPECT_GE(v, -1e-12);
            EXPECT_LE(v, 1.0 + 1e-12);
        }
        EXPECT_TRUE(std::isfinite(m.energy));
        EXPECT_NEAR(p_energy(m.ball, m.values, p), m.energy, 1e-12);
        // sign flip leaves the energy unchanged
        std::vector<double> neg = m.values;
        for (double& v : neg) v = -v;
        EXPECT_NEAR(p_energy(m.ball, neg, p), m.energy, 1e-12);
    }
}

TEST(PMinimizer, LocalPerturbationsDoNotLowerEnergy) {
    std::mt19937_64 eng(3);
    for (double p : {1.5, 3.0}) {
        const PMinimizer m = minimize_p_energy(p, 8.0, 1e-11);
        const int o = m.ball.origin_index();
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> v = m.values;
            const size_t i = eng() % v.size();
            if (int(i) == o) continue;
            v[i] += ((eng() & 1) ? 1 : -1) * 1e-3;
            EXPECT_GE(p_energy(m.ball, v, p), m.energy - 1e-12);
        }
    }
}

TEST(PMinimizer, NewtonAgreesWithCoordinateDescent) {
    for (double p : {1.5, 2.5}) {
        const PMinimizer a = minimize_p_energy(p, 6.0, 1e-10, PMethod::Newton);
        const PMinimizer b = minimize_p_energy(p, 6.0, 1e-10, PMethod::CoordinateDescent);
        EXPECT_NEAR(a.energy, b.energy, 1e-8);
        for (size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-7);
    }
}

TEST(PMinimizer, SubquadraticEnergyDecreasesAndSettles) {
    const double e25 = minimize_p_energy(1.5, 25).energy;
    const double e50 = minimize_p_energy(1.5, 50).energy;
    const double e100 = minimize_p_energy(1.5, 100).energy;
    EXPECT_GT(e25, e50);
    EXPECT_GT(e50, e100);
    EXPECT_LT(e50 - e100, e25 - e50);
}

TEST(PMinimizer, RejectsBadInput) {
    EXPECT_THROW((void)minimize_p_energy(1.0, 10), DomainError);
    EXPECT_THROW((void)minimize_p_energy(INFINITY, 10), DomainError);
    EXPECT_THROW((void)minimize_p_energy(2.0, 2), DomainError);
}

TEST(Nested, ElementaryFamilies) {
    NestedContourFamily unit{{rectangle_circuit(0, 0, 0, 0)}};
    for (double p : {1.0, 2.0, 7.5}) EXPECT_EQ(nested_energy(unit, p), 4.0);
    for (int h = 1; h <= 6; ++h) {
        const NestedContourFamily f = pyramid_family(h);
        EXPECT_EQ(f.total_length(), size_t(4 * h * h));
        EXPECT_EQ(nested_energy(f, 3.0), 4.0 * h * h);
    }
    const auto sq = rectangle_circuit(-1, -1, 1, 1);
    for (int h = 1; h <= 4; ++h) {
        NestedContourFamily f;
        for (int i = 0; i < h; ++i) f.circuits.push_back(sq);
        EXPECT_NEAR(nested_energy(f, 2.5), 12.0 * std::pow(h, 2.5), 1e-9);
    }
}

TEST(Nested, ValidationRejectsBadFamilies) {
    NestedContourFamily off{{rectangle_circuit(2, 2, 3, 3)}};
    EXPECT_THROW(validate(off), ValidityError);
    NestedContourFamily inverted{{rectangle_circuit(0, 0, 0, 0), rectangle_circuit(-1, -1, 1, 1)}};
    EXPECT_THROW(validate(inverted), ValidityError);
    auto broken = rectangle_circuit(-1, -1, 1, 1);
    broken.pop_back();
    EXPECT_THROW(validate(NestedContourFamily{{broken}}), ValidityError);
    auto twice = rectangle_circuit(-1, -1, 1, 1);
    twice.push_back(twice.front());
    EXPECT_THROW(validate(NestedContourFamily{{twice}}), ValidityError);
}

TEST(Nested, ProbeFindsPyramidAtLargeP) {
    const NestedProbeResult r = probe_nested_lower_bound(4, 20.0);
    EXPECT_TRUE(r.exhaustive);
    EXPECT_EQ(r.energy, 64.0);
    EXPECT_NO_THROW(validate(r.family));
    EXPECT_EQ(nested_energy(r.family, 20.0), r.energy);
    EXPECT_EQ(probe_nested_lower_bound(1, 3.0).energy, 4.0);
}

TEST(Nested, RatioBoundedBelow) {
    for (double p : {2.5, 3.0, 4.0})
        for (int h = 1; h <= 12; ++h) {
            const NestedProbeResult r = probe_nested_lower_bound(h, p, 100000);
            EXPECT_GE(r.ratio, 1.0) << "h=" << h << " p=" << p;
            EXPECT_NEAR(nested_energy(r.family, p), r.energy, 1e-9 * r.energy);
        }
}
