#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "pinnacle/lattice.hpp"
#include "support.hpp"

using namespace pinnacle;

namespace {

ModelParams model(const char* p, double beta = 1.0) {
    ModelParams m;
    m.p = Exponent::parse(p);
    m.beta = beta;
    return m;
}

}  // namespace

TEST(Exponent, ParsesFiniteAndInfinite) {
    EXPECT_EQ(Exponent::parse("1").kind(), Exponent::Kind::Linear);
    EXPECT_EQ(Exponent::parse("2").kind(), Exponent::Kind::Quadratic);
    EXPECT_EQ(Exponent::parse("1.5").kind(), Exponent::Kind::General);
    EXPECT_TRUE(Exponent::parse("inf").is_infinite());
    EXPECT_TRUE(Exponent::parse("INFINITY").is_infinite());
    EXPECT_THROW((void)Exponent::parse("0.5"), ConfigError);
    EXPECT_THROW((void)Exponent::parse("abc"), ConfigError);
    EXPECT_THROW((void)Exponent::parse("2x"), ConfigError);
}

TEST(Exponent, BondCosts) {
    EXPECT_EQ(Exponent::parse("1").bond_cost(-3), 3.0);
    EXPECT_EQ(Exponent::parse("2").bond_cost(-3), 9.0);
    EXPECT_EQ(Exponent::parse("inf").bond_cost(1), 1.0);
    EXPECT_EQ(Exponent::parse("inf").bond_cost(0), 0.0);
    EXPECT_NEAR(Exponent::parse("1.5").bond_cost(4), 8.0, 1e-12);
}

TEST(ModelParams, Validation) {
    ModelParams m;
    m.beta = 0.0;
    EXPECT_THROW(m.validate(), ConfigError);
    m.beta = 1.0;
    m.floor = true;
    m.boundary_height = -1;
    EXPECT_THROW(m.validate(), ConfigError);
    m.boundary_height = 0;
    EXPECT_NO_THROW(m.validate());
}

TEST(Bonds, EveryBondVisitedOnceWithUnitLength) {
    for (int L = 1; L <= 6; ++L) {
        int count = 0;
        std::set<std::pair<Point, Point>> seen;
        for_each_bond(L, [&](const Bond& b) {
            EXPECT_TRUE(b.valid());
            auto key = std::minmax(b.a, b.b);
            EXPECT_TRUE(seen.insert(key).second);
            ++count;
        });
        EXPECT_EQ(count, 2 * L * (L + 1));
    }
}

TEST(Hamiltonian, Examples) {
    HeightConfig c(5, 0);
    EXPECT_EQ(hamiltonian(c, model("2")), 0.0);
    EXPECT_EQ(hamiltonian(c, model("1")), 0.0);
    c[{2, 2}] = 1;
    EXPECT_EQ(hamiltonian(c, model("2")), 4.0);
    c[{2, 2}] = 7;
    EXPECT_EQ(hamiltonian(c, model("2")), 4.0 * 49);
}

TEST(Hamiltonian, RsosRejectsSteepBonds) {
    HeightConfig c(3, 0);
    c[{1, 1}] = 2;
    EXPECT_THROW(check_admissible(c, model("inf")), AdmissibilityError);
    EXPECT_FALSE(is_admissible(c, model("inf")));
    c[{0, 0}] = 2;  // boundary pair
    c[{1, 1}] = 0;
    EXPECT_FALSE(is_admissible(c, model("inf")));
}

TEST(EnergyDelta, Examples) {
    HeightConfig c(5, 0);
    const Point o{2, 2};
    EXPECT_EQ(energy_delta(c, o, 1, model("2")), 4.0);
    c[o] = 2;
    EXPECT_EQ(energy_delta(c, o, 1, model("2")), -12.0);
    HeightConfig z(5, 0);
    EXPECT_EQ(energy_delta(z, o, 2, model("2")), 16.0);

    HeightConfig f(5, 0);
    for (Point off : kNeighborOffsets) f[o + off] = 3;
    f[o] = 3;
    for (const char* p : {"1", "2", "1.5"}) EXPECT_EQ(energy_delta(f, o, 3, model(p)), 0.0);
}

TEST(EnergyDelta, MatchesFullRecomputation) {
    gen::Gen g(11);
    for (const char* p : {"1", "2", "1.5", "3"}) {
        const ModelParams m = model(p);
        for (int trial = 0; trial < 200; ++trial) {
            const int L = g.integer(1, 6);
            HeightConfig c = g.config(L, -4, 4, g.integer(-2, 2));
            const Point s{g.integer(0, L - 1), g.integer(0, L - 1)};
            const int h = g.integer(-6, 6);
            const double before = hamiltonian(c, m);
            const double d = energy_delta(c, s, h, m);
            c[s] = h;
            EXPECT_NEAR(hamiltonian(c, m) - before, d, 1e-9 * (1.0 + std::abs(before)));
        }
    }
}

TEST(EnergyDelta, RsosProperty) {
    gen::Gen g(5);
    const ModelParams m = model("inf");
    for (int trial = 0; trial < 200; ++trial) {
        HeightConfig c = g.rsos_config(5);
        ASSERT_TRUE(is_admissible(c, m));
        const Point s{g.integer(0, 4), g.integer(0, 4)};
        const int h = c[s] + g.integer(-1, 1);
        bool ok = true;
        for (Point off : kNeighborOffsets) ok = ok && std::abs(h - c.at(s + off)) <= 1;
        if (!ok) {
            EXPECT_THROW((void)energy_delta(c, s, h, m), AdmissibilityError);
            continue;
        }
        const double before = hamiltonian(c, m);
        const double d = energy_delta(c, s, h, m);
        c[s] = h;
        EXPECT_EQ(hamiltonian(c, m) - before, d);
    }
}

TEST(Snapshot, RoundTrip) {
    gen::Gen g(3);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams m = model(trial % 2 ? "1.5" : "inf", g.real(0.1, 5.0));
        m.floor = trial % 3 == 0;
        m.boundary_height = g.integer(0, 3);
        const HeightConfig c = g.config(g.integer(1, 7), 0, 9, m.boundary_height);
        std::stringstream ss;
        write_snapshot(ss, c, m);
        const Snapshot s = read_snapshot(ss);
        EXPECT_EQ(s.config, c);
        EXPECT_EQ(s.params, m);
    }
}

TEST(Snapshot, RejectsTruncated) {
    std::stringstream ss("3 2 1 0 0\n0 0 0\n0 0\n");
    EXPECT_THROW((void)read_snapshot(ss), ConfigError);
}
