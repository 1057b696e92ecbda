#include <gtest/gtest.h>

#include <cmath>
#include <unordered_map>

#include "pinnacle/oracle.hpp"
#include "pinnacle/rng.hpp"
#include "pinnacle/sampler.hpp"
#include "support.hpp"

using namespace pinnacle;

namespace {

ModelParams model(const char* p, double beta, bool floor = false) {
    ModelParams m;
    m.p = Exponent::parse(p);
    m.beta = beta;
    m.floor = floor;
    return m;
}

/// Conditional law from its definition: weights exp(-beta sum |k - nb|^p), normalised over [lo, hi].
std::vector<double> direct_law(const ModelParams& m, const int (&nb)[4], int lo, int hi) {
    std::vector<double> w;
    double z = 0.0;
    for (int k = lo; k <= hi; ++k) {
        double e = 0.0;
        for (int v : nb) e += m.p.bond_cost(k - v);
        w.push_back(std::exp(-m.beta * e));
        z += w.back();
    }
    for (double& x : w) x /= z;
    return w;
}

double tv_to_oracle(const TruncatedEnsemble& ens, const std::unordered_map<std::uint64_t, long long>& counts,
                    long long outside, long long n) {
    double tv = double(outside) / double(n);
    for (std::uint64_t i = 0; i < ens.state_count(); ++i) {
        const auto it = counts.find(i);
        const double emp = it == counts.end() ? 0.0 : double(it->second) / double(n);
        tv += std::abs(emp - ens.probability(i));
    }
    return 0.5 * tv;
}

}  // namespace

TEST(Rng, CounterBasedAndInRange) {
    CounterRng a(7), b(7), c(8);
    EXPECT_EQ(a.bits(3, 4), b.bits(3, 4));
    EXPECT_NE(a.bits(3, 4), c.bits(3, 4));
    EXPECT_NE(a.bits(3, 4), a.bits(4, 3));
    double mean = 0.0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const double u = a.uniform(1, i);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        mean += u;
    }
    EXPECT_NEAR(mean / 100000, 0.5, 0.005);
}

TEST(HeatBath, ZeroNeighbourhoodQuadratic) {
    HeightConfig c(3, 0);
    HeatBathKernel k(model("2", 1.0));
    const Conditional law = k.conditional(c, {1, 1});
    EXPECT_NEAR(law(0), 1.0 / (1.0 + 2 * std::exp(-4.0) + 2 * std::exp(-16.0) + 2 * std::exp(-36.0)), 1e-12);

    HeatBathKernel kf(model("2", 1.0, true));
    const Conditional fl = kf.conditional(c, {1, 1});
    EXPECT_EQ(fl.lo, 0);
    EXPECT_NEAR(fl(0), 1.0 / (1.0 + std::exp(-4.0) + std::exp(-16.0) + std::exp(-36.0)), 1e-12);
}

TEST(HeatBath, RsosUniformOnTwoLevels) {
    HeightConfig c(2, 0);
    c[{1, 0}] = 1;
    c[{0, 1}] = 1;
    // neighbours of (0,0): (1,0)=1, (-1,0)=0, (0,1)=1, (0,-1)=0
    for (double beta : {1.0, 10.0, 50.0}) {
        HeatBathKernel k(model("inf", beta));
        const Conditional law = k.conditional(c, {0, 0});
        EXPECT_EQ(law.lo, 0);
        EXPECT_EQ(law.hi(), 1);
        EXPECT_NEAR(law(0), 0.5, 1e-12);
    }
}

TEST(HeatBath, ConditionalMatchesDirectNormalisation) {
    gen::Gen g(21);
    for (const char* p : {"1", "2", "1.5", "3"}) {
        for (int trial = 0; trial < 50; ++trial) {
            const ModelParams m = model(p, g.real(0.3, 3.0), g.coin());
            HeightConfig c = g.config(3, m.floor ? 0 : -3, 3, 0);
            HeatBathKernel k(m);
            const Conditional law = k.conditional(c, {1, 1});
            int nb[4];
            for (int i = 0; i < 4; ++i) nb[i] = c.at(Point{1, 1} + kNeighborOffsets[i]);
            const int lo = m.floor ? 0 : -60, hi = 60;
            const std::vector<double> ref = direct_law(m, nb, lo, hi);
            for (int h = lo; h <= hi; ++h) EXPECT_NEAR(law(h), ref[size_t(h - lo)], 1e-12);
        }
    }
}

TEST(HeatBath, DrawIsInverseCdf) {
    HeightConfig c(3, 0);
    HeatBathKernel k(model("2", 1.0));
    const Conditional law = k.conditional(c, {1, 1});
    double below = 0.0;
    for (int h = law.lo; h < 0; ++h) below += law(h);
    EXPECT_EQ(k.draw(c, {1, 1}, below + 1e-6), 0);
    EXPECT_EQ(k.draw(c, {1, 1}, below - 1e-6), -1);
    EXPECT_EQ(k.draw(c, {1, 1}, below + law(0) + 0.5 * law(1)), 1);
}

TEST(Chain, EmptyStreamWithoutSampling) {
    ChainSpec spec;
    spec.L = 6;
    spec.sweeps_burnin = 5;
    const SampleStream s = run_chain(spec, HeightConfig(6, 0));
    EXPECT_TRUE(s.records.empty());
}

TEST(Chain, DeterministicAndThinned) {
    ChainSpec spec;
    spec.L = 8;
    spec.params = model("2", 1.0);
    spec.seed = 99;
    spec.sweeps_burnin = 3;
    spec.sweeps_sample = 20;
    spec.thinning = 4;
    spec.keep_snapshots = true;
    const SampleStream a = run_chain(spec, HeightConfig(8, 0));
    const SampleStream b = run_chain(spec, HeightConfig(8, 0));
    ASSERT_EQ(a.records.size(), 5u);
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.final_state, b.final_state);
    for (size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].sweep_index, 3 + 4 * long(i + 1));
        EXPECT_EQ(a.records[i], observe(a.snapshots[i], a.records[i].sweep_index));
    }
    spec.seed = 100;
    EXPECT_NE(run_chain(spec, HeightConfig(8, 0)).final_state, a.final_state);
}

TEST(Chain, CheckerboardIndependentOfWorkers) {
    ChainSpec spec;
    spec.L = 16;
    spec.params = model("1", 1.0);
    spec.schedule = Schedule::Checkerboard;
    spec.sweeps_sample = 30;
    spec.workers = 1;
    const SampleStream a = run_chain(spec, HeightConfig(16, 0));
    spec.workers = 3;
    const SampleStream b = run_chain(spec, HeightConfig(16, 0));
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Chain, RejectsBadSpecs) {
    ChainSpec spec;
    spec.L = 4;
    spec.thinning = 0;
    EXPECT_THROW((void)run_chain(spec, HeightConfig(4, 0)), ConfigError);
    spec.thinning = 1;
    EXPECT_THROW((void)run_chain(spec, HeightConfig(5, 0)), ConfigError);
    spec.params = model("inf", 1.0);
    HeightConfig steep(4, 0);
    steep[{1, 1}] = 3;
    EXPECT_THROW((void)run_chain(spec, steep), AdmissibilityError);
    spec.params = model("2", 1.0, true);
    HeightConfig neg(4, 0);
    neg[{0, 0}] = -1;
    EXPECT_THROW((void)run_chain(spec, neg), AdmissibilityError);
}

TEST(Chain, FlooredChainStaysNonNegative) {
    ChainSpec spec;
    spec.L = 10;
    spec.params = model("2", 0.5, true);
    spec.sweeps_sample = 200;
    run_chain(spec, HeightConfig(10, 0), [](const SampleRecord&, const HeightConfig& c) {
        for (int v : c.data()) ASSERT_GE(v, 0);
    });
}

TEST(Chain, RsosChainStaysAdmissible) {
    ChainSpec spec;
    spec.L = 10;
    spec.params = model("inf", 0.7);
    spec.sweeps_sample = 200;
    spec.schedule = Schedule::Checkerboard;
    run_chain(spec, HeightConfig(10, 0), [&](const SampleRecord&, const HeightConfig& c) {
        ASSERT_TRUE(is_admissible(c, spec.params));
    });
}

// Smaller version of the acceptance check: 2x2 box against the exact law.
TEST(Chain, MatchesOracleOnTinyBox) {
    for (Schedule sch : {Schedule::Sequential, Schedule::Checkerboard}) {
        for (const char* p : {"2", "1"}) {
            ChainSpec spec;
            spec.L = 2;
            spec.params = model(p, 1.0);
            spec.schedule = sch;
            spec.seed = 5;
            spec.sweeps_burnin = 100;
            spec.sweeps_sample = 200000;
            const TruncatedEnsemble ens = enumerate(2, 4, spec.params);
            std::unordered_map<std::uint64_t, long long> counts;
            long long outside = 0, n = 0;
            run_chain(spec, HeightConfig(2, 0), [&](const SampleRecord&, const HeightConfig& c) {
                ++n;
                if (ens.contains(c)) ++counts[ens.index_of(c)];
                else ++outside;
            });
            EXPECT_LE(tv_to_oracle(ens, counts, outside, n), 0.01) << p;
        }
    }
}

TEST(Coupling, IdenticalStartsStayEqual) {
    ChainSpec spec;
    spec.L = 12;
    spec.params = model("2", 1.0);
    spec.sweeps_sample = 50;
    const PairedStream s = monotone_pair(spec, HeightConfig(12, 0), HeightConfig(12, 0));
    EXPECT_EQ(s.lower_final, s.upper_final);
    EXPECT_EQ(s.sweeps_checked, 50);
}

TEST(Coupling, OrderedPairStaysOrdered) {
    for (const char* p : {"1", "2", "1.5", "inf"}) {
        ChainSpec spec;
        spec.L = 16;
        spec.params = model(p, 1.5);
        spec.sweeps_sample = 1000;
        spec.schedule = Schedule::Checkerboard;
        HeightConfig lo(16, 0), hi = HeightConfig(16, 0, std::string(p) == "inf" ? 1 : 3);
        PairedStream s;
        ASSERT_NO_THROW(s = monotone_pair(spec, lo, hi)) << p;
        EXPECT_TRUE(dominates(s.upper_final, s.lower_final));
    }
}

TEST(Coupling, FloorRaisesSurface) {
    ChainSpec spec;
    spec.L = 16;
    spec.params = model("2", 1.0);
    spec.sweeps_sample = 500;
    ModelParams floored = spec.params;
    floored.floor = true;
    const PairedStream s = monotone_pair(spec, HeightConfig(16, 0), HeightConfig(16, 0), floored);
    EXPECT_TRUE(dominates(s.upper_final, s.lower_final));
    for (int v : s.upper_final.data()) EXPECT_GE(v, 0);
}

TEST(Coupling, RejectsUnorderedOrMismatched) {
    ChainSpec spec;
    spec.L = 4;
    HeightConfig hi(4, 0, 1);
    EXPECT_THROW((void)monotone_pair(spec, hi, HeightConfig(4, 0)), ConfigError);
    ModelParams other = spec.params;
    other.beta = 2.0;
    EXPECT_THROW((void)monotone_pair(spec, HeightConfig(4, 0), hi, other), ConfigError);
}
