#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pinnacle/oracle.hpp"
#include "pinnacle/predict.hpp"

using namespace pinnacle;

namespace {

ModelParams model(const char* p, double beta) {
    ModelParams m;
    m.p = Exponent::parse(p);
    m.beta = beta;
    return m;
}

TailEstimate analytic(const char* p, double beta) {
    const ModelParams m = model(p, beta);
    return analytic_tail_estimate(RateTable{m.p, beta}, m);
}

TailEstimate flat_tail(int K) {
    TailEstimate t;
    t.backend = TailBackend::Empirical;
    t.params = model("2", 1.0);
    t.samples = 10;
    t.h_min = 0;
    t.log_value.assign(size_t(K + 1), 0.0);
    return t;
}

}  // namespace

TEST(Rates, Examples) {
    const RateTable dg{Exponent::finite(2.0), 1.0};
    EXPECT_NEAR(log_analytic_tail(dg, 10), -2 * std::numbers::pi * 100 / std::log(10.0), 1e-10);
    EXPECT_NEAR(log_analytic_tail(dg, 10), -272.87, 0.01);
    EXPECT_THROW((void)log_analytic_tail(dg, 1), DomainError);
    EXPECT_NEAR(log_analytic_tail(RateTable{Exponent::finite(1.0), 1.0}, 3), -12.0, 1e-12);
    const RateTable rsos{Exponent::infinity(), 2.0};
    EXPECT_NEAR(log_analytic_tail(rsos, 2), -16.0 * (2.0 + 2 * std::log(27.0 / 16.0)), 1e-12);
    EXPECT_NEAR(log_analytic_tail(rsos, 2), -48.74, 0.01);
}

TEST(Rates, GeneralExponentsNeedConstants) {
    RateTable r{Exponent::finite(1.5), 1.0};
    EXPECT_THROW((void)r.exponent(2), ConfigError);
    r.c_p = 3.5;
    EXPECT_NEAR(r.exponent(2).first, 3.5 * std::pow(2.0, 1.5), 1e-12);
    RateTable q{Exponent::finite(3.0), 2.0};
    EXPECT_THROW((void)q.exponent(2), ConfigError);
    q.c_low = 2.0;
    q.c_high = 1.0;
    EXPECT_EQ(q.exponent(3), (std::pair<double, double>{1.0 * 2 * 9, 2.0 * 2 * 9}));
    EXPECT_TRUE(q.bracketed());
}

TEST(Rates, PositiveAndIncreasing) {
    for (const char* p : {"1", "2", "inf"}) {
        const TailEstimate t = analytic(p, 0.7);
        EXPECT_NO_THROW(t.validate());
        for (size_t i = 0; i < t.log_value.size(); ++i) {
            EXPECT_LT(t.log_value[i], 0.0);
            if (i) EXPECT_LT(t.log_value[i], t.log_value[i - 1]);
        }
    }
}

TEST(Tail, OutsideTheTable) {
    const TailEstimate t = analytic("2", 1.0);
    EXPECT_EQ(t.at(-1000), 1.0);
    EXPECT_EQ(t.at(t.h_max() + 1), 0.0);
}

TEST(Tail, EmpiricalFromZeroStream) {
    SampleStream s;
    s.records.resize(50);
    const TailEstimate t = empirical_tail(s, model("2", 1.0));
    EXPECT_EQ(t.at(1), 0.0);
    EXPECT_EQ(t.se[size_t(1 - t.h_min)], 0.0);
    EXPECT_EQ(t.at(0), 1.0);
    EXPECT_EQ(t.samples, 50);
    ModelParams fl = model("2", 1.0);
    fl.floor = true;
    EXPECT_THROW((void)empirical_tail(s, fl), ConfigError);
}

TEST(Tail, AccumulatorCountsExactly) {
    TailAccumulator acc;
    for (int v : {0, 0, 1, 2, -1, 0, 1, 3}) acc.add(v);
    const TailEstimate t = acc.finish(model("1", 1.0), "test");
    EXPECT_EQ(t.h_min, -1);
    EXPECT_DOUBLE_EQ(t.at(-1), 1.0);
    EXPECT_DOUBLE_EQ(t.at(0), 7.0 / 8.0);
    EXPECT_DOUBLE_EQ(t.at(1), 4.0 / 8.0);
    EXPECT_DOUBLE_EQ(t.at(2), 2.0 / 8.0);
    EXPECT_DOUBLE_EQ(t.at(3), 1.0 / 8.0);
    EXPECT_DOUBLE_EQ(t.at(4), 0.0);
    EXPECT_NO_THROW(t.validate());
}

TEST(Tail, ChainAgreesWithOracleAtCentre) {
    const ModelParams m = model("2", 1.0);
    ChainSpec spec;
    spec.L = 3;
    spec.params = m;
    spec.sweeps_burnin = 100;
    spec.sweeps_sample = 300000;
    spec.thinning = 3;
    const TailEstimate t = empirical_tail(run_chain(spec, HeightConfig(3, 0)), m);
    const TruncatedEnsemble e = enumerate(3, 2, m);
    const double exact = e.marginal_tail({1, 1}, 1);
    const double se = t.se[size_t(1 - t.h_min)];
    EXPECT_NEAR(t.at(1), exact, 4 * se + 1e-4);
}

TEST(PredictM, TailOneUpToK) {
    const Prediction p = predict_M(1e4, flat_tail(5));
    EXPECT_EQ(p.value, 5);
    EXPECT_FALSE(p.warnings.empty());
}

TEST(PredictM, AnalyticScanAgreesWithInequality) {
    const TailEstimate t = analytic("2", 1.0);
    for (double L : {1e3, 1e6, 1e9, 1e12, 1e30}) {
        const double budget = 2 * std::log(L) - 5 * std::log(std::log(L));
        int want = 1;
        for (int h = 2; h < 1000; ++h)
            if (2 * std::numbers::pi * h * h / std::log(double(h)) <= budget) want = h;
        EXPECT_EQ(predict_M(L, t).value, want) << L;
    }
    EXPECT_EQ(predict_M(1e6, t).value, 1);
    EXPECT_EQ(predict_M(1e30, t).value, 5);
}

TEST(PredictM, ThresholdIsInclusive) {
    const double L = 1e5;
    TailEstimate t = flat_tail(4);
    t.log_value = {0.0, -1.0, log_threshold_M(L), log_threshold_M(L) - 1e-9, -100.0};
    EXPECT_EQ(predict_M(L, t).value, 2);
}

TEST(PredictH, DegenerateThreshold) {
    const Prediction p = predict_H(4.0, 1.0, analytic("2", 1.0));
    EXPECT_EQ(p.value, 0);
    ASSERT_FALSE(p.warnings.empty());
    EXPECT_NE(p.warnings[0].find("degenerate"), std::string::npos);
}

TEST(PredictH, LinearComparison) {
    const TailEstimate t = analytic("1", 1.5);
    for (double L : {1e2, 1e4, 1e8}) {
        const Prediction p = predict_H(L, 1.5, t);
        ASSERT_TRUE(p.comparison.has_value());
        EXPECT_EQ(*p.comparison, std::ceil(std::log(L) / 6.0));
        // exp(-6h) >= 7.5 / L  <=>  h <= (log L - log 7.5) / 6
        EXPECT_EQ(p.value, std::max(0, int(std::floor((std::log(L) - std::log(7.5)) / 6.0))));
    }
}

TEST(Asymptotes, CoefficientRatios) {
    for (double L : {1e3, 1e6, 1e12}) {
        EXPECT_NEAR(asymptote_H(L, 1.0) / asymptote_M(L, 1.0), 1 / std::numbers::sqrt2, 1e-14);
        EXPECT_NEAR(asymptote_M_star(L, 1.0), asymptote_M(L, 1.0) + asymptote_H(L, 1.0), 1e-12);
        EXPECT_NEAR(asymptote_M_star(L, 1.0) / asymptote_M_star(L, 4.0), 2.0, 1e-9);
    }
}

TEST(MaxWindow, Composition) {
    const TailEstimate t = analytic("2", 1.0);
    for (double L : {1e3, 1e8, 1e12}) {
        const MaxWindow w = predict_M_star(L, 1.0, t);
        EXPECT_EQ(w.M_star, w.M + w.H);
        EXPECT_EQ(w.M, predict_M(L, t).value);
        EXPECT_EQ(w.H, predict_H(L, 1.0, t).value);
        ASSERT_TRUE(w.asymptote.has_value());
    }
    EXPECT_FALSE(predict_M_star(1e3, 1.0, t).warnings.empty());
    EXPECT_THROW((void)predict_M_star(1e3, 1.0, analytic("1", 1.0)), DomainError);
}

TEST(Predict, RejectsBadInput) {
    const TailEstimate t = analytic("2", 1.0);
    EXPECT_THROW((void)predict_M(2.0, t), DomainError);
    EXPECT_THROW((void)predict_H(10.0, 0.0, t), DomainError);
    TailEstimate bad = flat_tail(2);
    bad.log_value = {-1.0, -0.5, -2.0};
    EXPECT_THROW((void)predict_M(1e4, bad), ValidityError);
}
