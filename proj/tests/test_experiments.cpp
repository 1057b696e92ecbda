#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pinnacle/experiments.hpp"

using namespace pinnacle;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_experiment_config(in);
}

}  // namespace

TEST(Config, ParsesEveryKey) {
    const ExperimentConfig c = parse(
        "# floor run\n"
        "experiment = FLOOR_PLATEAU\n"
        "p = 2\nbeta = 1.5\nfloor = true\nboundary = 0\n"
        "L = 32, 64 ,128\ntrials = 3\nseed = 42\nburnin = 10\nsweeps = 5\nthinning = 2\n"
        "schedule = checkerboard\nworkers = 2\nmargin = 4\ncoupled = yes\nh_lo = 2\nh_hi = 5\n"
        "c_p = 1.5\nc_low = 1\nc_high = 2\nout = results  # trailing comment\n");
    EXPECT_EQ(c.kind, ExperimentKind::FloorPlateau);
    EXPECT_EQ(c.params.beta, 1.5);
    EXPECT_TRUE(c.params.floor);
    EXPECT_EQ(c.L, (std::vector<int>{32, 64, 128}));
    EXPECT_EQ(c.trials, 3);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.burnin_for(32), 10);
    EXPECT_EQ(c.sweeps, 5);
    EXPECT_EQ(c.thinning, 2);
    EXPECT_EQ(c.schedule, Schedule::Checkerboard);
    EXPECT_EQ(c.workers, 2);
    EXPECT_EQ(c.margin, 4);
    EXPECT_TRUE(c.coupled);
    EXPECT_EQ(c.h_lo, 2);
    EXPECT_EQ(c.h_hi, 5);
    EXPECT_EQ(c.c_p, 1.5);
    EXPECT_EQ(c.out_dir, "results");
    EXPECT_EQ(parse("L = 16\n").burnin_for(16), 3200);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse("beta\n"), ConfigError);
    EXPECT_THROW(parse("beta = abc\n"), ConfigError);
    EXPECT_THROW(parse("beta = -1\n"), ConfigError);
    EXPECT_THROW(parse("L = 4\n"), ConfigError);
    EXPECT_THROW(parse("trials = 0\n"), ConfigError);
    EXPECT_THROW(parse("p = 0.3\n"), ConfigError);
    EXPECT_THROW(parse("experiment = FLOOR_PLATEAU\nfloor = false\n"), ConfigError);
    EXPECT_THROW(parse("experiment = LDP_TAIL\nL = 32\n"), ConfigError);
    EXPECT_THROW(parse("experiment = MAX_HEIGHT\nfloor = true\n"), ConfigError);
    EXPECT_THROW(parse("schedule = random\n"), ConfigError);
}

TEST(Table, CsvAndNumbers) {
    Table t;
    t.columns = {"a", "b", "c"};
    t.add(1, 0.1, "x");
    t.add(-2, 1e-300, true);
    EXPECT_THROW(t.add(1, 2), DomainError);
    std::ostringstream os;
    t.write_csv(os);
    EXPECT_EQ(os.str(), "a,b,c\n1,0.1,x\n-2,1e-300,1\n");
    EXPECT_EQ(t.number(1, "b"), 1e-300);
    for (double v : {0.1, 1.0 / 3.0, 6.02e23, -5e-7}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Fit, RecoversLine) {
    const std::vector<double> x{1, 2, 3, 4}, w{1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) y.push_back(0.5 + 6.0 * v);
    const SlopeFit f = weighted_fit(x, y, w);
    EXPECT_NEAR(f.slope, 6.0, 1e-12);
    EXPECT_NEAR(f.intercept, 0.5, 1e-12);
    EXPECT_THROW((void)weighted_fit({1}, {1}, {1}), DomainError);
    EXPECT_THROW((void)weighted_fit({2, 2}, {1, 3}, {1, 1}), DomainError);
}

TEST(MaxExperiment, NoSweepsGivesZero) {
    ExperimentConfig c = parse("L = 16\ntrials = 1\nburnin = 0\n");
    const ExperimentReport r = run_max_experiment(c);
    ASSERT_EQ(r.rows.rows.size(), 1u);
    EXPECT_EQ(r.rows.number(0, "X_L"), 0.0);
}

TEST(MaxExperiment, ReproducibleAcrossWorkers) {
    ExperimentConfig c = parse("L = 8, 12\ntrials = 4\nburnin = 30\nbeta = 1\nseed = 9\n");
    const ExperimentReport a = run_max_experiment(c);
    c.workers = 3;
    const ExperimentReport b = run_max_experiment(c);
    EXPECT_EQ(a.rows.rows, b.rows.rows);
    EXPECT_EQ(a.summary.rows, b.summary.rows);
    EXPECT_EQ(a.rows.rows.size(), 8u);
    for (size_t i = 0; i < a.rows.rows.size(); ++i) EXPECT_GE(a.rows.number(i, "X_L"), 0.0);
}

TEST(FloorExperiment, StiffSurfaceConcentrates) {
    const ExperimentConfig c = parse("experiment = FLOOR_PLATEAU\nfloor = 1\nbeta = 10\nL = 32\ntrials = 2\nburnin = 300\n");
    const ExperimentReport r = run_floor_experiment(c);
    for (size_t i = 0; i < r.rows.rows.size(); ++i) {
        EXPECT_GE(r.rows.number(i, "modal_fraction"), 0.9);
        EXPECT_GE(r.rows.number(i, "modal_level"), 0.0);
    }
}

TEST(FloorExperiment, CoupledFloorRaisesMean) {
    const ExperimentConfig c =
        parse("experiment = FLOOR_PLATEAU\nfloor = 1\nbeta = 1.5\nL = 16\ntrials = 3\nburnin = 200\ncoupled = 1\n");
    const ExperimentReport r = run_floor_experiment(c);
    for (size_t i = 0; i < r.rows.rows.size(); ++i)
        EXPECT_GE(r.rows.number(i, "mean_height"), r.rows.number(i, "unfloored_mean"));
}

TEST(TailExperiment, SmallRunProducesMonotoneTail) {
    const ExperimentConfig c =
        parse("experiment = LDP_TAIL\np = 1\nbeta = 1\nL = 64\nburnin = 50\nsweeps = 200\nmargin = 4\n");
    const LdpTailResult r = run_ldp_tail_experiment(c);
    EXPECT_NO_THROW(r.tail.validate());
    EXPECT_EQ(r.tail.samples, 200LL * 56 * 56);
    EXPECT_EQ(r.report.rows.rows.size(), 3u);
    EXPECT_GT(r.tail.at(1), 0.0);
    EXPECT_LT(r.tail.at(1), 0.1);
}

TEST(Tiles, Windows) {
    TailEstimate t;
    t.h_min = 1;
    t.log_value = {std::log(0.1), std::log(0.01)};
    const auto w = check_tile_relation(1.0, 1, 2, t);
    EXPECT_NEAR(w[0].l_min, 60.0, 1e-9);
    EXPECT_NEAR(w[0].l_max, 80.0, 1e-9);
    for (const auto& x : w) EXPECT_LT(x.l_min, x.l_max);

    const ExperimentConfig c = parse("experiment = TILE_RELATION\nL = 8\nh_lo = 2\nh_hi = 6\n");
    const ExperimentReport r = run_tile_experiment(c);
    ASSERT_EQ(r.rows.rows.size(), 5u);
    for (size_t i = 0; i < r.rows.rows.size(); ++i) {
        const double h = r.rows.number(i, "h");
        EXPECT_NEAR(r.rows.number(i, "log_l_min"), 2 * std::numbers::pi * h * h / std::log(h) + std::log(6.0), 1e-9);
    }
}

TEST(Report, WritesBothFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "pinnacle_report_test";
    std::filesystem::remove_all(dir);
    const ExperimentReport r = run_experiment(parse("experiment = TILE_RELATION\nL = 8\n"));
    r.write(dir.string());
    EXPECT_TRUE(std::filesystem::exists(dir / "tile_relation_rows.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "tile_relation_summary.csv"));
    std::filesystem::remove_all(dir);
}
