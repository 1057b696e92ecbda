// pinnacle-lab: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 budget exceeded.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pinnacle/asm.hpp"
#include "pinnacle/contours.hpp"
#include "pinnacle/experiments.hpp"
#include "pinnacle/harmonic.hpp"
#include "pinnacle/oracle.hpp"
#include "pinnacle/predict.hpp"
#include "pinnacle/pvar.hpp"
#include "pinnacle/sampler.hpp"

using namespace pinnacle;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitBudget = 4;

/// Output stream for --out: a file, or stdout when empty.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) std::filesystem::create_directories(dir);
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ConfigError("cannot open " + path + " for writing");
    }
    std::ostream& operator*() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct ModelOptions {
    std::string p = "2";
    double beta = 1.0;
    bool floor = false;
    int boundary = 0;

    void attach(CLI::App* app) {
        app->add_option("--p", p, "Gradient exponent (>= 1 or inf)")->capture_default_str();
        app->add_option("--beta", beta, "Inverse temperature")->capture_default_str();
        app->add_flag("--floor", floor, "Condition on eta >= 0");
        app->add_option("--boundary", boundary, "Boundary height")->capture_default_str();
    }
    [[nodiscard]] ModelParams params() const {
        ModelParams m;
        m.p = Exponent::parse(p);
        m.beta = beta;
        m.floor = floor;
        m.boundary_height = boundary;
        return m;
    }
};

Schedule parse_schedule(const std::string& s) {
    if (s == "sequential") return Schedule::Sequential;
    if (s == "checkerboard") return Schedule::Checkerboard;
    throw ConfigError("unknown schedule " + s);
}

/// h,tail[,se] with consecutive h.
TailEstimate read_tail_csv(const std::string& path, const ModelParams& params) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::string line;
    std::getline(in, line);
    TailEstimate t;
    t.backend = TailBackend::Empirical;
    t.params = params;
    t.provenance = path;
    t.samples = 1;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string hs, qs, ses;
        std::getline(ss, hs, ',');
        std::getline(ss, qs, ',');
        std::getline(ss, ses, ',');
        const int h = std::stoi(hs);
        const double q = std::stod(qs);
        if (first) t.h_min = h, first = false;
        if (h != t.h_max() + 1) throw ConfigError("tail csv: levels must be consecutive");
        t.log_value.push_back(q > 0 ? std::log(q) : -std::numeric_limits<double>::infinity());
        t.se.push_back(ses.empty() ? 0.0 : std::stod(ses));
    }
    if (first) throw ConfigError("tail csv: no rows");
    t.validate();
    return t;
}

std::vector<int> parse_levels(const std::string& spec) {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) return {std::stoi(spec)};
    const int a = std::stoi(spec.substr(0, dots)), b = std::stoi(spec.substr(dots + 2));
    if (b < a) throw ConfigError("levels: empty range " + spec);
    std::vector<int> out;
    for (int h = a; h <= b; ++h) out.push_back(h);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Height-function models: sampling, exact oracles, variational solvers and predictors"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    std::string out;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a heat-bath chain and write per-sample observables");
    ModelOptions sim_model;
    sim_model.attach(sim);
    int sim_L = 32;
    std::uint64_t sim_seed = 1;
    long long sim_burnin = -1, sim_sweeps = 100, sim_thin = 1;
    std::string sim_schedule = "sequential", sim_snapshot, sim_tail;
    int sim_workers = 1;
    sim->add_option("--L", sim_L, "Box side")->capture_default_str();
    sim->add_option("--seed", sim_seed)->capture_default_str();
    sim->add_option("--burnin", sim_burnin, "Burn-in sweeps (default 200 L)");
    sim->add_option("--sweeps", sim_sweeps, "Sweeps after burn-in")->capture_default_str();
    sim->add_option("--thinning", sim_thin)->capture_default_str();
    sim->add_option("--schedule", sim_schedule, "sequential or checkerboard")->capture_default_str();
    sim->add_option("--workers", sim_workers, "Threads for the checkerboard schedule")->capture_default_str();
    sim->add_option("--snapshot-out", sim_snapshot, "Write the final configuration");
    sim->add_option("--tail-csv", sim_tail, "Write the empirical centre tail");
    sim->add_option("--out", out, "CSV output (default stdout)");

    // oracle
    auto* orc = app.add_subcommand("oracle", "Exact marginals on a tiny box by enumeration");
    ModelOptions orc_model;
    orc_model.attach(orc);
    int orc_L = 2, orc_K = 2;
    orc->add_option("--L", orc_L, "Box side (1..4)")->capture_default_str();
    orc->add_option("--K", orc_K, "Height window half-width")->capture_default_str();
    orc->add_option("--out", out);

    // dirichlet
    auto* dir = app.add_subcommand("dirichlet", "Harmonic pinnacle on the discrete ball");
    double dir_r = 20, dir_h = 1, dir_tol = 1e-10;
    std::string dir_profile;
    dir->add_option("--r", dir_r, "Ball radius")->capture_default_str();
    dir->add_option("--h", dir_h, "Peak height")->capture_default_str();
    dir->add_option("--tol", dir_tol)->capture_default_str();
    dir->add_option("--profile", dir_profile, "Write the profile as x,y,phi");
    dir->add_option("--out", out);

    // kernel
    auto* ker = app.add_subcommand("kernel", "Potential kernel of simple random walk");
    int ker_R = 200;
    ker->add_option("--R", ker_R, "Window half-width")->capture_default_str();
    ker->add_option("--out", out);

    // pvar
    auto* pv = app.add_subcommand("pvar", "Minimise the p-energy on B_R");
    double pv_p = 1.5, pv_tol = 1e-9;
    std::vector<double> pv_R{25};
    std::string pv_method = "newton";
    pv->add_option("--p", pv_p)->capture_default_str();
    pv->add_option("--R", pv_R, "Radii (several give a sweep)");
    pv->add_option("--tol", pv_tol)->capture_default_str();
    pv->add_option("--method", pv_method, "newton or descent")->capture_default_str();
    pv->add_option("--out", out);

    // nested-probe
    auto* np = app.add_subcommand("nested-probe", "Least energy over nested rectangle families");
    int np_h = 4;
    double np_p = 3;
    std::uint64_t np_budget = 2'000'000;
    np->add_option("--h", np_h)->capture_default_str();
    np->add_option("--p", np_p)->capture_default_str();
    np->add_option("--budget", np_budget)->capture_default_str();
    np->add_option("--out", out);

    // asm
    auto* am = app.add_subcommand("asm", "Path families, six-vertex configurations and ASMs");
    int am_h = 4;
    std::string am_mode = "formula", am_dump;
    am->add_option("--h", am_h)->capture_default_str();
    am->add_option("--mode", am_mode, "enumerate, formula or sixvertex")->capture_default_str();
    am->add_option("--dump-bijection", am_dump, "Write text renderings of every family to this directory");
    am->add_option("--out", out);

    // predict
    auto* pr = app.add_subcommand("predict", "M, H and M* predictions");
    ModelOptions pr_model;
    pr_model.attach(pr);
    std::vector<double> pr_L{1e6};
    std::string pr_backend = "analytic", pr_tail;
    std::optional<double> pr_cp, pr_clo, pr_chi;
    pr->add_option("--L", pr_L, "Box sides")->capture_default_str();
    pr->add_option("--backend", pr_backend, "analytic or empirical")->capture_default_str();
    pr->add_option("--tail-csv", pr_tail, "Tail table for the empirical backend");
    pr->add_option("--c-p", pr_cp, "Rate constant for 1 < p < 2");
    pr->add_option("--c-low", pr_clo, "Lower bracket constant for p > 2");
    pr->add_option("--c-high", pr_chi, "Upper bracket constant for p > 2");
    pr->add_option("--out", out);

    // analyze
    auto* an = app.add_subcommand("analyze", "Level lines of a snapshot");
    std::string an_snapshot, an_levels = "1";
    an->add_option("--snapshot", an_snapshot)->required();
    an->add_option("--levels", an_levels, "h or h1..h2")->capture_default_str();
    an->add_option("--out", out);

    // experiment
    auto* ex = app.add_subcommand("experiment", "Run an experiment from a key = value config file");
    std::string ex_config, ex_out;
    ex->add_option("--config", ex_config)->required();
    ex->add_option("--out", ex_out, "Output directory (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) {
            ChainSpec spec;
            spec.params = sim_model.params();
            spec.L = sim_L;
            spec.seed = sim_seed;
            spec.sweeps_burnin = sim_burnin >= 0 ? sim_burnin : default_burnin(sim_L);
            spec.sweeps_sample = sim_sweeps;
            spec.thinning = sim_thin;
            spec.schedule = parse_schedule(sim_schedule);
            spec.workers = sim_workers;
            const SampleStream s = run_chain(spec, HeightConfig::flat(sim_L, spec.params.boundary_height));
            Sink sink(out);
            Table t;
            t.columns = {"sweep", "max_height", "mean_height", "center_height"};
            for (const auto& r : s.records) t.add(r.sweep_index, r.max_height, r.mean_height, r.center_height);
            t.write_csv(*sink);
            if (!sim_snapshot.empty()) {
                std::ofstream os(sim_snapshot);
                write_snapshot(os, s.final_state, spec.params);
            }
            if (!sim_tail.empty()) {
                const TailEstimate tail = empirical_tail(s, spec.params);
                std::ofstream os(sim_tail);
                os << "h,tail,se\n";
                for (int h = tail.h_min; h <= tail.h_max(); ++h)
                    os << h << ',' << format_number(tail.at(h)) << ',' << format_number(tail.se[size_t(h - tail.h_min)]) << '\n';
            }
        } else if (*orc) {
            const ModelParams params = orc_model.params();
            const TruncatedEnsemble e = enumerate(orc_L, orc_K, params);
            Sink sink(out);
            Table t;
            t.columns = {"x", "y", "h", "probability", "tail"};
            for (int y = 0; y < orc_L; ++y)
                for (int x = 0; x < orc_L; ++x)
                    for (int h = e.height_lo(); h <= e.height_hi(); ++h)
                        t.add(x, y, h, e.marginal({x, y}, h), e.marginal_tail({x, y}, h));
            t.write_csv(*sink);
        } else if (*dir) {
            const ConductanceCheck c = conductance_identity_check(dir_r, dir_h, dir_tol);
            Sink sink(out);
            Table t;
            t.columns = {"r", "h", "energy", "identity", "asymptotic", "exit_time", "hit_sum"};
            t.add(dir_r, dir_h, c.direct, c.identity, dir_r > 1 ? asymptotic_I(dir_r, dir_h) : std::nan(""), c.exit_time, c.hit_sum);
            t.write_csv(*sink);
            if (!dir_profile.empty()) {
                const PinnacleProfile prof = solve_dirichlet(dir_r, dir_h, dir_tol);
                std::ofstream os(dir_profile);
                os << "x,y,phi\n";
                for (size_t i = 0; i < prof.ball.size(); ++i)
                    os << prof.ball.sites()[i].x << ',' << prof.ball.sites()[i].y << ',' << format_number(prof.values[i]) << '\n';
            }
        } else if (*ker) {
            const KernelTable k = potential_kernel(ker_R);
            Sink sink(out);
            Table t;
            t.columns = {"x", "a", "expansion", "difference"};
            for (int x = 1; x <= ker_R; ++x) {
                const double a = k({x, 0}), e = KernelTable::expansion({x, 0});
                t.add(x, a, e, a - e);
            }
            t.write_csv(*sink);
        } else if (*pv) {
            const PMethod method = pv_method == "newton" ? PMethod::Newton
                                   : pv_method == "descent" ? PMethod::CoordinateDescent
                                                            : throw ConfigError("unknown method " + pv_method);
            Sink sink(out);
            Table t;
            t.columns = {"p", "R", "energy", "residual", "iterations"};
            for (double R : pv_R) {
                const PMinimizer m = minimize_p_energy(pv_p, R, pv_tol, method);
                t.add(pv_p, R, m.energy, m.residual, m.iterations);
            }
            t.write_csv(*sink);
        } else if (*np) {
            const NestedProbeResult r = probe_nested_lower_bound(np_h, np_p, np_budget);
            Sink sink(out);
            Table t;
            t.columns = {"h", "p", "energy", "ratio", "exhaustive", "evaluated", "half_widths"};
            std::string hw;
            for (auto [a, b] : r.half_widths) hw += (hw.empty() ? "" : " ") + std::to_string(a) + "x" + std::to_string(b);
            t.add(np_h, np_p, r.energy, r.ratio, r.exhaustive, r.evaluated, hw);
            t.write_csv(*sink);
        } else if (*am) {
            Sink sink(out);
            Table t;
            t.columns = {"h", "mode", "count"};
            if (am_mode == "enumerate") t.add(am_h, am_mode, enumerate_path_families(am_h));
            else if (am_mode == "formula") t.add(am_h, am_mode, asm_product_formula(am_h).str());
            else if (am_mode == "sixvertex") t.add(am_h, am_mode, six_vertex_count(am_h));
            else throw ConfigError("unknown mode " + am_mode);
            t.write_csv(*sink);
            if (!am_dump.empty()) {
                std::filesystem::create_directories(am_dump);
                int index = 0;
                for_each_path_family(am_h, [&](const PathFamily& f) {
                    const SixVertexConfig sv = paths_to_six_vertex(f);
                    const ASMatrix a = six_vertex_to_asm(sv);
                    std::ofstream os(std::filesystem::path(am_dump) / ("family_" + std::to_string(index++) + ".txt"));
                    os << "paths\n" << render(f) << "\nsix-vertex\n" << render(sv) << "\nmatrix\n" << render(a);
                });
            }
        } else if (*pr) {
            const ModelParams params = pr_model.params();
            TailEstimate tail;
            if (pr_backend == "analytic") {
                tail = analytic_tail_estimate(RateTable{params.p, params.beta, pr_cp, pr_clo, pr_chi}, params);
            } else if (pr_backend == "empirical") {
                if (pr_tail.empty()) throw ConfigError("the empirical backend needs --tail-csv");
                tail = read_tail_csv(pr_tail, params);
            } else {
                throw ConfigError("unknown backend " + pr_backend);
            }
            const bool quadratic = params.p.kind() == Exponent::Kind::Quadratic;
            Sink sink(out);
            Table t;
            t.columns = {"L", "M", "H", "M_star", "asymptote_M", "asymptote_H", "asymptote_M_star", "H_over_M", "M_star_over_M", "warnings"};
            for (double L : pr_L) {
                const Prediction m = predict_M(L, tail);
                const Prediction h = predict_H(L, params.beta, tail);
                const int ms = m.value + h.value;
                std::string warn;
                for (const auto& w : m.warnings) warn += (warn.empty() ? "M: " : "; M: ") + w;
                for (const auto& w : h.warnings) warn += (warn.empty() ? "H: " : "; H: ") + w;
                const double nan = std::nan("");
                t.add(L, m.value, h.value, quadratic ? ms : -1, m.asymptote.value_or(nan), h.asymptote.value_or(nan),
                      quadratic && tail.backend == TailBackend::Analytic ? asymptote_M_star(L, params.beta) : nan,
                      m.value ? double(h.value) / m.value : nan, m.value && quadratic ? double(ms) / m.value : nan,
                      "\"" + warn + "\"");
            }
            t.write_csv(*sink);
        } else if (*an) {
            std::ifstream in(an_snapshot);
            if (!in) throw ConfigError("cannot read " + an_snapshot);
            const Snapshot snap = read_snapshot(in);
            Sink sink(out);
            Table t;
            t.columns = {"h", "n_contours", "n_macroscopic", "max_area", "total_area", "has_negative_macroscopic"};
            for (int h : parse_levels(an_levels)) {
                const AreaSummary s = area_statistics(extract_level_lines(snap.config, h), snap.config.side());
                t.add(h, s.n_contours, s.n_macroscopic, s.max_area, s.total_area, s.has_negative_macroscopic);
            }
            t.write_csv(*sink);
        } else if (*ex) {
            std::ifstream in(ex_config);
            if (!in) throw ConfigError("cannot read " + ex_config);
            ExperimentConfig cfg = parse_experiment_config(in);
            if (!ex_out.empty()) cfg.out_dir = ex_out;
            const ExperimentReport r = run_experiment(cfg);
            r.write(cfg.out_dir);
            r.summary.write_csv(std::cout);
        }
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const SolverError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const CouplingError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
