#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ecp/critvals.hpp"
#include "ecp/io.hpp"
#include "ecp/montecarlo.hpp"

namespace {

using Clock = std::chrono::steady_clock;

constexpr long kDefaultR = 100000;
constexpr int kDefaultM = 512;
constexpr std::uint64_t kDefaultSeed = 20210531;

double resolve_critical_value(int d, double alpha, const std::string& table_path,
                              std::uint64_t seed) {
    if (!table_path.empty() && std::filesystem::exists(table_path)) {
        const auto table = ecp::CriticalValueTable::load(table_path);
        try {
            return table.lookup(d, alpha).c;
        } catch (const std::out_of_range&) {
            // fall through to simulation
        }
    }
    std::cerr << "simulating critical value for d=" << d << ", alpha=" << alpha << " ...\n";
    return ecp::critical_value(d, alpha, kDefaultR, kDefaultM, seed).value;
}

ecp::Vec parse_theta(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        vals.push_back(std::stod(tok));
    ecp::Vec v(static_cast<long>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i)
        v[static_cast<long>(i)] = vals[i];
    return v;
}

struct TestArgs {
    std::string input, model, out, json_out, heatmap, critvals_table = "data/critical_values.txt";
    double alpha = 0.05;
    long un = 0, vn = 0, stride = 1;
    double cv = 0.0;
    std::uint64_t seed = kDefaultSeed;
    int jobs = 0;
};

int cmd_test(const TestArgs& a) {
    const auto t0 = Clock::now();
    const ecp::ModelSpec model = ecp::ModelSpec::from_name(a.model);
    const ecp::TimeSeries X = ecp::ingest_csv(a.input);

    ecp::ScanConfig cfg;
    cfg.u_n = a.un;
    cfg.v_n = a.vn;
    cfg.alpha = a.alpha;
    cfg.stride = a.stride;
    cfg.parallelism = a.jobs;
    cfg.critical_value =
        a.cv > 0.0 ? a.cv : resolve_critical_value(model.dim(), a.alpha, a.critvals_table, a.seed);

    const ecp::ScanReport rep = ecp::run_scan(model, X, cfg);
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();

    std::ostringstream report;
    ecp::write_report(rep, model, X.n(), a.stride, a.alpha, wall, report);
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f)
            throw std::runtime_error("cannot open for writing: " + a.out);
        f << report.str();
    }
    std::cout << report.str();
    if (!a.json_out.empty())
        ecp::write_report_json(rep, model, X.n(), a.stride, a.alpha, wall, a.json_out);
    if (!a.heatmap.empty())
        ecp::write_heatmap(rep, a.heatmap);
    return rep.reject ? 1 : 0;
}

struct SimArgs {
    std::string model, theta, theta2, out, innovation = "normal";
    long n = 500, burnin = 500;
    double tau1 = 0.3, tau2 = 0.7;
    std::uint64_t seed = kDefaultSeed;
};

int cmd_simulate(const SimArgs& a) {
    const ecp::ModelSpec model = ecp::ModelSpec::from_name(a.model);
    const ecp::Innovation law =
        a.innovation == "uniform" ? ecp::Innovation::Uniform : ecp::Innovation::Normal;
    std::mt19937_64 rng(a.seed);
    long t1 = 0, t2 = 0;
    ecp::TimeSeries X;
    if (a.theta2.empty()) {
        X = ecp::simulate(model, parse_theta(a.theta), a.n, a.burnin, rng, law);
    } else {
        ecp::EpidemicScenario scen{parse_theta(a.theta), parse_theta(a.theta2), a.tau1, a.tau2,
                                   a.n};
        auto sample = ecp::simulate_epidemic(model, scen, a.burnin, rng, law);
        X = sample.series;
        t1 = sample.t1;
        t2 = sample.t2;
    }
    ecp::write_series_csv(X, a.out);
    std::ofstream meta(a.out + ".meta");
    meta << "model = " << model.name() << "\n";
    meta << "theta = " << a.theta << "\n";
    if (!a.theta2.empty()) {
        meta << "theta2 = " << a.theta2 << "\n";
        meta << "t1 = " << t1 << "\n";
        meta << "t2 = " << t2 << "\n";
    }
    meta << "n = " << a.n << "\n";
    meta << "burn_in = " << a.burnin << "\n";
    meta << "seed = " << a.seed << "\n";
    meta << "innovation = " << a.innovation << "\n";
    std::cout << "wrote " << X.n() << " observations to " << a.out << "\n";
    return 0;
}

struct CritArgs {
    std::vector<int> ds = {1, 2, 3, 4, 5};
    std::vector<double> alphas = {0.01, 0.05, 0.10};
    long R = kDefaultR;
    int m = kDefaultM;
    std::uint64_t seed = kDefaultSeed;
    std::string out, law = "pair";
};

int cmd_critvals(const CritArgs& a) {
    const auto table = ecp::CriticalValueTable::compute(a.ds, a.alphas, a.R, a.m, a.seed,
                                                        ecp::bridge_law_from_string(a.law));
    table.write(std::cout);
    if (!a.out.empty())
        table.save(a.out);
    return 0;
}

struct Table1Args {
    bool fast = false;
    int reps = 200;
    long stride = 0; // 0 = profile default
    std::uint64_t seed = kDefaultSeed;
    std::string out, critvals_table = "data/critical_values.txt";
};

int cmd_table1(const Table1Args& a) {
    const long stride = a.stride > 0 ? a.stride : (a.fast ? 4 : 1);
    std::cout << "scenario n hypothesis rate reference mean_t1 mean_t2 wall_s\n";
    for (ecp::Scenario s : ecp::builtin_scenarios()) {
        s.replications = a.reps;
        s.seed = a.seed;
        ecp::ScanConfig cfg;
        cfg.stride = stride;
        const double cv =
            resolve_critical_value(s.model.dim(), s.alpha, a.critvals_table, a.seed);
        const ecp::ScenarioResult r = ecp::run_scenario(s, cfg, cv);
        std::cout << s.name << ' ' << s.n << ' ' << (s.epidemic ? "h1" : "h0") << ' '
                  << std::fixed << std::setprecision(3) << r.rejection_rate << ' '
                  << s.reference_rate << ' ' << std::setprecision(1) << r.mean_t1 << ' '
                  << r.mean_t2 << ' ' << r.wall_seconds << "\n"
                  << std::defaultfloat;
        if (!a.out.empty())
            ecp::append_result(a.out, s, r);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Epidemic change-point detection for causal time series"};
    app.require_subcommand(1);

    TestArgs ta;
    auto* test = app.add_subcommand("test", "Run the scan test on a series");
    test->add_option("--input", ta.input, "single-column numeric CSV")->required();
    test->add_option("--model", ta.model, "ar1|arma11|arma11-zero|arch1|garch11")->required();
    test->add_option("--alpha", ta.alpha);
    test->add_option("--un", ta.un, "normalization window (default (ln n)^2.5)");
    test->add_option("--vn", ta.vn, "scan margin (default (ln n)^2)");
    test->add_option("--stride", ta.stride);
    test->add_option("--seed", ta.seed);
    test->add_option("--out", ta.out, "report file");
    test->add_option("--json", ta.json_out, "machine-readable report file");
    test->add_option("--heatmap", ta.heatmap, "long-form k1,k2,Q surface file");
    test->add_option("--critvals", ta.critvals_table, "critical value table file");
    test->add_option("--cv", ta.cv, "explicit critical value");
    test->add_option("--jobs", ta.jobs, "worker count (0 = auto)");

    SimArgs sa;
    auto* sim = app.add_subcommand("simulate", "Simulate a trajectory (optionally epidemic)");
    sim->add_option("--model", sa.model)->required();
    sim->add_option("--theta", sa.theta, "comma-separated parameters")->required();
    sim->add_option("--theta2", sa.theta2, "epidemic-regime parameters");
    sim->add_option("--tau1", sa.tau1);
    sim->add_option("--tau2", sa.tau2);
    sim->add_option("--n", sa.n);
    sim->add_option("--burnin", sa.burnin);
    sim->add_option("--seed", sa.seed);
    sim->add_option("--innovation", sa.innovation, "normal|uniform");
    sim->add_option("--out", sa.out, "output CSV")->required();

    CritArgs ca;
    auto* crit = app.add_subcommand("critvals", "Simulate limit-law critical values");
    crit->add_option("--d", ca.ds, "dimensions");
    crit->add_option("--alpha", ca.alphas, "levels");
    crit->add_option("--R", ca.R, "replications");
    crit->add_option("--m", ca.m, "grid size");
    crit->add_option("--seed", ca.seed);
    crit->add_option("--law", ca.law,
                     "null-law variant: pair (two independent bridges, default) or single");
    crit->add_option("--out", ca.out, "table file");

    Table1Args t1a;
    auto* t1 = app.add_subcommand("table1", "Run the built-in simulation study");
    t1->add_flag("--fast", t1a.fast, "stride-4 profile for quick checks");
    t1->add_option("--reps", t1a.reps);
    t1->add_option("--stride", t1a.stride);
    t1->add_option("--seed", t1a.seed);
    t1->add_option("--out", t1a.out, "append results to this file");
    t1->add_option("--critvals", t1a.critvals_table, "critical value table file");

    try {
        app.parse(argc, argv);
        if (*test)
            return cmd_test(ta);
        if (*sim)
            return cmd_simulate(sa);
        if (*crit)
            return cmd_critvals(ca);
        if (*t1)
            return cmd_table1(t1a);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
