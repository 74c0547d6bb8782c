#include "ecp/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ecp/critvals.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecp {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

} // namespace

std::vector<Scenario> builtin_scenarios() {
    struct Row {
        const char* model;
        Vec theta0;
        Vec theta2;
        double level500, level1000, power500, power1000;
    };
    const std::vector<Row> rows = {
        {"ar1", vec2(813.0, 0.3), vec2(933.0, 0.24), 0.025, 0.035, 1.000, 1.000},
        {"arma11-zero", vec2(-0.4, -0.25), vec2(-0.4, 0.1), 0.045, 0.050, 0.760, 0.990},
        {"arma11", vec3(1.0, 0.15, 0.2), vec3(1.0, 0.5, 0.2), 0.065, 0.060, 0.925, 1.000},
        {"arch1", vec2(0.6, 0.4), vec2(0.2, 0.4), 0.035, 0.045, 0.910, 0.995},
        {"garch11", vec3(0.15, 0.3, 0.25), vec3(0.15, 0.3, 0.55), 0.080, 0.060, 0.730, 0.920},
    };
    std::vector<Scenario> out;
    for (const Row& r : rows) {
        for (long n : {500L, 1000L}) {
            Scenario level;
            level.model = ModelSpec::from_name(r.model);
            level.n = n;
            level.theta1 = r.theta0;
            level.epidemic = false;
            level.name = std::string(r.model) + "-level-n" + std::to_string(n);
            level.reference_rate = n == 500 ? r.level500 : r.level1000;
            out.push_back(level);

            Scenario power = level;
            power.epidemic = true;
            power.theta2 = r.theta2;
            power.name = std::string(r.model) + "-power-n" + std::to_string(n);
            power.reference_rate = n == 500 ? r.power500 : r.power1000;
            out.push_back(power);
        }
    }
    return out;
}

std::uint64_t replication_seed(const Scenario& s, int replication_index) {
    return derive_seed(s.seed ^ fnv1a(s.name), static_cast<std::uint64_t>(replication_index));
}

namespace {

TimeSeries simulate_replication(const Scenario& s, int rep) {
    std::mt19937_64 rng(replication_seed(s, rep));
    if (!s.epidemic)
        return simulate(s.model, s.theta1, s.n, s.burn_in, rng, s.innovation);
    EpidemicScenario scen{s.theta1, s.theta2, s.tau1, s.tau2, s.n};
    return simulate_epidemic(s.model, scen, s.burn_in, rng, s.innovation).series;
}

ScanConfig rep_config(const Scenario& s, const ScanConfig& overrides, double critical_value) {
    ScanConfig cfg = overrides;
    cfg.alpha = s.alpha;
    cfg.critical_value = critical_value;
    cfg.parallelism = 1; // replications own the parallelism
    cfg.max_surface_pairs = 0; // surfaces are not kept in the loop
    cfg.surface_top_k = 1;
    return cfg;
}

} // namespace

ScenarioResult run_scenario(const Scenario& s, const ScanConfig& overrides,
                            double critical_value) {
    const auto t0 = std::chrono::steady_clock::now();
    const int R = s.replications;
    ScenarioResult res;
    res.q_values.assign(static_cast<size_t>(R), std::nan(""));
    res.t1_hats.assign(static_cast<size_t>(R), 0);
    res.t2_hats.assign(static_cast<size_t>(R), 0);
    res.rejected.assign(static_cast<size_t>(R), false);
    std::vector<char> failed(static_cast<size_t>(R), 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int rep = 0; rep < R; ++rep) {
        try {
            const TimeSeries X = simulate_replication(s, rep);
            const ScanReport r = run_scan(s.model, X, rep_config(s, overrides, critical_value));
            res.q_values[static_cast<size_t>(rep)] = r.Q_n;
            res.t1_hats[static_cast<size_t>(rep)] = r.t1_hat;
            res.t2_hats[static_cast<size_t>(rep)] = r.t2_hat;
            res.rejected[static_cast<size_t>(rep)] = r.reject;
        } catch (const std::exception&) {
            failed[static_cast<size_t>(rep)] = 1;
        }
    }

    long rejections = 0, reject_t1 = 0, reject_t2 = 0;
    for (int rep = 0; rep < R; ++rep) {
        res.failures += failed[static_cast<size_t>(rep)];
        if (res.rejected[static_cast<size_t>(rep)]) {
            ++rejections;
            reject_t1 += res.t1_hats[static_cast<size_t>(rep)];
            reject_t2 += res.t2_hats[static_cast<size_t>(rep)];
        }
    }
    res.rejection_rate = static_cast<double>(rejections) / static_cast<double>(R);
    if (rejections > 0) {
        res.mean_t1 = static_cast<double>(reject_t1) / static_cast<double>(rejections);
        res.mean_t2 = static_cast<double>(reject_t2) / static_cast<double>(rejections);
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

ScanReport surface_dump(const Scenario& s, int replication_index, const ScanConfig& overrides,
                        double critical_value) {
    if (replication_index < 0 || replication_index >= s.replications)
        throw std::out_of_range("surface_dump: replication index out of range");
    const TimeSeries X = simulate_replication(s, replication_index);
    ScanConfig cfg = overrides;
    cfg.alpha = s.alpha;
    cfg.critical_value = critical_value;
    return run_scan(s.model, X, cfg);
}

namespace {

Vec parse_theta(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        vals.push_back(std::stod(tok));
    Vec v(static_cast<long>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i)
        v[static_cast<long>(i)] = vals[i];
    return v;
}

std::string theta_text(const Vec& v) {
    std::ostringstream os;
    for (long i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    return os.str();
}

} // namespace

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open scenario file: " + path);
    Scenario s;
    bool have_model = false, have_theta = false;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        auto trim = [](std::string t) {
            const auto a = t.find_first_not_of(" \t\r");
            const auto b = t.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "name")
            s.name = val;
        else if (key == "model") {
            s.model = ModelSpec::from_name(val);
            have_model = true;
        } else if (key == "hypothesis")
            s.epidemic = val == "h1" || val == "H1";
        else if (key == "theta1" || key == "theta0") {
            s.theta1 = parse_theta(val);
            have_theta = true;
        } else if (key == "theta2")
            s.theta2 = parse_theta(val);
        else if (key == "tau1")
            s.tau1 = std::stod(val);
        else if (key == "tau2")
            s.tau2 = std::stod(val);
        else if (key == "n")
            s.n = std::stol(val);
        else if (key == "replications")
            s.replications = std::stoi(val);
        else if (key == "alpha")
            s.alpha = std::stod(val);
        else if (key == "seed")
            s.seed = std::stoull(val);
        else if (key == "burn_in")
            s.burn_in = std::stol(val);
        else if (key == "innovation")
            s.innovation = val == "uniform" ? Innovation::Uniform : Innovation::Normal;
        else
            throw std::runtime_error("unknown scenario key: " + key);
    }
    if (!have_model || !have_theta)
        throw std::runtime_error("scenario file missing model/theta: " + path);
    if (s.name.empty())
        s.name = "scenario";
    if (s.epidemic && s.theta2.size() == 0)
        throw std::runtime_error("H1 scenario without theta2: " + path);
    return s;
}

void write_scenario_file(const Scenario& s, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f << "name = " << s.name << "\n";
    f << "model = " << s.model.name() << "\n";
    f << "hypothesis = " << (s.epidemic ? "h1" : "h0") << "\n";
    f << "theta1 = " << theta_text(s.theta1) << "\n";
    if (s.epidemic) {
        f << "theta2 = " << theta_text(s.theta2) << "\n";
        f << "tau1 = " << s.tau1 << "\n";
        f << "tau2 = " << s.tau2 << "\n";
    }
    f << "n = " << s.n << "\n";
    f << "replications = " << s.replications << "\n";
    f << "alpha = " << s.alpha << "\n";
    f << "seed = " << s.seed << "\n";
    f << "burn_in = " << s.burn_in << "\n";
    f << "innovation = " << (s.innovation == Innovation::Uniform ? "uniform" : "normal")
      << "\n";
}

void append_result(const std::string& path, const Scenario& s, const ScenarioResult& r) {
    const bool fresh = !std::ifstream(path).good();
    std::ofstream f(path, std::ios::app);
    if (!f)
        throw std::runtime_error("cannot open results file: " + path);
    if (fresh)
        f << "scenario n rejection_rate mean_t1 mean_t2 wall_time seed\n";
    f << s.name << ' ' << s.n << ' ' << r.rejection_rate << ' ' << r.mean_t1 << ' '
      << r.mean_t2 << ' ' << r.wall_seconds << ' ' << s.seed << '\n';
}

} // namespace ecp
