#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecp/scan.hpp"

namespace ecp {

struct Scenario {
    std::string name;
    ModelSpec model;
    bool epidemic = false; // H0 when false
    Vec theta1;            // theta0 under H0
    Vec theta2;            // H1 only
    double tau1 = 0.3;
    double tau2 = 0.7;
    long n = 500;
    int replications = 200;
    double alpha = 0.05;
    std::uint64_t seed = 20210531;
    long burn_in = 500;
    Innovation innovation = Innovation::Normal;
    double reference_rate = -1.0; // published empirical rate, if any
};

struct ScenarioResult {
    double rejection_rate = 0.0;
    double mean_t1 = 0.0; // over rejecting replications
    double mean_t2 = 0.0;
    long failures = 0;
    double wall_seconds = 0.0;
    // Per-replication detail (index-aligned; failed replications hold
    // NaN statistics and reject=false).
    std::vector<double> q_values;
    std::vector<long> t1_hats;
    std::vector<long> t2_hats;
    std::vector<bool> rejected;
};

/// The twenty simulation-study scenarios: five model rows, level and
/// power variants, n in {500, 1000}.
std::vector<Scenario> builtin_scenarios();

/// Replication loop over independent trajectories; per-replication seeds
/// derive from (seed, name, index) so the result is identical for any
/// worker count.
ScenarioResult run_scenario(const Scenario& s, const ScanConfig& overrides,
                            double critical_value);

/// Seed for one replication of a scenario.
std::uint64_t replication_seed(const Scenario& s, int replication_index);

/// Scan report (with full surface) for one replication of the scenario.
ScanReport surface_dump(const Scenario& s, int replication_index, const ScanConfig& overrides,
                        double critical_value);

Scenario parse_scenario_file(const std::string& path);
void write_scenario_file(const Scenario& s, const std::string& path);

/// Appends one row (scenario, n, rejection_rate, mean_t1, mean_t2,
/// wall_time, seed) to a tabular results file; writes the header on
/// first use.
void append_result(const std::string& path, const Scenario& s, const ScenarioResult& r);

} // namespace ecp
