#include <doctest.h>

#include <filesystem>
#include <set>

#include "ecp/montecarlo.hpp"

using namespace ecp;

TEST_CASE("built-in study covers all five families at both lengths") {
    const auto scenarios = builtin_scenarios();
    CHECK(scenarios.size() == 20);

    std::set<std::string> names;
    int h0 = 0, h1 = 0;
    for (const auto& s : scenarios) {
        CHECK(names.insert(s.name).second); // unique names
        CHECK((s.n == 500 || s.n == 1000));
        CHECK(s.replications == 200);
        CHECK(s.alpha == 0.05);
        CHECK(s.reference_rate >= 0.0);
        CHECK(s.reference_rate <= 1.0);
        s.epidemic ? ++h1 : ++h0;
        // every scenario is simulable: regimes admit a second moment
        const double nrm2 = innovation_norm(s.innovation, 2.0);
        CHECK(validate_params(s.model, s.theta1, 2.0, nrm2));
        if (s.epidemic)
            CHECK(validate_params(s.model, s.theta2, 2.0, nrm2));
        // null regimes also satisfy the fourth-moment condition
        const double nrm4 = innovation_norm(s.innovation, 4.0);
        CHECK(validate_params(s.model, s.theta1, 4.0, nrm4));
    }
    CHECK(h0 == 10);
    CHECK(h1 == 10);

    // level and power variants of a family differ only in the epidemic regime
    const auto find = [&](const std::string& name) {
        for (const auto& s : scenarios)
            if (s.name == name)
                return s;
        throw std::out_of_range(name);
    };
    const auto l = find("garch11-level-n1000");
    const auto p = find("garch11-power-n1000");
    CHECK_FALSE(l.epidemic);
    CHECK(p.epidemic);
    CHECK((l.theta1 - p.theta1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.n == p.n);
    CHECK(p.theta2[2] == doctest::Approx(0.55));
}

TEST_CASE("replication seeds differ across scenarios and replications") {
    const auto scenarios = builtin_scenarios();
    const auto& a = scenarios[0];
    const auto& b = scenarios[1];
    CHECK(replication_seed(a, 0) != replication_seed(a, 1));
    CHECK(replication_seed(a, 0) != replication_seed(b, 0));
    CHECK(replication_seed(a, 5) == replication_seed(a, 5));
}

TEST_CASE("run_scenario is deterministic and fills per-replication detail") {
    Scenario s;
    s.name = "tiny";
    s.model = {Family::Arma11Zero};
    s.epidemic = true;
    s.theta1 = Vec(2);
    s.theta1 << -0.4, -0.25;
    s.theta2 = Vec(2);
    s.theta2 << -0.4, 0.1;
    s.n = 300;
    s.replications = 4;
    s.seed = 77;

    ScanConfig cfg;
    cfg.stride = 5;
    const auto r1 = run_scenario(s, cfg, 5.69);
    const auto r2 = run_scenario(s, cfg, 5.69);
    CHECK(r1.rejection_rate == r2.rejection_rate);
    CHECK(r1.q_values == r2.q_values);
    CHECK(r1.t1_hats == r2.t1_hats);
    REQUIRE(r1.q_values.size() == 4);
    REQUIRE(r1.rejected.size() == 4);
    long rejections = 0;
    for (size_t i = 0; i < 4; ++i) {
        CHECK(r1.q_values[i] >= 0.0);
        if (r1.rejected[i]) {
            ++rejections;
            CHECK(r1.q_values[i] > 5.69);
        }
    }
    CHECK(r1.rejection_rate == doctest::Approx(double(rejections) / 4.0));
}

TEST_CASE("an epidemic with identical regimes behaves like its null twin") {
    Scenario h0;
    h0.name = "twin";
    h0.model = {Family::Ar1Mean};
    h0.epidemic = false;
    h0.theta1 = Vec(2);
    h0.theta1 << 2.0, 0.3;
    h0.n = 300;
    h0.replications = 2;
    h0.seed = 99;

    Scenario h1 = h0;
    h1.epidemic = true;
    h1.theta2 = h0.theta1;

    ScanConfig cfg;
    cfg.stride = 6;
    const auto a = run_scenario(h0, cfg, 5.69);
    const auto b = run_scenario(h1, cfg, 5.69);
    CHECK(a.q_values == b.q_values);
}

TEST_CASE("surface dump reproduces the replication statistic") {
    Scenario s;
    s.name = "dump";
    s.model = {Family::Arma11Zero};
    s.epidemic = true;
    s.theta1 = Vec(2);
    s.theta1 << -0.4, -0.25;
    s.theta2 = Vec(2);
    s.theta2 << -0.4, 0.1;
    s.n = 300;
    s.replications = 2;
    s.seed = 31;

    ScanConfig cfg;
    cfg.stride = 5;
    const auto res = run_scenario(s, cfg, 5.69);
    const auto rep = surface_dump(s, 1, cfg, 5.69);
    CHECK(rep.Q_n == doctest::Approx(res.q_values[1]).epsilon(1e-12));
    CHECK(rep.t1_hat == res.t1_hats[1]);
    CHECK_FALSE(rep.surface.empty());
}

TEST_CASE("scenario file round trip") {
    Scenario s;
    s.name = "roundtrip";
    s.model = {Family::Garch11};
    s.epidemic = true;
    s.theta1 = Vec(3);
    s.theta1 << 0.15, 0.3, 0.25;
    s.theta2 = Vec(3);
    s.theta2 << 0.15, 0.3, 0.55;
    s.tau1 = 0.25;
    s.tau2 = 0.65;
    s.n = 750;
    s.replications = 37;
    s.alpha = 0.1;
    s.seed = 8765;
    s.burn_in = 300;
    s.innovation = Innovation::Uniform;

    const auto path = std::filesystem::temp_directory_path() / "ecp_scenario_test.txt";
    write_scenario_file(s, path.string());
    const auto t = parse_scenario_file(path.string());
    CHECK(t.name == s.name);
    CHECK(t.model.family == s.model.family);
    CHECK(t.epidemic == s.epidemic);
    CHECK((t.theta1 - s.theta1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.theta2 - s.theta2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(t.tau1 == doctest::Approx(s.tau1));
    CHECK(t.tau2 == doctest::Approx(s.tau2));
    CHECK(t.n == s.n);
    CHECK(t.replications == s.replications);
    CHECK(t.alpha == doctest::Approx(s.alpha));
    CHECK(t.seed == s.seed);
    CHECK(t.burn_in == s.burn_in);
    CHECK(t.innovation == s.innovation);
    std::filesystem::remove(path);
}
