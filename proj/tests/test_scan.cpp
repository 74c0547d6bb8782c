#include <doctest.h>

#include <algorithm>
#include <random>

#include "ecp/scan.hpp"

using namespace ecp;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

TimeSeries epidemic_series(long n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    EpidemicScenario scen{vec2(-0.4, -0.25), vec2(-0.4, 0.1), 0.3, 0.7, n};
    return simulate_epidemic({Family::Arma11Zero}, scen, 500, rng).series;
}

} // namespace

TEST_CASE("default windows are floor((ln n)^2.5) and floor((ln n)^2)") {
    CHECK(default_windows(500) == std::pair<long, long>{96, 38});
    CHECK(default_windows(1000) == std::pair<long, long>{125, 47});
    CHECK(default_windows(455) == std::pair<long, long>{92, 37});
    CHECK(default_windows(2000) == std::pair<long, long>{159, 57});
    CHECK_THROWS(default_windows(20));
}

TEST_CASE("scan set enumeration") {
    // n = 20, v = 5: pairs 5 <= k1 < k2 <= 15 with k2 - k1 >= 5.
    const auto pairs = scan_set(20, 5);
    CHECK(pairs.size() == 21);
    for (auto [k1, k2] : pairs) {
        CHECK(k1 >= 5);
        CHECK(k2 <= 15);
        CHECK(k2 - k1 >= 5);
    }
    // exhaustive cross-check on a batch of small cases
    for (long n : {15L, 20L, 31L, 50L}) {
        for (long v : {3L, 5L, 8L}) {
            if (3 * v > n) {
                CHECK_THROWS(scan_set(n, v));
                continue;
            }
            long count = 0;
            for (long k1 = v; k1 <= n - v; ++k1)
                for (long k2 = k1 + v; k2 <= n - v; ++k2)
                    ++count;
            CHECK(scan_set(n, v).size() == size_t(count));
        }
    }
    CHECK_THROWS(scan_set(10, 5)); // empty admissible set
}

TEST_CASE("scan set thinning keeps boundaries and never exceeds the exact set") {
    const auto exact = scan_set(200, 20);
    const auto thin = scan_set(200, 20, 4);
    CHECK(thin.size() < exact.size());
    for (auto p : thin)
        CHECK(std::find(exact.begin(), exact.end(), p) != exact.end());
    // the extreme admissible indexes survive thinning
    auto has = [&](long k1, long k2) {
        return std::find(thin.begin(), thin.end(), std::pair<long, long>{k1, k2}) != thin.end();
    };
    CHECK(has(20, 180));
}

TEST_CASE("contrast vector") {
    Vec l = vec2(1.0, 0.0), m = vec2(2.0, 0.0), r = vec2(3.0, 0.0);
    // n=10, k1=4, k2=8: (k2-k1)/n^1.5 * ((n-(k2-k1)) m - k1 l - (n-k2) r)
    const Vec c = c_vector(10, 4, 8, l, m, r);
    CHECK(c[0] == doctest::Approx((4.0 / std::pow(10.0, 1.5)) * (6.0 * 2.0 - 4.0 * 1.0 - 2.0 * 3.0))
                      .epsilon(1e-12));
    // frozen coefficient: 4 * 6 / 10^1.5
    CHECK((4.0 / std::pow(10.0, 1.5)) * 6.0 == doctest::Approx(0.7589466384).epsilon(1e-9));

    // equal estimates cancel exactly: (n - (k2-k1)) - k1 - (n-k2) = 0
    const Vec z = c_vector(500, 150, 350, m, m, m);
    CHECK(z.cwiseAbs().maxCoeff() < 1e-12);

    // linear in each argument
    const Vec c2 = c_vector(10, 4, 8, l, 2.0 * m, r);
    const Vec diff = c2 - c_vector(10, 4, 8, l, m, r);
    const Vec direct = c_vector(10, 4, 8, 0.0 * l, m, 0.0 * r);
    CHECK((diff - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quadratic form") {
    SandwichMatrix s;
    s.sigma = Mat::Zero(2, 2);
    s.sigma(0, 0) = 2.0;
    s.sigma(1, 1) = 3.0;
    CHECK(q_pair(vec2(1.0, -1.0), s) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(q_pair(vec2(0.0, 0.0), s) == 0.0);
}

TEST_CASE("serial and parallel scans agree exactly") {
    const auto X = epidemic_series(300, 2222);
    ScanConfig cfg;
    cfg.critical_value = 5.69;
    cfg.stride = 3;
    const auto a = run_scan_serial({Family::Arma11Zero}, X, cfg);
    const auto b = run_scan({Family::Arma11Zero}, X, cfg);
    CHECK(a.Q_n == b.Q_n);
    CHECK(a.t1_hat == b.t1_hat);
    CHECK(a.t2_hat == b.t2_hat);
    CHECK(a.total_pairs == b.total_pairs);
    CHECK(a.failed_pairs == b.failed_pairs);
    REQUIRE(a.surface.size() == b.surface.size());
    for (size_t i = 0; i < a.surface.size(); ++i) {
        CHECK(a.surface[i].k1 == b.surface[i].k1);
        CHECK(a.surface[i].k2 == b.surface[i].k2);
        CHECK(a.surface[i].q == b.surface[i].q);
    }
}

TEST_CASE("worker count does not change the report") {
    const auto X = epidemic_series(300, 999);
    ScanConfig cfg;
    cfg.critical_value = 5.69;
    cfg.stride = 4;
    cfg.parallelism = 1;
    const auto one = run_scan({Family::Arma11Zero}, X, cfg);
    cfg.parallelism = 4;
    const auto four = run_scan({Family::Arma11Zero}, X, cfg);
    CHECK(one.Q_n == four.Q_n);
    CHECK(one.t1_hat == four.t1_hat);
    CHECK(one.t2_hat == four.t2_hat);
    CHECK(one.failed_pairs == four.failed_pairs);
}

TEST_CASE("scan report structure on an epidemic series") {
    const auto X = epidemic_series(300, 7);
    ScanConfig cfg;
    cfg.critical_value = 5.69;
    cfg.stride = 2;
    const auto rep = run_scan({Family::Arma11Zero}, X, cfg);
    CHECK(rep.u_n == default_windows(300).first);
    CHECK(rep.v_n == default_windows(300).second);
    CHECK(rep.total_pairs > 0);
    CHECK(rep.Q_n > 0.0);
    CHECK(rep.t1_hat >= rep.v_n);
    CHECK(rep.t2_hat <= 300 - rep.v_n);
    CHECK(rep.t2_hat - rep.t1_hat >= rep.v_n);
    REQUIRE(rep.regime_fits.size() == 3);
    for (const auto& f : rep.regime_fits)
        CHECK(f.theta.size() == 2);
    // the reported maximum really is the surface maximum
    double mx = 0.0;
    for (const auto& p : rep.surface)
        mx = std::max(mx, p.q);
    CHECK(rep.Q_n == doctest::Approx(mx).epsilon(1e-12));
    CHECK(rep.reject == (rep.Q_n > cfg.critical_value));
}

TEST_CASE("strided maximum never exceeds the exact maximum") {
    const auto X = epidemic_series(250, 1234);
    ScanConfig cfg;
    cfg.critical_value = 5.69;
    cfg.stride = 1;
    const auto exact = run_scan({Family::Arma11Zero}, X, cfg);
    cfg.stride = 5;
    const auto strided = run_scan({Family::Arma11Zero}, X, cfg);
    CHECK(strided.Q_n <= exact.Q_n + 1e-12);
    CHECK(strided.total_pairs < exact.total_pairs);
}

TEST_CASE("surface truncation keeps the argmax") {
    const auto X = epidemic_series(300, 654);
    ScanConfig cfg;
    cfg.critical_value = 5.69;
    cfg.stride = 2;
    cfg.max_surface_pairs = 10;
    cfg.surface_top_k = 25;
    const auto rep = run_scan({Family::Arma11Zero}, X, cfg);
    CHECK(rep.surface_truncated);
    CHECK(rep.surface.size() <= 25);
    const bool has_argmax =
        std::any_of(rep.surface.begin(), rep.surface.end(), [&](const PairStat& p) {
            return p.k1 == rep.t1_hat && p.k2 == rep.t2_hat && p.q == rep.Q_n;
        });
    CHECK(has_argmax);
}
