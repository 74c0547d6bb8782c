#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "ecp/qmle.hpp"

using namespace ecp;

namespace {

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

TimeSeries sim(ModelSpec model, const Vec& th, long n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate(model, th, n, 500, rng);
}

} // namespace

TEST_CASE("contrast terms") {
    // mean model: q_t = (X_t - f_hat)^2 since h = 1
    const TimeSeries X(std::vector<double>{1.0, 2.15});
    const Vec th = vec2(0.5, 0.5); // f_hat_2 = 1.0, residual 1.15
    CHECK(q_term({Family::Ar1Mean}, th, X, 2) == doctest::Approx(1.3225).epsilon(1e-12));

    // variance model: q_t = x^2/h + log h
    const TimeSeries Y(std::vector<double>{2.0, 1.0});
    const Vec thv = vec2(0.6, 0.4); // h_hat_2 = 2.2
    CHECK(q_term({Family::Arch1}, thv, Y, 2) ==
          doctest::Approx(1.0 / 2.2 + std::log(2.2)).epsilon(1e-12));

    // segment sum is additive
    const auto Z = sim({Family::Ar1Mean}, vec2(0.5, 0.3), 50, 11);
    const double whole = neg_qlik({Family::Ar1Mean}, vec2(0.5, 0.3), Z, {1, 50});
    const double split = neg_qlik({Family::Ar1Mean}, vec2(0.5, 0.3), Z, {1, 20}) +
                         neg_qlik({Family::Ar1Mean}, vec2(0.5, 0.3), Z, {21, 50});
    CHECK(whole == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("segment contrast ignores pre-segment terms but keeps their state") {
    // The truncated moments always start from t = 1, so the contrast over
    // {lo..hi} differs from the contrast over the re-indexed subseries.
    const auto X = sim({Family::Garch11}, vec3(0.15, 0.3, 0.25), 80, 21);
    const Vec th = vec3(0.15, 0.3, 0.25);
    double manual = 0.0;
    for (long t = 30; t <= 80; ++t)
        manual += q_term({Family::Garch11}, th, X, t);
    CHECK(neg_qlik({Family::Garch11}, th, X, {30, 80}) ==
          doctest::Approx(manual).epsilon(1e-10));
}

TEST_CASE("score and hessian match finite differences of the contrast") {
    struct Case {
        ModelSpec model;
        Vec sim_theta;
        Vec at;
    };
    const Case cases[] = {
        {{Family::Ar1Mean}, vec2(0.5, 0.3), vec2(0.4, 0.35)},
        {{Family::Arma11Mean}, vec3(1.0, 0.15, 0.2), vec3(0.9, 0.2, 0.15)},
        {{Family::Arma11Zero}, vec2(-0.4, -0.25), vec2(-0.3, -0.2)},
        {{Family::Arch1}, vec2(0.6, 0.4), vec2(0.5, 0.3)},
        {{Family::Garch11}, vec3(0.15, 0.3, 0.25), vec3(0.2, 0.25, 0.3)},
    };
    const double eps = 1e-6;
    for (const auto& c : cases) {
        const auto X = sim(c.model, c.sim_theta, 300, 33);
        const Segment T{1, 300};
        const auto sh = score_hessian(c.model, c.at, X, T);
        const double base = neg_qlik(c.model, c.at, X, T);
        for (int i = 0; i < c.model.dim(); ++i) {
            Vec up = c.at, dn = c.at;
            up[i] += eps;
            dn[i] -= eps;
            const double fd =
                (neg_qlik(c.model, up, X, T) - neg_qlik(c.model, dn, X, T)) / (2 * eps);
            CHECK(sh.score[i] ==
                  doctest::Approx(fd).epsilon(1e-4).scale(std::max(1.0, std::abs(base))));
            const auto shu = score_hessian(c.model, up, X, T);
            const auto shd = score_hessian(c.model, dn, X, T);
            for (int j = 0; j < c.model.dim(); ++j)
                CHECK(sh.hess(i, j) ==
                      doctest::Approx((shu.score[j] - shd.score[j]) / (2 * eps))
                          .epsilon(1e-4)
                          .scale(std::max(1.0, std::abs(base))));
        }
    }
}

TEST_CASE("fit recovers simulation parameters") {
    struct Case {
        ModelSpec model;
        Vec theta;
        double tol;
    };
    const Case cases[] = {
        {{Family::Ar1Mean}, vec2(2.0, 0.3), 0.1},
        {{Family::Arma11Mean}, vec3(1.0, 0.15, 0.2), 0.15},
        {{Family::Arma11Zero}, vec2(-0.4, -0.25), 0.1},
        {{Family::Arch1}, vec2(0.6, 0.4), 0.12},
        {{Family::Garch11}, vec3(0.15, 0.3, 0.25), 0.2},
    };
    for (const auto& c : cases) {
        const auto X = sim(c.model, c.theta, 4000, 2024);
        const auto f = fit(c.model, X, {1, X.n()});
        REQUIRE(f.converged);
        for (int i = 0; i < c.model.dim(); ++i)
            CHECK(std::abs(f.theta[i] - c.theta[i]) < c.tol * std::max(1.0, std::abs(c.theta[i])));
        CHECK(f.neg_qlik <= neg_qlik(c.model, c.theta, X, {1, X.n()}) + 1e-8);
    }
}

TEST_CASE("fit on the large-scale ar1 row") {
    std::mt19937_64 rng(5);
    const auto X = simulate({Family::Ar1Mean}, vec2(813.0, 0.3), 1000, 500, rng);
    const auto f = fit({Family::Ar1Mean}, X, {1, 1000});
    REQUIRE(f.converged);
    CHECK(f.theta[0] == doctest::Approx(813.0).epsilon(0.05));
    CHECK(f.theta[1] == doctest::Approx(0.3).epsilon(0.2));
}

TEST_CASE("argmin is invariant to objective scaling") {
    const auto X = sim({Family::Garch11}, vec3(0.15, 0.3, 0.25), 800, 909);
    FitOptions a, b;
    a.objective_scale = 1.0;
    b.objective_scale = 0.5;
    const auto fa = fit({Family::Garch11}, X, {1, 800}, std::nullopt, a);
    const auto fb = fit({Family::Garch11}, X, {1, 800}, std::nullopt, b);
    REQUIRE(fa.converged);
    REQUIRE(fb.converged);
    for (int i = 0; i < 3; ++i)
        CHECK(fa.theta[i] == doctest::Approx(fb.theta[i]).epsilon(1e-5).scale(1.0));
    CHECK(fa.neg_qlik == doctest::Approx(fb.neg_qlik).epsilon(1e-8));
}

TEST_CASE("warm start does not move the optimum") {
    const auto X = sim({Family::Arma11Zero}, vec2(-0.4, -0.25), 600, 404);
    const auto cold = fit({Family::Arma11Zero}, X, {1, 600});
    Vec near = cold.theta;
    near[0] += 0.03;
    near[1] -= 0.02;
    const auto warm = fit({Family::Arma11Zero}, X, {1, 600}, near);
    REQUIRE(cold.converged);
    REQUIRE(warm.converged);
    CHECK(warm.theta[0] == doctest::Approx(cold.theta[0]).epsilon(1e-6).scale(1.0));
    CHECK(warm.theta[1] == doctest::Approx(cold.theta[1]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("G and F are symmetric and G is positive semidefinite") {
    const auto X = sim({Family::Garch11}, vec3(0.15, 0.3, 0.25), 600, 123);
    const auto f = fit({Family::Garch11}, X, {1, 600});
    REQUIRE(f.converged);
    CHECK((f.G - f.G.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((f.F - f.F.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(f.G);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::abs(es.eigenvalues().maxCoeff()));
}

TEST_CASE("mean-family information identity: F is about G/2 under normal noise") {
    const auto X = sim({Family::Ar1Mean}, vec2(2.0, 0.3), 20000, 6060);
    const auto f = fit({Family::Ar1Mean}, X, {1, X.n()});
    REQUIRE(f.converged);
    const Mat ratio = f.G * 0.5 - f.F;
    CHECK(ratio.cwiseAbs().maxCoeff() / f.F.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("normalization matrix") {
    const auto X = sim({Family::Arma11Zero}, vec2(-0.4, -0.25), 1000, 31415);
    const auto s = sigma_hat({Family::Arma11Zero}, X, 125);
    CHECK(s.used_segments[0]);
    CHECK(s.used_segments[1]);
    CHECK(s.used_segments[2]);
    CHECK((s.sigma - s.sigma.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(s.sigma);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::abs(es.eigenvalues().maxCoeff()));
    CHECK(es.eigenvalues().maxCoeff() > 0.0);
}

TEST_CASE("fit stays inside the constraint box") {
    // Deliberately explosive-looking data still yields an admissible fit.
    std::vector<double> v(200);
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = std::pow(1.02, double(i)) * ((i % 2) ? 1.0 : -0.8);
    const TimeSeries X(std::move(v));
    const auto f = fit({Family::Ar1Mean}, X, {1, 200});
    CHECK(in_constraint_region({Family::Ar1Mean}, f.theta));
    const auto g = fit({Family::Garch11}, X, {1, 200});
    CHECK(in_constraint_region({Family::Garch11}, g.theta));
    CHECK(g.theta[0] >= kAlpha0Floor);
}
