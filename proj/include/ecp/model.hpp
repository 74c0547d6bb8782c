#pragma once

#include <Eigen/Core>
#include <array>
#include <random>
#include <string>

#include "ecp/time_series.hpp"

namespace ecp {

// All parameter dimensions are <= 3, so vectors/matrices are stack-allocated.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

enum class Family {
    Ar1Mean,    // X_t = a0 + a1 X_{t-1} + xi_t                theta = (a0, a1)
    Arma11Mean, // X_t = a0 + a1 X_{t-1} + xi_t + b1 xi_{t-1}  theta = (a0, a1, b1)
    Arma11Zero, // zero-mean ARMA(1,1)                         theta = (a1, b1)
    Arch1,      // X_t = sigma_t xi_t, s2 = a0 + a1 X_{t-1}^2  theta = (a0, a1)
    Garch11,    // s2 = a0 + a1 X_{t-1}^2 + b1 s2_{t-1}        theta = (a0, a1, b1)
};

enum class Innovation { Normal, Uniform };

struct ModelSpec {
    Family family = Family::Ar1Mean;

    int dim() const;
    // Conditional-mean model (unit conditional variance)?
    bool is_mean_model() const;
    const char* name() const;

    static ModelSpec from_name(const std::string& name);
};

/// Truncated conditional moments at time t: f = f_hat_theta^t, h = h_hat_theta^t.
struct Moments {
    double f = 0.0;
    double h = 1.0;
};

struct MomentDerivs {
    Vec grad_f, grad_h;
    Mat hess_f, hess_h;
};

struct EpidemicScenario {
    Vec theta1;
    Vec theta2;
    double tau1 = 0.3;
    double tau2 = 0.7;
    long n = 0;
};

struct EpidemicSample {
    TimeSeries series;
    long t1 = 0;
    long t2 = 0;
};

// Margins shrinking the open constraint region to a closed box the
// optimizer can work on.
inline constexpr double kMargin = 1e-3;
inline constexpr double kAlpha0Floor = 1e-6;
inline constexpr double kCoefCap = 0.999;
inline constexpr double kVarianceFloor = 1e-12;

/// L_r norm of |xi_0| for the supported innovation laws (unit variance).
double innovation_norm(Innovation law, double r);

/// Membership in the family's Theta(r) region (margin-shrunken).
bool validate_params(ModelSpec model, const Vec& theta, double r, double innovation_norm_r);

/// Membership in the optimizer's constraint box (no moment condition).
bool in_constraint_region(ModelSpec model, const Vec& theta);

Moments conditional_moments(ModelSpec model, const Vec& theta, const TimeSeries& X, long t);
MomentDerivs moment_derivatives(ModelSpec model, const Vec& theta, const TimeSeries& X, long t);

TimeSeries simulate(ModelSpec model, const Vec& theta, long n, long burn_in,
                    std::mt19937_64& rng, Innovation law = Innovation::Normal);

EpidemicSample simulate_epidemic(ModelSpec model, const EpidemicScenario& scen, long burn_in,
                                 std::mt19937_64& rng, Innovation law = Innovation::Normal);

} // namespace ecp
