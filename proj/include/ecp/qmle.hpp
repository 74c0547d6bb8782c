#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ecp/model.hpp"

namespace ecp {

/// One term of the Gaussian quasi-likelihood contrast:
/// (X_t - f_hat)^2 / h_hat + log(h_hat).
double q_term(ModelSpec model, const Vec& theta, const TimeSeries& X, long t);

/// Sum of q_term over the segment (the negated quasi-log-likelihood, up
/// to the constant factor that does not move the argmax).
double neg_qlik(ModelSpec model, const Vec& theta, const TimeSeries& X, Segment T);

struct ScoreHessian {
    Vec score; // sum_t dq_t/dtheta
    Mat hess;  // sum_t d2q_t/dtheta dtheta'
};

ScoreHessian score_hessian(ModelSpec model, const Vec& theta, const TimeSeries& X, Segment T);

struct FitOptions {
    double grad_tol = 1e-6; // scaled by max(1, |objective|)
    int max_iter = 200;
    // Multiplies the objective (and so its derivatives); the argmax is
    // invariant to it, which the property tests exercise.
    double objective_scale = 1.0;
    // The scan skips G/F assembly for the many throwaway segment fits.
    bool compute_gf = true;
    // Bound for intercept-like parameters, chosen from the data scale
    // when fitting; kept here so fits are reproducible.
    double scale_bound = 0.0; // 0 = derive from the series
};

struct SegmentFit {
    Vec theta;
    double neg_qlik = 0.0;
    double grad_norm = 0.0; // projected-gradient norm at theta
    bool converged = false;
    bool boundary = false;
    Mat G; // average score outer products at theta
    Mat F; // average per-term Hessian, symmetrized
};

/// Minimizes the segment contrast over the margin-shrunken constraint
/// box by projected Newton with backtracking; falls back to a bounded
/// Nelder-Mead restart if the line search stalls. Non-convergence is
/// reported in the fit, not thrown.
SegmentFit fit(ModelSpec model, const TimeSeries& X, Segment T,
               const std::optional<Vec>& init = std::nullopt, const FitOptions& opt = {});

/// Ĝ(T), F̂(T) evaluated at theta_hat.
std::pair<Mat, Mat> G_F_hat(ModelSpec model, const Vec& theta_hat, const TimeSeries& X, Segment T);

struct SandwichMatrix {
    Mat sigma;
    std::array<bool, 3> used_segments{false, false, false};
};

/// Three-segment normalization matrix: (1/3) sum of F G^{-1} F over
/// T_{1,u}, T_{u+1,n-u}, T_{n-u+1,n}; a term with numerically singular
/// G is replaced by zero.
SandwichMatrix sigma_hat(ModelSpec model, const TimeSeries& X, long u_n,
                         const FitOptions& opt = {});

// Constraint-box helpers shared with the scan.
Vec project_to_box(ModelSpec model, Vec theta, double scale_bound);
double default_scale_bound(ModelSpec model, const TimeSeries& X);
Vec default_init(ModelSpec model, const TimeSeries& X, Segment T);

// Reciprocal-condition threshold below which G_hat counts as singular.
inline constexpr double kRcondTol = 1e-10;

} // namespace ecp
