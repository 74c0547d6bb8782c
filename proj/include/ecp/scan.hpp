#pragma once

#include <utility>
#include <vector>

#include "ecp/qmle.hpp"

namespace ecp {

struct ScanConfig {
    long u_n = 0;  // 0 = default_windows(n)
    long v_n = 0;  // 0 = default_windows(n)
    double alpha = 0.05;
    long stride = 1;
    int parallelism = 0; // worker hint; 0 = library default
    double critical_value = 0.0; // c_{d,alpha}, supplied by the caller
    FitOptions fit_options{};
    // Full surfaces above this many pairs are truncated to the top values
    // plus the maximum (only needed for heatmap output).
    long max_surface_pairs = 10'000'000;
    long surface_top_k = 1000;
};

struct PairStat {
    long k1 = 0;
    long k2 = 0;
    double q = 0.0;
};

struct ScanReport {
    double Q_n = 0.0;
    long t1_hat = 0;
    long t2_hat = 0;
    double critical_value = 0.0;
    bool reject = false;
    std::vector<PairStat> surface;
    bool surface_truncated = false;
    std::vector<SegmentFit> regime_fits; // T_{1,t1}, T_{t1+1,t2}, T_{t2+1,n}
    SandwichMatrix sigma;
    long failed_pairs = 0;
    long total_pairs = 0;
    long u_n = 0;
    long v_n = 0;
};

/// Raised when every term of the normalization matrix was singular.
struct DegenerateNormalization : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// u_n = floor((ln n)^{5/2}), v_n = floor((ln n)^2).
std::pair<long, long> default_windows(long n);

/// Admissible break pairs: v_n <= k1 < k2 <= n - v_n with k2 - k1 >= v_n,
/// thinned by stride on both coordinates (boundary pairs always kept).
std::vector<std::pair<long, long>> scan_set(long n, long v_n, long stride = 1);

/// Weighted three-estimate contrast of the break pair.
Vec c_vector(long n, long k1, long k2, const Vec& fit_left, const Vec& fit_mid,
             const Vec& fit_right);

/// Quadratic form C' Sigma C.
double q_pair(const Vec& c, const SandwichMatrix& sigma);

/// Full scan with cached left/right fits and warm-started middle fits;
/// pair rows run in parallel (OpenMP). Deterministic for any worker count.
ScanReport run_scan(ModelSpec model, const TimeSeries& X, const ScanConfig& config);

/// Serial reference implementation; must produce a report identical to
/// run_scan.
ScanReport run_scan_serial(ModelSpec model, const TimeSeries& X, const ScanConfig& config);

} // namespace ecp
