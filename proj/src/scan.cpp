#include "ecp/scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecp {

std::pair<long, long> default_windows(long n) {
    if (n < 30)
        throw std::invalid_argument("default_windows: need n >= 30");
    const double ln = std::log(static_cast<double>(n));
    const long u = static_cast<long>(std::floor(std::pow(ln, 2.5)));
    const long v = static_cast<long>(std::floor(ln * ln));
    if (3 * v > n)
        throw std::invalid_argument("default_windows: scan set empty for this n");
    return {u, v};
}

namespace {

std::vector<long> thinned(long lo, long hi, long stride) {
    std::vector<long> out;
    for (long k = lo; k <= hi; k += stride)
        out.push_back(k);
    if (out.back() != hi)
        out.push_back(hi); // boundary always included
    return out;
}

} // namespace

std::vector<std::pair<long, long>> scan_set(long n, long v_n, long stride) {
    if (v_n < 1 || stride < 1)
        throw std::invalid_argument("scan_set: need v_n >= 1, stride >= 1");
    if (3 * v_n > n)
        throw std::invalid_argument("scan_set: empty admissible set");
    std::vector<std::pair<long, long>> out;
    for (long k1 : thinned(v_n, n - 2 * v_n, stride))
        for (long k2 : thinned(k1 + v_n, n - v_n, stride))
            out.emplace_back(k1, k2);
    return out;
}

Vec c_vector(long n, long k1, long k2, const Vec& fit_left, const Vec& fit_mid,
             const Vec& fit_right) {
    const double len = static_cast<double>(k2 - k1);
    const double scale = len / std::pow(static_cast<double>(n), 1.5);
    return scale * ((n - len) * fit_mid - static_cast<double>(k1) * fit_left -
                    static_cast<double>(n - k2) * fit_right);
}

double q_pair(const Vec& c, const SandwichMatrix& sigma) {
    return c.dot(sigma.sigma * c);
}

namespace {

struct RowResult {
    double best_q = -1.0;
    long best_k1 = 0, best_k2 = 0;
    long failed = 0;
    std::vector<PairStat> surface;
};

struct CachedFit {
    Vec theta;
    bool ok = false;
};

ScanReport scan_impl(ModelSpec model, const TimeSeries& X, const ScanConfig& cfg,
                     bool parallel) {
    const long n = X.n();
    const int d = model.dim();
    long u = cfg.u_n, v = cfg.v_n;
    if (u == 0 || v == 0) {
        auto [du, dv] = default_windows(n);
        if (u == 0)
            u = du;
        if (v == 0)
            v = dv;
    }
    if (v < d + 1 || u < d + 1)
        throw std::invalid_argument("run_scan: windows shorter than d + 1");
    if (3 * v > n)
        throw std::invalid_argument("run_scan: empty admissible set");

    FitOptions opt = cfg.fit_options;
    if (opt.scale_bound <= 0.0)
        opt.scale_bound = default_scale_bound(model, X);
    FitOptions fast = opt;
    fast.compute_gf = false;

    ScanReport rep;
    rep.u_n = u;
    rep.v_n = v;
    rep.critical_value = cfg.critical_value;
    rep.sigma = sigma_hat(model, X, u, opt);
    if (!rep.sigma.used_segments[0] && !rep.sigma.used_segments[1] &&
        !rep.sigma.used_segments[2])
        throw DegenerateNormalization("run_scan: all normalization terms singular");

    const SegmentFit full = fit(model, X, {1, n}, std::nullopt, fast);

    const std::vector<long> k1s = thinned(v, n - 2 * v, cfg.stride);

    // Sequential warm-start chains for the O(n) boundary fits.
    std::map<long, CachedFit> left, right;
    {
        Vec warm = full.theta;
        for (long k1 : k1s) {
            SegmentFit f = fit(model, X, {1, k1}, warm, fast);
            left[k1] = {f.theta, f.converged};
            if (f.converged)
                warm = f.theta;
        }
        warm = full.theta;
        // Right fits keyed by every k2 any row can produce.
        std::vector<long> k2keys;
        for (long k1 : k1s)
            for (long k2 : thinned(k1 + v, n - v, cfg.stride))
                k2keys.push_back(k2);
        std::sort(k2keys.begin(), k2keys.end(), std::greater<>());
        k2keys.erase(std::unique(k2keys.begin(), k2keys.end()), k2keys.end());
        for (long k2 : k2keys) {
            SegmentFit f = fit(model, X, {k2 + 1, n}, warm, fast);
            right[k2] = {f.theta, f.converged};
            if (f.converged)
                warm = f.theta;
        }
    }

    const long rows = static_cast<long>(k1s.size());
    std::vector<RowResult> row_results(static_cast<size_t>(rows));
    long total_pairs = 0;
    for (long k1 : k1s)
        total_pairs += static_cast<long>(thinned(k1 + v, n - v, cfg.stride).size());
    const bool keep_full_surface = total_pairs <= cfg.max_surface_pairs;

    auto run_row = [&](long r) {
        const long k1 = k1s[static_cast<size_t>(r)];
        RowResult& rr = row_results[static_cast<size_t>(r)];
        const CachedFit& lf = left.at(k1);
        // Each row owns its warm-start chain, seeded from the full-series
        // fit, so rows are independent and the result is worker-count
        // invariant.
        Vec warm = full.theta;
        for (long k2 : thinned(k1 + v, n - v, cfg.stride)) {
            const CachedFit& rf = right.at(k2);
            if (!lf.ok || !rf.ok) {
                ++rr.failed;
                continue;
            }
            SegmentFit mid = fit(model, X, {k1 + 1, k2}, warm, fast);
            if (!mid.converged) {
                ++rr.failed;
                continue;
            }
            warm = mid.theta;
            const Vec c = c_vector(n, k1, k2, lf.theta, mid.theta, rf.theta);
            const double q = q_pair(c, rep.sigma);
            rr.surface.push_back({k1, k2, q});
            if (q > rr.best_q) {
                rr.best_q = q;
                rr.best_k1 = k1;
                rr.best_k2 = k2;
            }
        }
        if (!keep_full_surface && static_cast<long>(rr.surface.size()) > cfg.surface_top_k) {
            std::nth_element(rr.surface.begin(), rr.surface.begin() + cfg.surface_top_k,
                             rr.surface.end(),
                             [](const PairStat& a, const PairStat& b) { return a.q > b.q; });
            rr.surface.resize(static_cast<size_t>(cfg.surface_top_k));
        }
    };

    if (parallel) {
#ifdef _OPENMP
        const int workers =
            cfg.parallelism > 0 ? cfg.parallelism : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (long r = 0; r < rows; ++r)
            run_row(r);
#else
        for (long r = 0; r < rows; ++r)
            run_row(r);
#endif
    } else {
        for (long r = 0; r < rows; ++r)
            run_row(r);
    }

    // Deterministic reduction in row order; ties resolve to the smallest
    // k1, then smallest k2.
    rep.total_pairs = total_pairs;
    double best = -1.0;
    long bk1 = 0, bk2 = 0;
    for (const RowResult& rr : row_results) {
        rep.failed_pairs += rr.failed;
        if (rr.best_q > best) {
            best = rr.best_q;
            bk1 = rr.best_k1;
            bk2 = rr.best_k2;
        }
    }
    if (best < 0.0)
        throw std::runtime_error("run_scan: no admissible pair produced a statistic");
    if (rep.failed_pairs * 100 > rep.total_pairs)
        throw std::runtime_error("run_scan: more than 1% of segment fits failed");

    for (RowResult& rr : row_results) {
        rep.surface.insert(rep.surface.end(), rr.surface.begin(), rr.surface.end());
        rr.surface.clear();
        rr.surface.shrink_to_fit();
    }
    if (!keep_full_surface) {
        rep.surface_truncated = true;
        if (static_cast<long>(rep.surface.size()) > cfg.surface_top_k) {
            std::stable_sort(rep.surface.begin(), rep.surface.end(),
                             [](const PairStat& a, const PairStat& b) { return a.q > b.q; });
            rep.surface.resize(static_cast<size_t>(cfg.surface_top_k));
        }
    }

    rep.Q_n = best;
    rep.t1_hat = bk1;
    rep.t2_hat = bk2;
    rep.reject = rep.Q_n > rep.critical_value;
    rep.regime_fits.push_back(fit(model, X, {1, bk1}, left.at(bk1).theta, opt));
    rep.regime_fits.push_back(fit(model, X, {bk1 + 1, bk2}, std::nullopt, opt));
    rep.regime_fits.push_back(fit(model, X, {bk2 + 1, n}, right.at(bk2).theta, opt));
    return rep;
}

} // namespace

ScanReport run_scan(ModelSpec model, const TimeSeries& X, const ScanConfig& config) {
    return scan_impl(model, X, config, true);
}

ScanReport run_scan_serial(ModelSpec model, const TimeSeries& X, const ScanConfig& config) {
    return scan_impl(model, X, config, false);
}

} // namespace ecp
