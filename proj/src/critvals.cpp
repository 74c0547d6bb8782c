#include "ecp/critvals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecp {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over the combined stream position
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

void check_args(int d, int m) {
    if (d < 1)
        throw std::invalid_argument("sup_bridge: need d >= 1");
    if (m < 64)
        throw std::invalid_argument("sup_bridge: need grid size m >= 64");
}

// Turns m*d standard normal increments (coordinate-major blocks of m,
// starting at z[offset]) into a bridge on the m+1 point grid, with
// W(0) = W(1) = 0; sign flips the increments for the antithetic path.
std::vector<double> build_bridge(int d, int m, const std::vector<double>& z, size_t offset,
                                 double sign) {
    const double step = 1.0 / static_cast<double>(m);
    std::vector<double> W(static_cast<size_t>(m + 1) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        double b = 0.0;
        for (int j = 1; j <= m; ++j) {
            b += sign * z[offset + static_cast<size_t>(i) * m + j - 1] * std::sqrt(step);
            W[static_cast<size_t>(j) * d + i] = b;
        }
        const double b1 = W[static_cast<size_t>(m) * d + i];
        for (int j = 1; j <= m; ++j)
            W[static_cast<size_t>(j) * d + i] -= (j * step) * b1;
    }
    return W;
}

// max over grid pairs j < k of sum_i (A_i(j) - B_i(k))^2; A == B for the
// single-bridge law, independent paths for the pair law.
double sup_over_pairs(int d, int m, const std::vector<double>& A, const std::vector<double>& B) {
    if (d == 1) {
        if (&A == &B) {
            // max (a-b)^2 over one scalar path is (max - min)^2
            double lo = 0.0, hi = 0.0;
            for (int j = 1; j <= m; ++j) {
                lo = std::min(lo, A[static_cast<size_t>(j)]);
                hi = std::max(hi, A[static_cast<size_t>(j)]);
            }
            return (hi - lo) * (hi - lo);
        }
        // scan j ascending against suffix extremes of B over k > j
        std::vector<double> smax(static_cast<size_t>(m + 1)), smin(static_cast<size_t>(m + 1));
        smax[static_cast<size_t>(m)] = smin[static_cast<size_t>(m)] = B[static_cast<size_t>(m)];
        for (int k = m - 1; k >= 1; --k) {
            smax[static_cast<size_t>(k)] = std::max(B[static_cast<size_t>(k)], smax[static_cast<size_t>(k + 1)]);
            smin[static_cast<size_t>(k)] = std::min(B[static_cast<size_t>(k)], smin[static_cast<size_t>(k + 1)]);
        }
        double best = 0.0;
        for (int j = 0; j < m; ++j) {
            const double a = A[static_cast<size_t>(j)];
            const double lo = a - smin[static_cast<size_t>(j + 1)];
            const double hi = a - smax[static_cast<size_t>(j + 1)];
            best = std::max(best, std::max(lo * lo, hi * hi));
        }
        return best;
    }
    double best = 0.0;
    for (int j = 0; j < m; ++j) {
        const double* wj = &A[static_cast<size_t>(j) * d];
        for (int k = j + 1; k <= m; ++k) {
            const double* wk = &B[static_cast<size_t>(k) * d];
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = wj[i] - wk[i];
                s += diff * diff;
            }
            best = std::max(best, s);
        }
    }
    return best;
}

double sup_from_increments(int d, int m, BridgeLaw law, const std::vector<double>& z,
                           double sign) {
    const std::vector<double> W1 = build_bridge(d, m, z, 0, sign);
    if (law == BridgeLaw::Single)
        return sup_over_pairs(d, m, W1, W1);
    const std::vector<double> W2 =
        build_bridge(d, m, z, static_cast<size_t>(m) * d, sign);
    return sup_over_pairs(d, m, W1, W2);
}

size_t increment_count(int d, int m, BridgeLaw law) {
    return static_cast<size_t>(m) * d * (law == BridgeLaw::Pair ? 2 : 1);
}

std::vector<double> draw_increments(int d, int m, BridgeLaw law, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(increment_count(d, m, law));
    for (double& v : z)
        v = normal(rng);
    return z;
}

} // namespace

const char* to_string(BridgeLaw law) {
    return law == BridgeLaw::Single ? "single" : "pair";
}

BridgeLaw bridge_law_from_string(const std::string& name) {
    if (name == "single")
        return BridgeLaw::Single;
    if (name == "pair")
        return BridgeLaw::Pair;
    throw std::invalid_argument("unknown bridge law (expected single or pair): " + name);
}

double sample_sup_bridge(int d, int m, std::mt19937_64& rng, BridgeLaw law) {
    check_args(d, m);
    return sup_from_increments(d, m, law, draw_increments(d, m, law, rng), 1.0);
}

std::vector<double> sup_bridge_samples(int d, long R, int m, std::uint64_t seed,
                                       int parallelism, BridgeLaw law) {
    check_args(d, m);
    if (R < 2)
        throw std::invalid_argument("sup_bridge_samples: need R >= 2");
    std::vector<double> out(static_cast<size_t>(R));
    const long pairs = (R + 1) / 2;
#ifdef _OPENMP
    const int workers = parallelism > 0 ? parallelism : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
    for (long p = 0; p < pairs; ++p) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
        const auto z = draw_increments(d, m, law, rng);
        out[static_cast<size_t>(2 * p)] = sup_from_increments(d, m, law, z, 1.0);
        if (2 * p + 1 < R)
            out[static_cast<size_t>(2 * p + 1)] = sup_from_increments(d, m, law, z, -1.0);
    }
    return out;
}

QuantileEstimate critical_value(int d, double alpha, long R, int m, std::uint64_t seed,
                                BridgeLaw law) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("critical_value: alpha in (0,1)");
    if (R < 10000)
        throw std::invalid_argument("critical_value: need R >= 10^4");
    std::vector<double> s = sup_bridge_samples(d, R, m, seed, 0, law);
    std::sort(s.begin(), s.end());
    auto order_stat = [&](double p) {
        long k = static_cast<long>(std::ceil(p * static_cast<double>(R)));
        k = std::clamp(k, 1L, R);
        return s[static_cast<size_t>(k - 1)];
    };
    QuantileEstimate est;
    est.value = order_stat(1.0 - alpha);
    // Binomial/density method: se = sqrt(a(1-a)/R) / f(c), with the
    // density from a central quantile difference.
    const double h = std::max(0.005, 2.0 / std::sqrt(static_cast<double>(R)));
    const double qhi = order_stat(std::min(1.0 - alpha + h, 1.0 - 0.5 / R));
    const double qlo = order_stat(std::max(1.0 - alpha - h, 0.5 / R));
    est.std_error = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(R)) *
                    (qhi - qlo) / (2.0 * h);
    return est;
}

double p_value(double q, int d, long R, int m, std::uint64_t seed, BridgeLaw law) {
    if (q < 0.0)
        throw std::invalid_argument("p_value: q must be >= 0");
    const std::vector<double> s = sup_bridge_samples(d, R, m, seed, 0, law);
    const long count = std::count_if(s.begin(), s.end(), [&](double v) { return v >= q; });
    return static_cast<double>(count + 1) / static_cast<double>(R + 1);
}

const CriticalValueTable::Entry& CriticalValueTable::lookup(int d, double alpha) const {
    for (const auto& [key, entry] : entries)
        if (key.first == d && std::abs(key.second - alpha) < 1e-9)
            return entry;
    throw std::out_of_range("critical value table has no entry for this (d, alpha)");
}

CriticalValueTable CriticalValueTable::compute(const std::vector<int>& ds,
                                               const std::vector<double>& alphas, long R, int m,
                                               std::uint64_t seed, BridgeLaw law) {
    CriticalValueTable t;
    t.m = m;
    t.R = R;
    t.seed = seed;
    t.law = law;
    for (size_t i = 0; i < ds.size(); ++i) {
        // One sample set per d, shared across alphas.
        std::vector<double> s =
            sup_bridge_samples(ds[i], R, m, derive_seed(seed, 1000 + ds[i]), 0, law);
        std::sort(s.begin(), s.end());
        for (double a : alphas) {
            long k = std::clamp(static_cast<long>(std::ceil((1.0 - a) * R)), 1L, R);
            Entry e;
            e.c = s[static_cast<size_t>(k - 1)];
            const double h = std::max(0.005, 2.0 / std::sqrt(static_cast<double>(R)));
            auto os = [&](double p) {
                long kk = std::clamp(static_cast<long>(std::ceil(p * R)), 1L, R);
                return s[static_cast<size_t>(kk - 1)];
            };
            e.se = std::sqrt(a * (1.0 - a) / R) *
                   (os(std::min(1.0 - a + h, 1.0 - 0.5 / R)) -
                    os(std::max(1.0 - a - h, 0.5 / R))) /
                   (2.0 * h);
            t.entries[{ds[i], a}] = e;
        }
    }
    return t;
}

void CriticalValueTable::write(std::ostream& os) const {
    os << "d alpha c se m R seed law\n";
    for (const auto& [key, e] : entries) {
        os << key.first << ' ' << std::fixed << std::setprecision(6) << key.second << ' '
           << e.c << ' ' << e.se << ' ' << m << ' ' << R << ' ' << seed << ' '
           << to_string(law) << '\n';
    }
}

void CriticalValueTable::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    write(f);
}

CriticalValueTable CriticalValueTable::load(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open critical value table: " + path);
    std::string header;
    std::getline(f, header);
    CriticalValueTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream is(line);
        int d;
        double alpha;
        Entry e;
        if (!(is >> d >> alpha >> e.c >> e.se >> t.m >> t.R >> t.seed))
            throw std::runtime_error("malformed critical value table row: " + line);
        std::string law_name;
        if (is >> law_name)
            t.law = bridge_law_from_string(law_name);
        t.entries[{d, alpha}] = e;
    }
    if (t.entries.empty())
        throw std::runtime_error("critical value table is empty: " + path);
    return t;
}

} // namespace ecp
