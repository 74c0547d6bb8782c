#pragma once

// Internal likelihood-sweep kernels. Each family evaluates its truncated
// conditional moment (f_hat for mean models, h_hat for variance models)
// by an O(1)-per-step recursion initialized at the zero-past state,
// together with analytic first and second derivatives of that recursion.
// Second derivatives are stored packed as the upper triangle, row-major:
// D=2 -> (00,01,11), D=3 -> (00,01,02,11,12,22).

#include <algorithm>
#include <cmath>

#include "ecp/model.hpp"

namespace ecp::detail {

constexpr int tri_size(int d) { return d * (d + 1) / 2; }

template <int D>
struct StepOut {
    double v;                    // f_hat (mean models) or h_hat (variance models)
    double g[D];                 // gradient wrt theta
    double h[tri_size(D)];       // packed Hessian wrt theta
};

struct Ar1Mean {
    static constexpr int D = 2;
    static constexpr bool kMean = true;
    struct State {};
    static void reset(const double*, State&) {}
    static void step_val(const double* th, double xp, State&, double& v) {
        v = th[0] + th[1] * xp;
    }
    static void step(const double* th, double xp, State& s, StepOut<D>& o) {
        step_val(th, xp, s, o.v);
        o.g[0] = 1.0;
        o.g[1] = xp;
        o.h[0] = o.h[1] = o.h[2] = 0.0;
    }
};

struct Arma11Zero {
    static constexpr int D = 2;
    static constexpr bool kMean = true;
    // f_t = (a1+b1) X_{t-1} - b1 f_{t-1}, f_1 = 0; equals the truncated
    // expansion (a1+b1) sum_{k>=1} (-b1)^{k-1} X_{t-k}.
    struct State {
        double f, g0, g1, h01, h11;
    };
    static void reset(const double*, State& s) { s = {0.0, 0.0, 0.0, 0.0, 0.0}; }
    static void step_val(const double* th, double xp, State& s, double& v) {
        s.f = (th[0] + th[1]) * xp - th[1] * s.f;
        v = s.f;
    }
    static void step(const double* th, double xp, State& s, StepOut<D>& o) {
        const double b = th[1];
        const double fp = s.f, g0p = s.g0, g1p = s.g1;
        s.f = (th[0] + b) * xp - b * fp;
        s.g0 = xp - b * g0p;
        s.g1 = xp - fp - b * g1p;
        s.h01 = -g0p - b * s.h01;
        s.h11 = -2.0 * g1p - b * s.h11;
        o.v = s.f;
        o.g[0] = s.g0;
        o.g[1] = s.g1;
        o.h[0] = 0.0;
        o.h[1] = s.h01;
        o.h[2] = s.h11;
    }
};

struct Arma11Mean {
    static constexpr int D = 3;
    static constexpr bool kMean = true;
    // f_t = a0 + (a1+b1) X_{t-1} - b1 f_{t-1}, f_1 = a0/(1+b1); state is
    // seeded so the first step lands exactly on the zero-past value.
    struct State {
        double f, g0, g1, g2, h02, h12, h22;
    };
    static void reset(const double* th, State& s) {
        const double c = 1.0 + th[2];
        s.f = th[0] / c;
        s.g0 = 1.0 / c;
        s.g1 = 0.0;
        s.g2 = -th[0] / (c * c);
        s.h02 = -1.0 / (c * c);
        s.h12 = 0.0;
        s.h22 = 2.0 * th[0] / (c * c * c);
    }
    static void step_val(const double* th, double xp, State& s, double& v) {
        s.f = th[0] + (th[1] + th[2]) * xp - th[2] * s.f;
        v = s.f;
    }
    static void step(const double* th, double xp, State& s, StepOut<D>& o) {
        const double b = th[2];
        const double fp = s.f, g0p = s.g0, g1p = s.g1, g2p = s.g2;
        s.f = th[0] + (th[1] + b) * xp - b * fp;
        s.g0 = 1.0 - b * g0p;
        s.g1 = xp - b * g1p;
        s.g2 = xp - fp - b * g2p;
        s.h02 = -g0p - b * s.h02;
        s.h12 = -g1p - b * s.h12;
        s.h22 = -2.0 * g2p - b * s.h22;
        o.v = s.f;
        o.g[0] = s.g0;
        o.g[1] = s.g1;
        o.g[2] = s.g2;
        o.h[0] = 0.0; // a0a0
        o.h[1] = 0.0; // a0a1
        o.h[2] = s.h02;
        o.h[3] = 0.0; // a1a1
        o.h[4] = s.h12;
        o.h[5] = s.h22;
    }
};

struct Arch1 {
    static constexpr int D = 2;
    static constexpr bool kMean = false;
    struct State {};
    static void reset(const double*, State&) {}
    static void step_val(const double* th, double xp, State&, double& v) {
        v = th[0] + th[1] * xp * xp;
    }
    static void step(const double* th, double xp, State& s, StepOut<D>& o) {
        step_val(th, xp, s, o.v);
        o.g[0] = 1.0;
        o.g[1] = xp * xp;
        o.h[0] = o.h[1] = o.h[2] = 0.0;
    }
};

struct Garch11 {
    static constexpr int D = 3;
    static constexpr bool kMean = false;
    // h_t = a0 + a1 X_{t-1}^2 + b1 h_{t-1}, h_1 = a0/(1-b1).
    struct State {
        double h, g0, g1, g2, h02, h12, h22;
    };
    static void reset(const double* th, State& s) {
        const double c = 1.0 - th[2];
        s.h = th[0] / c;
        s.g0 = 1.0 / c;
        s.g1 = 0.0;
        s.g2 = th[0] / (c * c);
        s.h02 = 1.0 / (c * c);
        s.h12 = 0.0;
        s.h22 = 2.0 * th[0] / (c * c * c);
    }
    static void step_val(const double* th, double xp, State& s, double& v) {
        s.h = th[0] + th[1] * xp * xp + th[2] * s.h;
        v = s.h;
    }
    static void step(const double* th, double xp, State& s, StepOut<D>& o) {
        const double b = th[2];
        const double hp = s.h, g0p = s.g0, g1p = s.g1, g2p = s.g2;
        s.h = th[0] + th[1] * xp * xp + b * hp;
        s.g0 = 1.0 + b * g0p;
        s.g1 = xp * xp + b * g1p;
        s.g2 = hp + b * g2p;
        s.h02 = g0p + b * s.h02;
        s.h12 = g1p + b * s.h12;
        s.h22 = 2.0 * g2p + b * s.h22;
        o.v = s.h;
        o.g[0] = s.g0;
        o.g[1] = s.g1;
        o.g[2] = s.g2;
        o.h[0] = 0.0;
        o.h[1] = 0.0;
        o.h[2] = s.h02;
        o.h[3] = 0.0;
        o.h[4] = s.h12;
        o.h[5] = s.h22;
    }
};

// Accumulated quasi-likelihood quantities over a segment:
//   value = sum q_t, score = sum dq_t, hess = sum d2q_t (packed),
//   gouter = sum dq_t dq_t' (packed), used for G_hat.
template <int D>
struct SweepAcc {
    double value = 0.0;
    double score[D] = {};
    double hess[tri_size(D)] = {};
    double gouter[tri_size(D)] = {};
    long count = 0;
};

enum SweepMode : int {
    kValue = 0,
    kGrad = 1,
    kHess = 2,
    kGOuter = 4,
};

// One pass t = 1..hi; terms with t in [max(lo, 2), hi] are accumulated,
// earlier steps only propagate the recursion state (the truncated past
// always starts at index 1 of the full series). The t = 1 term is a
// pure pre-sample artifact -- its prediction comes from the all-zero
// past, so for intercept-scale series it acts as one huge-leverage
// pseudo-observation that visibly biases the fit -- and is therefore
// conditioned away, as is usual for conditional likelihoods.
// per_term_scores, when given, receives dq_t for each accumulated t,
// D values per term.
template <class Fam, int Mode>
void sweep(const double* th, const TimeSeries& X, long lo, long hi, SweepAcc<Fam::D>& acc,
           double* per_term_scores = nullptr) {
    constexpr int D = Fam::D;
    constexpr int T = tri_size(D);
    typename Fam::State st;
    Fam::reset(th, st);
    const long start = std::max(lo, 2L);

    if constexpr (Mode == kValue) {
        for (long t = 1; t < start; ++t) {
            double v;
            Fam::step_val(th, X.x(t - 1), st, v);
        }
        for (long t = start; t <= hi; ++t) {
            double v;
            Fam::step_val(th, X.x(t - 1), st, v);
            const double xt = X.x(t);
            if constexpr (Fam::kMean) {
                const double r = xt - v;
                acc.value += r * r;
            } else {
                const double h = v < kVarianceFloor ? kVarianceFloor : v;
                acc.value += xt * xt / h + std::log(h);
            }
            ++acc.count;
        }
        return;
    }

    StepOut<D> o;
    for (long t = 1; t < start; ++t)
        Fam::step(th, X.x(t - 1), st, o);
    for (long t = start; t <= hi; ++t) {
        Fam::step(th, X.x(t - 1), st, o);
        const double xt = X.x(t);
        double s[D]; // dq_t
        if constexpr (Fam::kMean) {
            const double r = xt - o.v;
            acc.value += r * r;
            for (int i = 0; i < D; ++i)
                s[i] = -2.0 * r * o.g[i];
            if constexpr (Mode & kHess) {
                int k = 0;
                for (int i = 0; i < D; ++i)
                    for (int j = i; j < D; ++j, ++k)
                        acc.hess[k] += 2.0 * o.g[i] * o.g[j] - 2.0 * r * o.h[k];
            }
        } else {
            const double h = o.v < kVarianceFloor ? kVarianceFloor : o.v;
            const double x2 = xt * xt;
            const double ih = 1.0 / h;
            acc.value += x2 * ih + std::log(h);
            const double c1 = ih - x2 * ih * ih; // 1/h - x^2/h^2
            for (int i = 0; i < D; ++i)
                s[i] = c1 * o.g[i];
            if constexpr (Mode & kHess) {
                const double c2 = (2.0 * x2 * ih - 1.0) * ih * ih; // 2x^2/h^3 - 1/h^2
                int k = 0;
                for (int i = 0; i < D; ++i)
                    for (int j = i; j < D; ++j, ++k)
                        acc.hess[k] += c2 * o.g[i] * o.g[j] + c1 * o.h[k];
            }
        }
        for (int i = 0; i < D; ++i)
            acc.score[i] += s[i];
        if constexpr (Mode & kGOuter) {
            int k = 0;
            for (int i = 0; i < D; ++i)
                for (int j = i; j < D; ++j, ++k)
                    acc.gouter[k] += s[i] * s[j];
        }
        if (per_term_scores)
            for (int i = 0; i < D; ++i)
                per_term_scores[static_cast<size_t>(t - start) * D + i] = s[i];
        ++acc.count;
    }
    (void)T;
}

// Runs the recursion to index t and returns the moment and its
// derivatives there (zero-padded past before index 1).
template <class Fam>
StepOut<Fam::D> moment_at(const double* th, const TimeSeries& X, long t) {
    typename Fam::State st;
    Fam::reset(th, st);
    StepOut<Fam::D> o;
    for (long s = 1; s <= t; ++s)
        Fam::step(th, X.x(s - 1), st, o);
    return o;
}

// Compile-time dispatch over the model family.
template <class Fn>
decltype(auto) dispatch(Family family, Fn&& fn) {
    switch (family) {
    case Family::Ar1Mean:
        return fn.template operator()<Ar1Mean>();
    case Family::Arma11Mean:
        return fn.template operator()<Arma11Mean>();
    case Family::Arma11Zero:
        return fn.template operator()<Arma11Zero>();
    case Family::Arch1:
        return fn.template operator()<Arch1>();
    case Family::Garch11:
        return fn.template operator()<Garch11>();
    }
    throw std::logic_error("unknown family");
}

} // namespace ecp::detail
