#include "ecp/qmle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sweep.hpp"

namespace ecp {

namespace {

void check_segment(const TimeSeries& X, Segment T) {
    if (T.lo < 1 || T.hi > X.n() || T.lo > T.hi)
        throw std::out_of_range("segment outside [1, n]");
}

void check_theta(ModelSpec model, const Vec& theta) {
    if (theta.size() != model.dim())
        throw std::invalid_argument("theta has wrong dimension for family");
    if (!in_constraint_region(model, theta))
        throw std::domain_error("theta outside the constraint region");
}

struct Evaluated {
    double value = 0.0;
    Vec score;
    Mat hess;
};

template <int Mode>
Evaluated evaluate(ModelSpec model, const Vec& theta, const TimeSeries& X, Segment T) {
    return detail::dispatch(model.family, [&]<class Fam>() {
        detail::SweepAcc<Fam::D> acc;
        detail::sweep<Fam, Mode>(theta.data(), X, T.lo, T.hi, acc);
        Evaluated ev;
        ev.value = acc.value;
        if constexpr (Mode & detail::kGrad) {
            ev.score = Vec::Zero(Fam::D);
            for (int i = 0; i < Fam::D; ++i)
                ev.score[i] = acc.score[i];
        }
        if constexpr (Mode & detail::kHess) {
            ev.hess = Mat::Zero(Fam::D, Fam::D);
            int k = 0;
            for (int i = 0; i < Fam::D; ++i)
                for (int j = i; j < Fam::D; ++j, ++k)
                    ev.hess(i, j) = ev.hess(j, i) = acc.hess[k];
        }
        return ev;
    });
}

} // namespace

double q_term(ModelSpec model, const Vec& theta, const TimeSeries& X, long t) {
    check_theta(model, theta);
    if (t < 1 || t > X.n())
        throw std::out_of_range("time index outside [1, n]");
    const Moments m = conditional_moments(model, theta, X, t);
    const double h = std::max(m.h, kVarianceFloor);
    const double r = X.x(t) - m.f;
    if (model.is_mean_model())
        return r * r;
    return r * r / h + std::log(h);
}

double neg_qlik(ModelSpec model, const Vec& theta, const TimeSeries& X, Segment T) {
    check_theta(model, theta);
    check_segment(X, T);
    return evaluate<detail::kValue>(model, theta, X, T).value;
}

ScoreHessian score_hessian(ModelSpec model, const Vec& theta, const TimeSeries& X, Segment T) {
    check_theta(model, theta);
    check_segment(X, T);
    auto ev = evaluate<detail::kGrad | detail::kHess>(model, theta, X, T);
    return ScoreHessian{ev.score, ev.hess};
}

std::pair<Mat, Mat> G_F_hat(ModelSpec model, const Vec& theta_hat, const TimeSeries& X,
                            Segment T) {
    check_theta(model, theta_hat);
    check_segment(X, T);
    return detail::dispatch(model.family, [&]<class Fam>() {
        detail::SweepAcc<Fam::D> acc;
        detail::sweep<Fam, detail::kGrad | detail::kHess | detail::kGOuter>(theta_hat.data(), X,
                                                                            T.lo, T.hi, acc);
        const double inv = 1.0 / static_cast<double>(acc.count);
        Mat G = Mat::Zero(Fam::D, Fam::D);
        Mat F = Mat::Zero(Fam::D, Fam::D);
        int k = 0;
        for (int i = 0; i < Fam::D; ++i)
            for (int j = i; j < Fam::D; ++j, ++k) {
                G(i, j) = G(j, i) = acc.gouter[k] * inv;
                F(i, j) = F(j, i) = acc.hess[k] * inv;
            }
        return std::make_pair(G, F);
    });
}

double default_scale_bound(ModelSpec model, const TimeSeries& X) {
    double mx = 0.0, s2 = 0.0;
    for (double v : X.values()) {
        mx = std::max(mx, std::abs(v));
        s2 += v * v;
    }
    s2 /= static_cast<double>(X.n());
    if (model.is_mean_model())
        return std::max(10.0 * mx, 10.0);
    return std::max(100.0 * s2, 10.0);
}

Vec project_to_box(ModelSpec model, Vec theta, double scale_bound) {
    auto clamp = [](double v, double lo, double hi) { return std::min(std::max(v, lo), hi); };
    // Radial scaling onto the cap face can overshoot by an ulp; iterate
    // until the constraint holds exactly.
    auto scale_pair = [](double& a, double& b) {
        for (int k = 0; k < 8; ++k) {
            const double s = std::abs(a) + std::abs(b);
            if (s <= kCoefCap)
                break;
            const double f = kCoefCap / s;
            a *= f;
            b *= f;
            if (std::abs(a) + std::abs(b) > kCoefCap) {
                a = std::nextafter(a, 0.0);
                b = std::nextafter(b, 0.0);
            }
        }
    };
    switch (model.family) {
    case Family::Ar1Mean:
        theta[0] = clamp(theta[0], -scale_bound, scale_bound);
        theta[1] = clamp(theta[1], -kCoefCap, kCoefCap);
        break;
    case Family::Arma11Mean: {
        theta[0] = clamp(theta[0], -scale_bound, scale_bound);
        theta[1] = clamp(theta[1], -kCoefCap, kCoefCap);
        theta[2] = clamp(theta[2], -kCoefCap, kCoefCap);
        scale_pair(theta[1], theta[2]);
        break;
    }
    case Family::Arma11Zero: {
        theta[0] = clamp(theta[0], -kCoefCap, kCoefCap);
        theta[1] = clamp(theta[1], -kCoefCap, kCoefCap);
        scale_pair(theta[0], theta[1]);
        break;
    }
    case Family::Arch1:
        theta[0] = clamp(theta[0], kAlpha0Floor, scale_bound);
        theta[1] = clamp(theta[1], 0.0, kCoefCap);
        break;
    case Family::Garch11: {
        theta[0] = clamp(theta[0], kAlpha0Floor, scale_bound);
        theta[1] = clamp(theta[1], 0.0, kCoefCap);
        theta[2] = clamp(theta[2], 0.0, kCoefCap);
        scale_pair(theta[1], theta[2]);
        break;
    }
    }
    return theta;
}

Vec default_init(ModelSpec model, const TimeSeries& X, Segment T) {
    const int d = model.dim();
    Vec th = Vec::Zero(d);
    if (model.is_mean_model()) {
        // Least-squares autoregression of the segment on its own lag.
        double sxx = 0, sxy = 0, sx = 0, sy = 0;
        long m = 0;
        for (long t = std::max(T.lo, 2L); t <= T.hi; ++t) {
            const double xp = X.x(t - 1), xt = X.x(t);
            sxx += xp * xp;
            sxy += xp * xt;
            sx += xp;
            sy += xt;
            ++m;
        }
        if (m < 2)
            return project_to_box(model, th, default_scale_bound(model, X));
        double a0 = 0.0, a1 = 0.0;
        if (model.family == Family::Arma11Zero) {
            a1 = sxx > 0 ? sxy / sxx : 0.0;
        } else {
            const double den = m * sxx - sx * sx;
            if (std::abs(den) > 1e-12) {
                a1 = (m * sxy - sx * sy) / den;
                a0 = (sy - a1 * sx) / m;
            } else {
                a0 = sy / m;
            }
        }
        switch (model.family) {
        case Family::Ar1Mean:
            th << a0, a1;
            break;
        case Family::Arma11Mean:
            th << a0, a1, 0.0;
            break;
        case Family::Arma11Zero:
            th << a1, 0.0;
            break;
        default:
            break;
        }
    } else {
        double s2 = 0;
        for (long t = T.lo; t <= T.hi; ++t)
            s2 += X.x(t) * X.x(t);
        s2 /= static_cast<double>(T.card());
        if (model.family == Family::Arch1)
            th << std::max(0.5 * s2, kAlpha0Floor), 0.2;
        else
            th << std::max(0.5 * s2, kAlpha0Floor), 0.2, 0.2;
    }
    return project_to_box(model, th, default_scale_bound(model, X));
}

namespace {

bool on_boundary(ModelSpec model, const Vec& th, double scale_bound) {
    const double eps = 1e-9;
    switch (model.family) {
    case Family::Ar1Mean:
        return std::abs(std::abs(th[1]) - kCoefCap) < eps ||
               std::abs(std::abs(th[0]) - scale_bound) < eps;
    case Family::Arma11Mean:
        return std::abs(std::abs(th[1]) + std::abs(th[2]) - kCoefCap) < eps ||
               std::abs(std::abs(th[0]) - scale_bound) < eps;
    case Family::Arma11Zero:
        return std::abs(std::abs(th[0]) + std::abs(th[1]) - kCoefCap) < eps;
    case Family::Arch1:
        return th[0] < kAlpha0Floor + eps || th[1] < eps ||
               std::abs(th[1] - kCoefCap) < eps || th[0] > scale_bound - eps;
    case Family::Garch11:
        return th[0] < kAlpha0Floor + eps || th[1] < eps || th[2] < eps ||
               std::abs(th[1] + th[2] - kCoefCap) < eps || th[0] > scale_bound - eps;
    }
    return false;
}

// Bounded Nelder-Mead on the projected box; used only when the Newton
// line search stalls.
Vec nelder_mead(ModelSpec model, const TimeSeries& X, Segment T, Vec x0, double scale_bound,
                int max_eval) {
    const int d = model.dim();
    auto f = [&](const Vec& p) {
        return evaluate<detail::kValue>(model, project_to_box(model, p, scale_bound), X, T).value;
    };
    std::vector<Vec> pts(d + 1, x0);
    std::vector<double> vals(d + 1);
    for (int i = 0; i < d; ++i) {
        const double h = std::max(0.05, 0.05 * std::abs(x0[i]));
        pts[i + 1][i] += h;
    }
    for (int i = 0; i <= d; ++i)
        vals[i] = f(pts[i]);
    int evals = d + 1;
    while (evals < max_eval) {
        std::vector<int> ord(d + 1);
        for (int i = 0; i <= d; ++i)
            ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        const int best = ord[0], worst = ord[d];
        Vec centroid = Vec::Zero(d);
        for (int i = 0; i <= d; ++i)
            if (i != worst)
                centroid += pts[i];
        centroid /= static_cast<double>(d);
        Vec refl = centroid + (centroid - pts[worst]);
        double fr = f(refl);
        ++evals;
        if (fr < vals[best]) {
            Vec exp_ = centroid + 2.0 * (centroid - pts[worst]);
            double fe = f(exp_);
            ++evals;
            if (fe < fr) {
                pts[worst] = exp_;
                vals[worst] = fe;
            } else {
                pts[worst] = refl;
                vals[worst] = fr;
            }
        } else if (fr < vals[ord[d - 1]]) {
            pts[worst] = refl;
            vals[worst] = fr;
        } else {
            Vec con = centroid + 0.5 * (pts[worst] - centroid);
            double fc = f(con);
            ++evals;
            if (fc < vals[worst]) {
                pts[worst] = con;
                vals[worst] = fc;
            } else {
                for (int i = 0; i <= d; ++i) {
                    if (i == best)
                        continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    vals[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
        double spread = 0.0;
        for (int i = 0; i <= d; ++i)
            spread = std::max(spread, (pts[i] - pts[ord[0]]).template lpNorm<Eigen::Infinity>());
        if (spread < 1e-9)
            break;
    }
    int bi = 0;
    for (int i = 1; i <= d; ++i)
        if (vals[i] < vals[bi])
            bi = i;
    return project_to_box(model, pts[bi], scale_bound);
}

} // namespace

SegmentFit fit(ModelSpec model, const TimeSeries& X, Segment T, const std::optional<Vec>& init,
               const FitOptions& opt) {
    check_segment(X, T);
    const int d = model.dim();
    if (T.card() < d + 1)
        throw std::invalid_argument("fit: segment shorter than d + 1");
    const double S = opt.scale_bound > 0.0 ? opt.scale_bound : default_scale_bound(model, X);
    Vec th;
    if (init) {
        if (init->size() != d || !init->allFinite())
            throw std::domain_error("fit: init outside the constraint region");
        th = project_to_box(model, *init, S);
        // Rounding can leave a boundary fit an ulp outside the box;
        // only a materially infeasible init is an error.
        if ((th - *init).lpNorm<Eigen::Infinity>() > 1e-8 * std::max(1.0, init->lpNorm<Eigen::Infinity>()))
            throw std::domain_error("fit: init outside the constraint region");
    } else {
        th = default_init(model, X, T);
    }
    SegmentFit out;
    double val = 0.0;
    Vec grad;
    Mat hess;
    bool have_eval = false;
    bool nm_used = false;

    for (int it = 0; it < opt.max_iter; ++it) {
        if (!have_eval) {
            auto ev = evaluate<detail::kGrad | detail::kHess>(model, th, X, T);
            val = opt.objective_scale * ev.value;
            grad = opt.objective_scale * ev.score;
            hess = opt.objective_scale * ev.hess;
            have_eval = true;
        }
        const Vec pg = th - project_to_box(model, th - grad, S);
        const double tol = opt.grad_tol * std::max(1.0, std::abs(val));
        out.grad_norm = pg.norm();
        if (out.grad_norm <= tol) {
            // One Newton polish step tightens theta well below the
            // gradient tolerance; warm and cold starts then agree.
            Eigen::LDLT<Mat> ldlt(hess + 1e-10 * hess.trace() * Mat::Identity(d, d));
            if (ldlt.info() == Eigen::Success) {
                Vec polished = project_to_box(model, th - ldlt.solve(grad), S);
                auto evp = evaluate<detail::kValue>(model, polished, X, T);
                if (opt.objective_scale * evp.value <= val) {
                    th = polished;
                    val = opt.objective_scale * evp.value;
                }
            }
            out.converged = true;
            break;
        }

        // Newton direction, with ridge escalation until descent.
        Vec dir;
        double lambda = 0.0;
        const double base = std::max(1e-12, 1e-8 * std::abs(hess.trace()));
        for (int k = 0; k < 40; ++k) {
            Mat Hmod = hess + lambda * Mat::Identity(d, d);
            Eigen::LDLT<Mat> ldlt(Hmod);
            if (ldlt.info() == Eigen::Success) {
                Vec cand = -ldlt.solve(grad);
                if (cand.dot(grad) < 0 && cand.allFinite()) {
                    dir = cand;
                    break;
                }
            }
            lambda = lambda == 0.0 ? base : lambda * 10.0;
            if (k == 39)
                dir = -grad; // steepest descent as last resort
        }

        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vec cand = project_to_box(model, th + step * dir, S);
            if ((cand - th).lpNorm<Eigen::Infinity>() == 0.0)
                break;
            auto evc = evaluate<detail::kValue>(model, cand, X, T);
            if (opt.objective_scale * evc.value <= val + 1e-4 * grad.dot(cand - th)) {
                th = cand;
                have_eval = false;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!nm_used) {
                nm_used = true;
                Vec cand = nelder_mead(model, X, T, th, S, 200 * d);
                auto evc = evaluate<detail::kValue>(model, cand, X, T);
                if (opt.objective_scale * evc.value < val) {
                    th = cand;
                    have_eval = false;
                    continue;
                }
            }
            break; // no further progress
        }
    }

    if (!have_eval) {
        auto ev = evaluate<detail::kGrad | detail::kHess>(model, th, X, T);
        val = opt.objective_scale * ev.value;
        grad = opt.objective_scale * ev.score;
        const Vec pg = th - project_to_box(model, th - grad, S);
        out.grad_norm = pg.norm();
        out.converged = out.grad_norm <= opt.grad_tol * std::max(1.0, std::abs(val));
    }
    out.theta = th;
    out.neg_qlik = val / opt.objective_scale;
    out.boundary = on_boundary(model, th, S);
    if (out.boundary)
        out.converged = true;
    if (opt.compute_gf) {
        auto [G, F] = G_F_hat(model, th, X, T);
        out.G = G;
        out.F = F;
    }
    return out;
}

SandwichMatrix sigma_hat(ModelSpec model, const TimeSeries& X, long u_n, const FitOptions& opt) {
    const int d = model.dim();
    const long n = X.n();
    if (u_n < d + 1 || n - 2 * u_n < d + 1)
        throw std::invalid_argument("sigma_hat: u_n segments too short");
    const std::array<Segment, 3> segs{Segment{1, u_n}, Segment{u_n + 1, n - u_n},
                                      Segment{n - u_n + 1, n}};
    SandwichMatrix out;
    out.sigma = Mat::Zero(d, d);
    for (int s = 0; s < 3; ++s) {
        SegmentFit sf = fit(model, X, segs[s], std::nullopt, opt);
        Eigen::SelfAdjointEigenSolver<Mat> es(sf.G);
        const auto& ev = es.eigenvalues();
        const double lmax = ev.maxCoeff();
        if (!(lmax > 0.0) || ev.minCoeff() / lmax < kRcondTol)
            continue; // singular G: term replaced by zero
        Mat Ginv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                   es.eigenvectors().transpose();
        out.sigma += sf.F * Ginv * sf.F;
        out.used_segments[static_cast<size_t>(s)] = true;
    }
    out.sigma /= 3.0;
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
    return out;
}

} // namespace ecp
