#include "ecp/model.hpp"

#include <cmath>
#include <stdexcept>

#include "sweep.hpp"

namespace ecp {

int ModelSpec::dim() const {
    switch (family) {
    case Family::Ar1Mean:
    case Family::Arma11Zero:
    case Family::Arch1:
        return 2;
    case Family::Arma11Mean:
    case Family::Garch11:
        return 3;
    }
    return 0;
}

bool ModelSpec::is_mean_model() const {
    return family == Family::Ar1Mean || family == Family::Arma11Mean ||
           family == Family::Arma11Zero;
}

const char* ModelSpec::name() const {
    switch (family) {
    case Family::Ar1Mean:
        return "ar1";
    case Family::Arma11Mean:
        return "arma11";
    case Family::Arma11Zero:
        return "arma11-zero";
    case Family::Arch1:
        return "arch1";
    case Family::Garch11:
        return "garch11";
    }
    return "?";
}

ModelSpec ModelSpec::from_name(const std::string& name) {
    for (Family f : {Family::Ar1Mean, Family::Arma11Mean, Family::Arma11Zero, Family::Arch1,
                     Family::Garch11}) {
        ModelSpec m{f};
        if (name == m.name())
            return m;
    }
    throw std::invalid_argument("unknown model family: " + name);
}

double innovation_norm(Innovation law, double r) {
    if (r < 1.0)
        throw std::invalid_argument("innovation_norm: r must be >= 1");
    switch (law) {
    case Innovation::Normal:
        // E|Z|^r = 2^{r/2} Gamma((r+1)/2) / sqrt(pi)
        return std::pow(std::pow(2.0, r / 2.0) * std::tgamma((r + 1.0) / 2.0) /
                            std::sqrt(M_PI),
                        1.0 / r);
    case Innovation::Uniform: {
        // Uniform(-sqrt(3), sqrt(3)): E|xi|^r = 3^{r/2} / (r+1)
        return std::sqrt(3.0) / std::pow(r + 1.0, 1.0 / r);
    }
    }
    return 0.0;
}

static void check_dim(ModelSpec model, const Vec& theta) {
    if (theta.size() != model.dim())
        throw std::invalid_argument("theta has wrong dimension for family");
}

bool in_constraint_region(ModelSpec model, const Vec& theta) {
    if (theta.size() != model.dim())
        return false;
    for (long i = 0; i < theta.size(); ++i)
        if (!std::isfinite(theta[i]))
            return false;
    switch (model.family) {
    case Family::Ar1Mean:
        return std::abs(theta[1]) <= kCoefCap;
    case Family::Arma11Mean:
        return std::abs(theta[1]) + std::abs(theta[2]) <= kCoefCap;
    case Family::Arma11Zero:
        return std::abs(theta[0]) + std::abs(theta[1]) <= kCoefCap;
    case Family::Arch1:
        return theta[0] >= kAlpha0Floor && theta[1] >= 0.0 && theta[1] <= kCoefCap;
    case Family::Garch11:
        return theta[0] >= kAlpha0Floor && theta[1] >= 0.0 && theta[2] >= 0.0 &&
               theta[1] + theta[2] <= kCoefCap;
    }
    return false;
}

bool validate_params(ModelSpec model, const Vec& theta, double r, double innovation_norm_r) {
    if (theta.size() != model.dim() || r < 1.0)
        return false;
    for (long i = 0; i < theta.size(); ++i)
        if (!std::isfinite(theta[i]))
            return false;
    switch (model.family) {
    case Family::Ar1Mean:
        return std::abs(theta[1]) < 1.0 - kMargin;
    case Family::Arma11Mean:
        return std::abs(theta[1]) + std::abs(theta[2]) < 1.0 - kMargin;
    case Family::Arma11Zero:
        return std::abs(theta[0]) + std::abs(theta[1]) < 1.0 - kMargin;
    case Family::Arch1:
        return theta[0] >= kAlpha0Floor && theta[1] >= 0.0 &&
               innovation_norm_r * innovation_norm_r * theta[1] < 1.0 - kMargin;
    case Family::Garch11:
        return theta[0] >= kAlpha0Floor && theta[1] >= 0.0 && theta[2] >= 0.0 &&
               theta[1] + theta[2] <= kCoefCap &&
               innovation_norm_r * innovation_norm_r * (theta[1] + theta[2]) < 1.0 - kMargin;
    }
    return false;
}

static void check_domain(ModelSpec model, const Vec& theta, const TimeSeries& X, long t) {
    check_dim(model, theta);
    if (!in_constraint_region(model, theta))
        throw std::domain_error("theta outside the constraint region");
    if (t < 1 || t > X.n())
        throw std::out_of_range("time index outside [1, n]");
}

Moments conditional_moments(ModelSpec model, const Vec& theta, const TimeSeries& X, long t) {
    check_domain(model, theta, X, t);
    return detail::dispatch(model.family, [&]<class Fam>() {
        auto o = detail::moment_at<Fam>(theta.data(), X, t);
        Moments m;
        if constexpr (Fam::kMean) {
            m.f = o.v;
            m.h = 1.0;
        } else {
            m.f = 0.0;
            m.h = o.v < kVarianceFloor ? kVarianceFloor : o.v;
        }
        return m;
    });
}

MomentDerivs moment_derivatives(ModelSpec model, const Vec& theta, const TimeSeries& X, long t) {
    check_domain(model, theta, X, t);
    const int d = model.dim();
    MomentDerivs md;
    md.grad_f = Vec::Zero(d);
    md.grad_h = Vec::Zero(d);
    md.hess_f = Mat::Zero(d, d);
    md.hess_h = Mat::Zero(d, d);
    detail::dispatch(model.family, [&]<class Fam>() {
        auto o = detail::moment_at<Fam>(theta.data(), X, t);
        Vec g = Vec::Zero(Fam::D);
        Mat H = Mat::Zero(Fam::D, Fam::D);
        int k = 0;
        for (int i = 0; i < Fam::D; ++i) {
            g[i] = o.g[i];
            for (int j = i; j < Fam::D; ++j, ++k)
                H(i, j) = H(j, i) = o.h[k];
        }
        if constexpr (Fam::kMean) {
            md.grad_f = g;
            md.hess_f = H;
        } else {
            md.grad_h = g;
            md.hess_h = H;
        }
        return 0;
    });
    return md;
}

static double draw(std::mt19937_64& rng, Innovation law) {
    if (law == Innovation::Normal) {
        std::normal_distribution<double> n(0.0, 1.0);
        return n(rng);
    }
    std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
    return u(rng);
}

namespace {

// Exact model recursion, zero initial state; parameters may switch
// between steps with the state carried across.
struct SimState {
    double x_prev = 0.0;
    double xi_prev = 0.0;
    double s2_prev = 0.0;

    double step(ModelSpec model, const Vec& th, double xi) {
        double x = 0.0;
        switch (model.family) {
        case Family::Ar1Mean:
            x = th[0] + th[1] * x_prev + xi;
            break;
        case Family::Arma11Mean:
            x = th[0] + th[1] * x_prev + xi + th[2] * xi_prev;
            break;
        case Family::Arma11Zero:
            x = th[0] * x_prev + xi + th[1] * xi_prev;
            break;
        case Family::Arch1: {
            const double s2 = th[0] + th[1] * x_prev * x_prev;
            s2_prev = s2;
            x = std::sqrt(s2) * xi;
            break;
        }
        case Family::Garch11: {
            const double s2 = th[0] + th[1] * x_prev * x_prev + th[2] * s2_prev;
            s2_prev = s2;
            x = std::sqrt(s2) * xi;
            break;
        }
        }
        x_prev = x;
        xi_prev = xi;
        return x;
    }
};

} // namespace

TimeSeries simulate(ModelSpec model, const Vec& theta, long n, long burn_in,
                    std::mt19937_64& rng, Innovation law) {
    check_dim(model, theta);
    if (!validate_params(model, theta, 2.0, innovation_norm(law, 2.0)))
        throw std::domain_error("simulate: theta outside Theta(2)");
    if (n < 2 || burn_in < 0)
        throw std::invalid_argument("simulate: need n >= 2, burn_in >= 0");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    SimState st;
    for (long t = 0; t < burn_in + n; ++t) {
        const double x = st.step(model, theta, draw(rng, law));
        if (t >= burn_in)
            out.push_back(x);
    }
    return TimeSeries(std::move(out));
}

EpidemicSample simulate_epidemic(ModelSpec model, const EpidemicScenario& scen, long burn_in,
                                 std::mt19937_64& rng, Innovation law) {
    check_dim(model, scen.theta1);
    check_dim(model, scen.theta2);
    const double norm2 = innovation_norm(law, 2.0);
    if (!validate_params(model, scen.theta1, 2.0, norm2) ||
        !validate_params(model, scen.theta2, 2.0, norm2))
        throw std::domain_error("simulate_epidemic: parameters outside Theta(2)");
    if (!(scen.tau1 > 0.0 && scen.tau1 < scen.tau2 && scen.tau2 < 1.0))
        throw std::domain_error("simulate_epidemic: need 0 < tau1 < tau2 < 1");
    const long n = scen.n;
    const long t1 = static_cast<long>(std::floor(n * scen.tau1));
    const long t2 = static_cast<long>(std::floor(n * scen.tau2));
    if (!(1 < t1 && t1 < t2 && t2 < n))
        throw std::domain_error("simulate_epidemic: break indices collapse, n too small");
    if (burn_in < 0)
        throw std::invalid_argument("simulate_epidemic: burn_in >= 0");

    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    SimState st;
    for (long t = 0; t < burn_in + n; ++t) {
        const long i = t - burn_in + 1; // 1-based observation index
        const bool epidemic = i > t1 && i <= t2;
        const double x = st.step(model, epidemic ? scen.theta2 : scen.theta1, draw(rng, law));
        if (t >= burn_in)
            out.push_back(x);
    }
    return EpidemicSample{TimeSeries(std::move(out)), t1, t2};
}

} // namespace ecp
