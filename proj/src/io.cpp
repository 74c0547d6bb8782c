#include "ecp/io.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace ecp {

TimeSeries ingest_csv(const std::string& path, long min_length) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open input file: " + path);
    std::vector<double> vals;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        // strip trailing CR and surrounding whitespace
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) {
            if (vals.empty())
                continue; // leading blank lines
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": missing value");
        }
        const std::string tok = line.substr(start);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
            if (lineno == 1 && vals.empty())
                continue; // header row
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": not a number: '" + tok + "'");
        }
        vals.push_back(v);
    }
    if (static_cast<long>(vals.size()) < min_length)
        throw std::runtime_error(path + ": need at least " + std::to_string(min_length) +
                                 " observations, got " + std::to_string(vals.size()));
    return TimeSeries(std::move(vals));
}

void write_series_csv(const TimeSeries& X, const std::string& path,
                      const std::string& header) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    if (!header.empty())
        f << header << "\n";
    f << std::setprecision(17);
    for (double v : X.values())
        f << v << "\n";
}

void write_heatmap(const ScanReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f << "k1,k2,Q\n" << std::setprecision(10);
    for (const PairStat& p : report.surface)
        f << p.k1 << ',' << p.k2 << ',' << p.q << "\n";
}

Vec sandwich_std_errors(const SegmentFit& f, long card) {
    const long d = f.theta.size();
    Vec se = Vec::Constant(d, std::nan(""));
    if (f.G.size() == 0 || f.F.size() == 0)
        return se;
    Eigen::SelfAdjointEigenSolver<Mat> es(f.F);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lmax > 0.0))
        return se;
    for (long i = 0; i < d; ++i)
        if (std::abs(es.eigenvalues()[i]) / lmax < 1e-12)
            return se; // F not invertible
    Mat Finv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
               es.eigenvectors().transpose();
    Mat cov = Finv * f.G * Finv / static_cast<double>(card);
    for (long i = 0; i < d; ++i)
        se[i] = cov(i, i) > 0 ? std::sqrt(cov(i, i)) : std::nan("");
    return se;
}

namespace {

void regime_lines(const ScanReport& r, long n, std::ostream& os) {
    const std::array<std::pair<long, long>, 3> segs{
        std::pair<long, long>{1, r.t1_hat}, {r.t1_hat + 1, r.t2_hat}, {r.t2_hat + 1, n}};
    for (size_t i = 0; i < r.regime_fits.size() && i < 3; ++i) {
        const SegmentFit& f = r.regime_fits[i];
        const long card = segs[i].second - segs[i].first + 1;
        const Vec se = sandwich_std_errors(f, card);
        os << "regime" << i + 1 << ".segment = [" << segs[i].first << ", " << segs[i].second
           << "]\n";
        os << "regime" << i + 1 << ".theta =";
        for (long j = 0; j < f.theta.size(); ++j)
            os << ' ' << f.theta[j];
        os << "\n";
        os << "regime" << i + 1 << ".se =";
        for (long j = 0; j < se.size(); ++j)
            os << ' ' << se[j];
        os << "\n";
        os << "regime" << i + 1 << ".neg_qlik = " << f.neg_qlik << "\n";
        os << "regime" << i + 1 << ".converged = " << (f.converged ? "true" : "false") << "\n";
    }
}

} // namespace

void write_report(const ScanReport& r, ModelSpec model, long n, long stride, double alpha,
                  double wall_seconds, std::ostream& os) {
    os << std::setprecision(10);
    os << "model = " << model.name() << "\n";
    os << "n = " << n << "\n";
    os << "d = " << model.dim() << "\n";
    os << "alpha = " << alpha << "\n";
    os << "u_n = " << r.u_n << "\n";
    os << "v_n = " << r.v_n << "\n";
    os << "stride = " << stride << "\n";
    os << "Q_n = " << r.Q_n << "\n";
    os << "critical_value = " << r.critical_value << "\n";
    os << "reject = " << (r.reject ? "true" : "false") << "\n";
    os << "t1_hat = " << r.t1_hat << "\n";
    os << "t2_hat = " << r.t2_hat << "\n";
    os << "failed_pairs = " << r.failed_pairs << "\n";
    os << "total_pairs = " << r.total_pairs << "\n";
    os << "sigma_segments_used = " << r.sigma.used_segments[0] << r.sigma.used_segments[1]
       << r.sigma.used_segments[2] << "\n";
    os << "wall_time = " << wall_seconds << "\n";
    regime_lines(r, n, os);
}

void write_report_json(const ScanReport& r, ModelSpec model, long n, long stride, double alpha,
                       double wall_seconds, const std::string& path) {
    nlohmann::json j;
    j["model"] = model.name();
    j["n"] = n;
    j["d"] = model.dim();
    j["alpha"] = alpha;
    j["u_n"] = r.u_n;
    j["v_n"] = r.v_n;
    j["stride"] = stride;
    j["Q_n"] = r.Q_n;
    j["critical_value"] = r.critical_value;
    j["reject"] = r.reject;
    j["t1_hat"] = r.t1_hat;
    j["t2_hat"] = r.t2_hat;
    j["failed_pairs"] = r.failed_pairs;
    j["total_pairs"] = r.total_pairs;
    j["wall_time"] = wall_seconds;
    const std::array<std::pair<long, long>, 3> segs{
        std::pair<long, long>{1, r.t1_hat}, {r.t1_hat + 1, r.t2_hat}, {r.t2_hat + 1, n}};
    for (size_t i = 0; i < r.regime_fits.size() && i < 3; ++i) {
        nlohmann::json jr;
        const SegmentFit& f = r.regime_fits[i];
        jr["segment"] = {segs[i].first, segs[i].second};
        jr["theta"] = std::vector<double>(f.theta.data(), f.theta.data() + f.theta.size());
        const Vec se = sandwich_std_errors(f, segs[i].second - segs[i].first + 1);
        jr["se"] = std::vector<double>(se.data(), se.data() + se.size());
        jr["neg_qlik"] = f.neg_qlik;
        jr["converged"] = f.converged;
        j["regimes"].push_back(jr);
    }
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

} // namespace ecp
