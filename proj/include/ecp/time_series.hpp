#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ecp {

/// Ordered real observations X_1..X_n. Indexing in the public API is
/// 1-based to match the usual time-series convention; x(t) with t < 1
/// returns 0 (the zero-padded unobserved past).
class TimeSeries {
public:
    TimeSeries() = default;

    explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2)
            throw std::invalid_argument("TimeSeries: need at least 2 observations");
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::invalid_argument("TimeSeries: non-finite value");
    }

    long n() const { return static_cast<long>(values_.size()); }

    double x(long t) const { return t >= 1 ? values_[static_cast<size_t>(t - 1)] : 0.0; }

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

/// Inclusive 1-based index range {lo, lo+1, ..., hi}.
struct Segment {
    long lo = 1;
    long hi = 1;

    long card() const { return hi - lo + 1; }
};

} // namespace ecp
