#include "wbis/metrics.hpp"

#include <cmath>

#include "wbis/error.hpp"

namespace wbis {

namespace {

double mean_squared_error(std::span<const double> estimates, double reference)
{
    if (estimates.empty()) {
        throw domain_error("metrics: empty estimate set");
    }
    double s = 0.0;
    for (double e : estimates) {
        s += (e - reference) * (e - reference);
    }
    return s / static_cast<double>(estimates.size());
}

} // namespace

double nmse(std::span<const double> estimates, double reference, std::size_t n)
{
    return static_cast<double>(n) * mean_squared_error(estimates, reference);
}

double rmse(std::span<const double> estimates, double reference)
{
    return std::sqrt(mean_squared_error(estimates, reference));
}

BiasVariance bias_variance(std::span<const double> estimates, double reference)
{
    if (estimates.size() < 2) {
        throw domain_error("bias_variance: need at least two estimates");
    }
    const double k = static_cast<double>(estimates.size());
    double mean = 0.0;
    for (double e : estimates) {
        mean += e;
    }
    mean /= k;
    double var = 0.0;
    for (double e : estimates) {
        var += (e - mean) * (e - mean);
    }
    var /= k;
    return {(mean - reference) * (mean - reference), var};
}

MetricsSummary summarize_metrics(std::span<const double> estimates, double reference, std::size_t n,
                                 std::span<const double> thresholds)
{
    const double mse = mean_squared_error(estimates, reference);
    BiasVariance bv{mse, 0.0};
    if (estimates.size() >= 2) {
        bv = bias_variance(estimates, reference);
    }
    std::optional<double> mean_r;
    if (!thresholds.empty()) {
        double s = 0.0;
        for (double r : thresholds) {
            s += r;
        }
        mean_r = s / static_cast<double>(thresholds.size());
    }
    return {static_cast<double>(n) * mse, std::sqrt(mse), bv.bias_squared, bv.variance, mean_r,
            estimates.size(), n};
}

} // namespace wbis
