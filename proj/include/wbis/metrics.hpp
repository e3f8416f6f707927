#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace wbis {

/// (n / K) sum_k (estimate_k - reference)^2
double nmse(std::span<const double> estimates, double reference, std::size_t n);

/// sqrt((1 / M) sum_i (estimate_i - reference)^2)
double rmse(std::span<const double> estimates, double reference);

struct BiasVariance
{
    double bias_squared;
    double variance;  // population variance over the repeats
};

/// Requires at least two estimates.
BiasVariance bias_variance(std::span<const double> estimates, double reference);

struct MetricsSummary
{
    double nmse;
    double rmse;
    double bias_squared;
    double variance;
    std::optional<double> mean_threshold_r;
    std::size_t repeats;
    std::size_t n;
};

/// All metrics of one repeat set. With a single estimate the variance is 0
/// and the bias carries the whole error.
MetricsSummary summarize_metrics(std::span<const double> estimates, double reference, std::size_t n,
                                 std::span<const double> thresholds = {});

} // namespace wbis
