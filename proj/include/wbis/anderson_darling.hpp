#pragma once

#include <cstddef>
#include <span>

namespace wbis {

struct NormalityTestResult
{
    double statistic;           ///< raw A^2
    double adjusted_statistic;  ///< A^2 (1 + 0.75/n + 2.25/n^2)
    double critical_value;
    double significance;
    bool passed;
    std::size_t n;
};

/// Minimum batch size accepted by anderson_darling_test.
inline constexpr std::size_t anderson_darling_min_samples = 8;

/// Critical value of the adjusted statistic for the composite normal case
/// (mean and variance estimated). Tabled at 0.01 and 0.05.
double anderson_darling_critical_value(double significance);

/// Anderson-Darling test of normality with estimated mean and variance.
/// Throws insufficient_sample_error for n < 8, degenerate_sample_error when
/// the sample variance is zero, domain_error for an untabled significance.
NormalityTestResult anderson_darling_test(std::span<const double> samples, double significance);

} // namespace wbis
