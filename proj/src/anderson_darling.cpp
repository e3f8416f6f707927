#include "wbis/anderson_darling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wbis/error.hpp"
#include "wbis/normal.hpp"

namespace wbis {

namespace {

struct critical_entry
{
    double significance;
    double value;
};

// D'Agostino & Stephens, case 3 (both parameters estimated).
constexpr critical_entry critical_table[] = {
    {0.01, 1.035},
    {0.05, 0.752},
};

constexpr double u_clamp = 1e-15;

} // namespace

double anderson_darling_critical_value(double significance)
{
    for (const auto& e : critical_table) {
        if (std::abs(e.significance - significance) < 1e-12) {
            return e.value;
        }
    }
    throw domain_error("anderson_darling_test: no critical value tabled for significance " +
                       std::to_string(significance));
}

NormalityTestResult anderson_darling_test(std::span<const double> samples, double significance)
{
    const double critical = anderson_darling_critical_value(significance);
    const std::size_t n = samples.size();
    if (n < anderson_darling_min_samples) {
        throw insufficient_sample_error("anderson_darling_test: need at least 8 samples, got " +
                                        std::to_string(n));
    }

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const double nd = static_cast<double>(n);
    double mean = 0.0;
    for (double x : sorted) {
        mean += x;
    }
    mean /= nd;
    double ss = 0.0;
    for (double x : sorted) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (nd - 1.0));
    if (!(sd > 0.0) || sorted.front() == sorted.back()) {
        throw degenerate_sample_error("anderson_darling_test: zero sample variance");
    }

    // log u_(i) and log(1 - u_(i)) on the standardized order statistics
    std::vector<double> log_u(n), log_1mu(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (sorted[i] - mean) / sd;
        const double u = std::clamp(normal_cdf(z), u_clamp, 1.0 - u_clamp);
        const double v = std::clamp(normal_ccdf(z), u_clamp, 1.0 - u_clamp);
        log_u[i] = std::log(u);
        log_1mu[i] = std::log(v);
    }

    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += (2.0 * static_cast<double>(i) + 1.0) * (log_u[i] + log_1mu[n - 1 - i]);
    }
    const double a2 = -nd - s / nd;
    const double adjusted = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));

    return NormalityTestResult{
        .statistic = a2,
        .adjusted_statistic = adjusted,
        .critical_value = critical,
        .significance = significance,
        .passed = adjusted <= critical,
        .n = n,
    };
}

} // namespace wbis
