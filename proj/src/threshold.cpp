#include "wbis/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wbis/anderson_darling.hpp"
#include "wbis/error.hpp"
#include "wbis/estimators.hpp"

namespace wbis {

GroupingPlan make_grouping(std::size_t n_total, double c_constant)
{
    if (!(c_constant > 0.0)) {
        throw config_error("make_grouping: c_constant must be positive");
    }
    if (n_total < min_grouping_total) {
        throw config_error("make_grouping: n_total = " + std::to_string(n_total) + " below minimum " +
                           std::to_string(min_grouping_total));
    }
    const auto group_count =
        static_cast<std::size_t>(std::llround(c_constant * std::sqrt(static_cast<double>(n_total))));
    if (group_count < min_group_count) {
        throw config_error("make_grouping: group_count = " + std::to_string(group_count) + " below minimum " +
                           std::to_string(min_group_count));
    }
    const std::size_t group_size = n_total / group_count;
    if (group_size < min_group_size) {
        throw config_error("make_grouping: group_size = " + std::to_string(group_size) + " below minimum " +
                           std::to_string(min_group_size));
    }
    return {n_total, group_count, group_size, c_constant};
}

Eigen::ArrayXd group_means(const Eigen::Ref<const Eigen::ArrayXd>& weights, const GroupingPlan& plan, double r)
{
    if (static_cast<std::size_t>(weights.size()) < plan.used()) {
        throw domain_error("group_means: " + std::to_string(weights.size()) + " weights, plan needs " +
                           std::to_string(plan.used()));
    }
    if (!(r > 0.0)) {
        throw domain_error("group_means: r must be positive");
    }
    const auto size = static_cast<Eigen::Index>(plan.group_size);
    Eigen::ArrayXd means(static_cast<Eigen::Index>(plan.group_count));
    for (Eigen::Index j = 0; j < means.size(); ++j) {
        double sum = 0.0;
        for (Eigen::Index i = j * size; i < (j + 1) * size; ++i) {
            sum += truncate_weight(weights[i], r);
        }
        means[j] = sum / static_cast<double>(size);
    }
    return means;
}

std::vector<double> candidate_grid(const Eigen::Ref<const Eigen::ArrayXd>& weights, std::size_t grid_points)
{
    if (weights.size() == 0) {
        throw domain_error("candidate_grid: empty weights");
    }
    std::vector<double> sorted(weights.begin(), weights.end());
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    double median = *mid;
    if (sorted.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
    }
    const double wmax = weights.maxCoeff();

    std::vector<double> grid{wmax};
    if (!(median > 0.0) || !(wmax > median) || grid_points == 0) {
        return grid;
    }
    // grid_points log-spaced values from median (i = 0) to just below wmax
    const double log_lo = std::log(median);
    const double step = (std::log(wmax) - log_lo) / static_cast<double>(grid_points);
    for (std::size_t k = grid_points; k-- > 0;) {
        const double c = k == 0 ? median : std::exp(log_lo + step * static_cast<double>(k));
        if (c < grid.back()) {
            grid.push_back(c);
        }
    }
    return grid;
}

ThresholdResult select_threshold_on_grid(const Eigen::Ref<const Eigen::ArrayXd>& weights, const GroupingPlan& plan,
                                         double significance, const std::vector<double>& grid)
{
    if (grid.empty()) {
        throw domain_error("select_threshold: empty candidate grid");
    }
    anderson_darling_critical_value(significance);

    ThresholdResult result{grid.back(), false, {}, significance};
    result.candidates_evaluated.reserve(grid.size());
    for (double candidate : grid) {
        if (!(candidate > 0.0)) {
            result.candidates_evaluated.push_back({candidate, std::numeric_limits<double>::quiet_NaN(), false});
            continue;
        }
        const Eigen::ArrayXd means = group_means(weights, plan, candidate);
        CandidateDiagnostic diag{candidate, std::numeric_limits<double>::quiet_NaN(), false};
        try {
            const auto test = anderson_darling_test({means.data(), static_cast<std::size_t>(means.size())},
                                                    significance);
            diag.adjusted_statistic = test.adjusted_statistic;
            diag.passed = test.passed;
        } catch (const degenerate_sample_error&) {
            // identical group means: recorded as a failed candidate
        }
        result.candidates_evaluated.push_back(diag);
        if (diag.passed) {
            result.r = candidate;
            result.passed_any = true;
            return result;
        }
    }
    return result;
}

ThresholdResult select_threshold(const Eigen::Ref<const Eigen::ArrayXd>& weights, const GroupingPlan& plan,
                                 double significance, std::size_t grid_points)
{
    return select_threshold_on_grid(weights, plan, significance, candidate_grid(weights, grid_points));
}

} // namespace wbis
