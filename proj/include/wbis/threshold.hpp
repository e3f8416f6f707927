#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace wbis {

/// Partition of n samples into group_count contiguous blocks of group_size.
struct GroupingPlan
{
    std::size_t n_total;
    std::size_t group_count;
    std::size_t group_size;
    double c_constant;

    std::size_t used() const { return group_count * group_size; }
    std::size_t leftover() const { return n_total - used(); }
};

/// Default group-count constant: 10 groups of 1000 at n = 10^4.
inline constexpr double default_c_constant = 0.1;

inline constexpr std::size_t min_grouping_total = 64;
inline constexpr std::size_t min_group_count = 8;
inline constexpr std::size_t min_group_size = 8;

/// group_count = round(C sqrt(n)), group_size = floor(n / group_count).
/// Throws config_error naming the violated minimum.
GroupingPlan make_grouping(std::size_t n_total, double c_constant = default_c_constant);

/// Mean of truncated weights over each contiguous block of the plan.
Eigen::ArrayXd group_means(const Eigen::Ref<const Eigen::ArrayXd>& weights, const GroupingPlan& plan, double r);

struct CandidateDiagnostic
{
    double candidate_r;
    double adjusted_statistic;  // NaN when the group means were degenerate
    bool passed;
};

struct ThresholdResult
{
    double r;
    bool passed_any;
    std::vector<CandidateDiagnostic> candidates_evaluated;
    double significance;
};

inline constexpr std::size_t default_grid_points = 200;

/// Strictly decreasing candidate bounds: the maximum observed weight, then
/// grid_points values log-spaced from just below the maximum down to the
/// median weight.
std::vector<double> candidate_grid(const Eigen::Ref<const Eigen::ArrayXd>& weights,
                                   std::size_t grid_points = default_grid_points);

/// Scans the candidate grid downward and returns the first bound whose group
/// means pass the Anderson-Darling test. Falls back to the smallest candidate
/// with passed_any = false.
ThresholdResult select_threshold(const Eigen::Ref<const Eigen::ArrayXd>& weights, const GroupingPlan& plan,
                                 double significance, std::size_t grid_points = default_grid_points);

/// Same scan over a caller-supplied strictly decreasing grid.
ThresholdResult select_threshold_on_grid(const Eigen::Ref<const Eigen::ArrayXd>& weights, const GroupingPlan& plan,
                                         double significance, const std::vector<double>& grid);

} // namespace wbis
