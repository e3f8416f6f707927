#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace wbis {

enum class Method
{
    MC,
    IS,
    DIS,
    WBIS,
};

std::string_view to_string(Method m);
/// Parses "MC", "IS", "DIS" or "WBIS" (case-insensitive).
Method parse_method(std::string_view name);

/// One draw from the sampling density with its integrand value and raw
/// importance weight. Build through make_weighted_sample so the support
/// condition is checked.
struct WeightedSample
{
    Eigen::VectorXd point;
    double f_value;
    double nominal_density;
    double proposal_density;
    double weight;
};

/// weight = nominal / proposal. Throws support_violation_error when the
/// nominal density is positive and the proposal density is not.
WeightedSample make_weighted_sample(Eigen::VectorXd point, double f_value, double nominal_density,
                                    double proposal_density);

/// Log-density variant: weight = exp(log_nominal - log_proposal). Densities
/// are stored exponentiated (they may underflow to 0; the weight does not).
WeightedSample make_weighted_sample_log(Eigen::VectorXd point, double f_value, double log_nominal,
                                        double log_proposal);

struct EstimatorOutput
{
    double estimate;
    double sample_variance_of_terms;
    std::size_t n;
    Method method;
    std::optional<double> truncation_bound;  // WBIS only
    std::optional<double> alpha;             // DIS only
};

/// Mean and unbiased variance of per-sample summands; the estimate is their
/// plain left-to-right arithmetic mean.
EstimatorOutput summarize_terms(std::span<const double> terms, Method method);

EstimatorOutput mc_estimate(std::span<const double> f_values);

EstimatorOutput is_estimate(std::span<const WeightedSample> samples);

/// DIS estimate: samples must carry the mixture density as proposal_density.
EstimatorOutput dis_estimate(std::span<const WeightedSample> samples, double alpha);

template <class Real>
inline Real truncate_weight(Real w, Real r)
{
    return w <= r ? w : Real(0);
}

EstimatorOutput wbis_estimate(std::span<const WeightedSample> samples, double r);

/// Defensive mixture density alpha p + (1 - alpha) q.
template <class Real>
Real dis_mixture_density(Real p_value, Real q_value, Real alpha)
{
    if (!(alpha > Real(0) && alpha < Real(1))) {
        throw domain_error("dis_mixture_density: alpha must lie in (0, 1)");
    }
    return alpha * p_value + (Real(1) - alpha) * q_value;
}

/// Draws from the defensive mixture: the nominal sampler with probability
/// alpha, the proposal sampler otherwise. Samplers are callables taking the
/// engine and returning a point.
template <class NominalSampler, class ProposalSampler, class Engine>
auto dis_sample(NominalSampler&& nominal_sampler, ProposalSampler&& proposal_sampler, double alpha, Engine& rng)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw domain_error("dis_sample: alpha must lie in (0, 1)");
    }
    if (rng.uniform() < alpha) {
        return nominal_sampler(rng);
    }
    return proposal_sampler(rng);
}

/// Extracts the raw weights of a batch.
Eigen::ArrayXd weights_of(std::span<const WeightedSample> samples);

} // namespace wbis
