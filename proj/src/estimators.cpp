#include "wbis/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace wbis {

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::MC: return "MC";
    case Method::IS: return "IS";
    case Method::DIS: return "DIS";
    case Method::WBIS: return "WBIS";
    }
    return "?";
}

Method parse_method(std::string_view name)
{
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "MC") return Method::MC;
    if (upper == "IS") return Method::IS;
    if (upper == "DIS") return Method::DIS;
    if (upper == "WBIS") return Method::WBIS;
    throw config_error("unknown method '" + std::string(name) + "' (expected MC, IS, DIS or WBIS)");
}

WeightedSample make_weighted_sample(Eigen::VectorXd point, double f_value, double nominal_density,
                                    double proposal_density)
{
    if (nominal_density < 0.0 || proposal_density < 0.0) {
        throw domain_error("make_weighted_sample: negative density");
    }
    if (nominal_density > 0.0 && !(proposal_density > 0.0)) {
        throw support_violation_error("make_weighted_sample: proposal density is zero where nominal density is " +
                                      std::to_string(nominal_density));
    }
    const double weight = nominal_density > 0.0 ? nominal_density / proposal_density : 0.0;
    return {std::move(point), f_value, nominal_density, proposal_density, weight};
}

WeightedSample make_weighted_sample_log(Eigen::VectorXd point, double f_value, double log_nominal,
                                        double log_proposal)
{
    if (std::isinf(log_proposal) && log_proposal < 0.0 && !(std::isinf(log_nominal) && log_nominal < 0.0)) {
        throw support_violation_error("make_weighted_sample_log: proposal density is zero on the nominal support");
    }
    const double weight = std::isinf(log_nominal) && log_nominal < 0.0 ? 0.0 : std::exp(log_nominal - log_proposal);
    return {std::move(point), f_value, std::exp(log_nominal), std::exp(log_proposal), weight};
}

EstimatorOutput summarize_terms(std::span<const double> terms, Method method)
{
    const std::size_t n = terms.size();
    if (n == 0) {
        throw domain_error("estimator: empty sample batch");
    }
    double sum = 0.0;
    for (double t : terms) {
        sum += t;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double t : terms) {
        ss += (t - mean) * (t - mean);
    }
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    return {mean, var, n, method, std::nullopt, std::nullopt};
}

EstimatorOutput mc_estimate(std::span<const double> f_values)
{
    return summarize_terms(f_values, Method::MC);
}

namespace {

template <class Weigh>
std::vector<double> weighted_terms(std::span<const WeightedSample> samples, Weigh&& weigh)
{
    std::vector<double> terms;
    terms.reserve(samples.size());
    for (const auto& s : samples) {
        terms.push_back(s.f_value * weigh(s.weight));
    }
    return terms;
}

} // namespace

EstimatorOutput is_estimate(std::span<const WeightedSample> samples)
{
    const auto terms = weighted_terms(samples, [](double w) { return w; });
    return summarize_terms(terms, Method::IS);
}

EstimatorOutput dis_estimate(std::span<const WeightedSample> samples, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw domain_error("dis_estimate: alpha must lie in (0, 1)");
    }
    const auto terms = weighted_terms(samples, [](double w) { return w; });
    auto out = summarize_terms(terms, Method::DIS);
    out.alpha = alpha;
    return out;
}

EstimatorOutput wbis_estimate(std::span<const WeightedSample> samples, double r)
{
    if (!(r > 0.0)) {
        throw domain_error("wbis_estimate: truncation bound must be positive");
    }
    const auto terms = weighted_terms(samples, [r](double w) { return truncate_weight(w, r); });
    auto out = summarize_terms(terms, Method::WBIS);
    out.truncation_bound = r;
    return out;
}

Eigen::ArrayXd weights_of(std::span<const WeightedSample> samples)
{
    Eigen::ArrayXd w(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        w[static_cast<Eigen::Index>(i)] = samples[i].weight;
    }
    return w;
}

} // namespace wbis
