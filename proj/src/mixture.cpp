#include "wbis/mixture.hpp"

#include <cmath>
#include <string>

#include "wbis/error.hpp"
#include "wbis/normal.hpp"

namespace wbis {

double nmul_beta(double theta)
{
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw domain_error("nmul_beta: theta must be positive and finite");
    }
    const double half = 0.5 * theta;
    const double mass = (normal_cdf(half) - normal_cdf(-half)) / theta - normal_pdf(half);
    if (!(mass > 0.0)) {
        throw domain_error("nmul_beta: normalizing integral is not positive for theta = " + std::to_string(theta));
    }
    return 1.0 / mass;
}

NmulDensity::NmulDensity(double theta)
    : theta_(theta), beta_(nmul_beta(theta)), edge_(normal_pdf(0.5 * theta))
{
    envelope_max_ = beta_ * (normal_pdf(0.0) - edge_);
}

double NmulDensity::pdf(double x) const
{
    if (!(x > -0.5 && x < 0.5)) {
        return 0.0;
    }
    return std::max(0.0, beta_ * (normal_pdf(theta_ * x) - edge_));
}

double NmulDensity::sample(Philox4x32& rng) const
{
    for (;;) {
        const double x = rng.uniform() - 0.5;
        const double u = rng.uniform() * envelope_max_;
        if (u < pdf(x)) {
            return x;
        }
    }
}

double nmul_pdf(double x, double theta)
{
    return NmulDensity(theta).pdf(x);
}

double nmul_sample(double theta, Philox4x32& rng)
{
    return NmulDensity(theta).sample(rng);
}

void MixtureProblem::validate() const
{
    if (dimension == 0) {
        throw config_error("mixture: dimension must be positive");
    }
    if (!(theta > 0.0)) {
        throw config_error("mixture: theta must be positive");
    }
    if (!(perturbation >= 0.0)) {
        throw config_error("mixture: perturbation must be nonnegative");
    }
    if (!(mix_weight_main >= 0.0 && mix_weight_perturbed >= 0.0) ||
        std::abs(mix_weight_main + mix_weight_perturbed - 1.0) > 1e-12) {
        throw config_error("mixture: mix weights must be nonnegative and sum to 1");
    }
    if (!(inner_half_width > 0.0 && inner_half_width < 0.5)) {
        throw config_error("mixture: inner_half_width must lie in (0, 0.5)");
    }
}

MixtureModel::MixtureModel(MixtureProblem problem)
    : problem_((problem.validate(), problem)), factor_(problem.theta)
{}

double MixtureModel::perturbed_factor(double x) const
{
    const double eps = problem_.perturbation;
    const double inner = std::abs(x) <= problem_.inner_half_width ? 1.0 : 0.0;
    return factor_.pdf(x) + eps - 2.0 * eps * inner;
}

double MixtureModel::integrand(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    double main = 1.0;
    double pert = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        main *= factor_.pdf(x[j]);
        pert *= perturbed_factor(x[j]);
    }
    return problem_.mix_weight_main * main + problem_.mix_weight_perturbed * pert;
}

double MixtureModel::nominal_density(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    return ((x.array() > -0.5) && (x.array() < 0.5)).all() ? 1.0 : 0.0;
}

double MixtureModel::proposal_density(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    double q = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        q *= factor_.pdf(x[j]);
    }
    return q;
}

double MixtureModel::weight(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    const double q = proposal_density(x);
    if (!(q > 0.0)) {
        throw support_violation_error("mixture weight: proposal density vanishes at the sample");
    }
    return nominal_density(x) / q;
}

Eigen::VectorXd MixtureModel::sample_nominal(Philox4x32& rng) const
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(problem_.dimension));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        x[j] = rng.uniform() - 0.5;
    }
    return x;
}

Eigen::VectorXd MixtureModel::sample_proposal(Philox4x32& rng) const
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(problem_.dimension));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        x[j] = factor_.sample(rng);
    }
    return x;
}

std::vector<WeightedSample> MixtureModel::proposal_batch(std::size_t n, Philox4x32& rng) const
{
    std::vector<WeightedSample> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd x = sample_proposal(rng);
        const double f = integrand(x);
        const double p = nominal_density(x);
        const double q = proposal_density(x);
        batch.push_back(make_weighted_sample(std::move(x), f, p, q));
    }
    return batch;
}

std::vector<WeightedSample> MixtureModel::defensive_batch(std::size_t n, double alpha, Philox4x32& rng) const
{
    std::vector<WeightedSample> batch;
    batch.reserve(n);
    auto nominal = [this](Philox4x32& g) { return sample_nominal(g); };
    auto proposal = [this](Philox4x32& g) { return sample_proposal(g); };
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd x = dis_sample(nominal, proposal, alpha, rng);
        const double f = integrand(x);
        const double p = nominal_density(x);
        const double qa = dis_mixture_density(p, proposal_density(x), alpha);
        batch.push_back(make_weighted_sample(std::move(x), f, p, qa));
    }
    return batch;
}

std::vector<double> MixtureModel::nominal_f_values(std::size_t n, Philox4x32& rng) const
{
    std::vector<double> f(n);
    for (auto& v : f) {
        v = integrand(sample_nominal(rng));
    }
    return f;
}

} // namespace wbis
