#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "estimators.hpp"
#include "rng.hpp"

namespace wbis {

/// Normalizing constant of the N_mul shape on (-1/2, 1/2):
/// 1 / [ (Phi(theta/2) - Phi(-theta/2)) / theta - phi(theta/2) ].
double nmul_beta(double theta);

/// Density beta(theta) (phi(theta x) - phi(theta/2)) on (-1/2, 1/2), zero
/// elsewhere.
class NmulDensity
{
public:
    explicit NmulDensity(double theta);

    double theta() const { return theta_; }
    double beta() const { return beta_; }
    /// Supremum of the density, attained at 0.
    double envelope_max() const { return envelope_max_; }

    double pdf(double x) const;

    /// Rejection sampling from uniform(-1/2, 1/2) under envelope_max.
    double sample(Philox4x32& rng) const;

private:
    double theta_;
    double beta_;
    double edge_;
    double envelope_max_;
};

double nmul_pdf(double x, double theta);
double nmul_sample(double theta, Philox4x32& rng);

/// Perturbed product-mixture integrand on the hypercube (-1/2, 1/2)^d with
/// uniform nominal density. Its integral under the nominal is 1.
struct MixtureProblem
{
    std::size_t dimension = 5;
    double theta = 2.0;
    double perturbation = 1e-3;
    double mix_weight_main = 0.8;
    double mix_weight_perturbed = 0.2;
    double inner_half_width = 0.25;

    /// Throws config_error when a field is out of range.
    void validate() const;
};

class MixtureModel
{
public:
    explicit MixtureModel(MixtureProblem problem = {});

    const MixtureProblem& problem() const { return problem_; }
    const NmulDensity& factor() const { return factor_; }

    /// f(x) = w_main prod N(x_j) + w_pert prod [N(x_j) + eps - 2 eps 1{|x_j| <= 1/4}].
    double integrand(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// One-dimensional perturbed factor N(x) + eps - 2 eps 1{|x| <= 1/4}.
    double perturbed_factor(double x) const;

    /// Uniform nominal density: 1 inside the open cube, 0 outside.
    double nominal_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Product proposal density prod N_mul(x_j, theta).
    double proposal_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// 1 / proposal_density(x). Throws support_violation_error where the
    /// proposal vanishes.
    double weight(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    Eigen::VectorXd sample_nominal(Philox4x32& rng) const;
    Eigen::VectorXd sample_proposal(Philox4x32& rng) const;

    /// n draws from the proposal, weighted against the nominal.
    std::vector<WeightedSample> proposal_batch(std::size_t n, Philox4x32& rng) const;

    /// n draws from the defensive mixture; proposal_density holds the mixture
    /// density so weight = p / q_alpha.
    std::vector<WeightedSample> defensive_batch(std::size_t n, double alpha, Philox4x32& rng) const;

    /// f at n nominal draws.
    std::vector<double> nominal_f_values(std::size_t n, Philox4x32& rng) const;

private:
    MixtureProblem problem_;
    NmulDensity factor_;
};

} // namespace wbis
