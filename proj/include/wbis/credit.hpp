#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "estimators.hpp"
#include "rng.hpp"
#include "threshold.hpp"

namespace wbis {

/// Latent-factor default model: obligor k defaults when
/// a_k . Z + b_k eps_k > x_k with Z ~ N(0, I_d), eps_k ~ N(0, 1).
struct CreditPortfolio
{
    std::size_t m = 1000;
    std::size_t d = 10;
    Eigen::MatrixXd loadings;        // m x d, rows a_k
    Eigen::VectorXd idiosyncratic;   // b_k
    Eigen::VectorXd default_prob;    // p_k
    std::vector<std::int64_t> loss;  // c_k
    Eigen::VectorXd default_threshold;  // x_k
    std::int64_t loss_threshold = 9500;
    std::uint64_t build_seed = 0;

    std::int64_t total_loss() const;
};

/// p_k = 0.01 (1 + sin(16 pi k / m)), c_k = ceil(5k/m)^2, loadings uniform in
/// the nonnegative orthant of the d-dimensional unit ball, b_k the positive
/// complement, x_k = Phi^{-1}(1 - p_k). Deterministic in seed.
CreditPortfolio build_portfolio(std::uint64_t seed, std::size_t m = 1000, std::size_t d = 10,
                                std::int64_t loss_threshold = 9500);

/// L = sum_k c_k 1{a_k . z + b_k eps_k > x_k}, accumulated in integers.
std::int64_t simulate_loss(const CreditPortfolio& portfolio, const Eigen::Ref<const Eigen::VectorXd>& z,
                           const Eigen::Ref<const Eigen::VectorXd>& eps);

/// Loss with fresh nominal idiosyncratic draws.
std::int64_t simulate_loss(const CreditPortfolio& portfolio, const Eigen::Ref<const Eigen::VectorXd>& z,
                           Philox4x32& rng, StandardNormal& normal);

/// Diagonal Gaussian proposal over the systematic factors.
struct GaussianProposal
{
    Eigen::VectorXd mean;
    Eigen::VectorXd variance_diag;

    static GaussianProposal standard(std::size_t d);

    void validate() const;
    double log_density(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    Eigen::VectorXd sample(Philox4x32& rng, StandardNormal& normal) const;
};

double standard_normal_log_density(const Eigen::Ref<const Eigen::VectorXd>& z);

/// phi_d(z) / q(z), evaluated in log space.
double importance_weight_z(const GaussianProposal& proposal, const Eigen::Ref<const Eigen::VectorXd>& z);

struct CrossEntropyConfig
{
    std::size_t batch_size = 5000;
    double elite_fraction = 0.1;
    std::size_t max_iterations = 30;
    double smoothing = 0.7;
    double min_variance = 0.04;

    std::size_t elite_count() const;
    void validate() const;
};

struct CrossEntropyFit
{
    GaussianProposal proposal;
    std::size_t iterations;
    std::vector<double> level_history;  // working threshold per iteration
    bool reached_target;
};

/// Multi-level cross-entropy fit of a diagonal Gaussian proposal for the
/// event {L > loss_threshold}.
CrossEntropyFit cross_entropy_fit_detailed(const CreditPortfolio& portfolio, const CrossEntropyConfig& config,
                                           Philox4x32& rng);

GaussianProposal cross_entropy_fit(const CreditPortfolio& portfolio, const CrossEntropyConfig& config,
                                   Philox4x32& rng);

struct DefaultProbParams
{
    double alpha = 0.1;          // DIS
    double significance = 0.05;  // WBIS
    double c_constant = default_c_constant;  // WBIS
};

struct DefaultProbResult
{
    EstimatorOutput output;
    std::optional<double> threshold_r;
    bool threshold_passed = false;
};

/// Estimates P(L > x) with n draws of Z from the method's sampling density
/// (nominal for MC, proposal for IS/WBIS, defensive mixture for DIS).
DefaultProbResult estimate_default_prob(const CreditPortfolio& portfolio, const GaussianProposal& proposal,
                                        Method method, std::size_t n, const DefaultProbParams& params,
                                        Philox4x32& rng);

/// Weighted samples under the proposal (or the defensive mixture when alpha
/// is set). The point is z; f_value = 1{L > x}.
std::vector<WeightedSample> credit_batch(const CreditPortfolio& portfolio, const GaussianProposal& proposal,
                                         std::size_t n, std::optional<double> alpha, Philox4x32& rng);

/// JSON snapshot of the portfolio parameters, optionally with a fitted proposal.
void save_portfolio(const std::filesystem::path& path, const CreditPortfolio& portfolio,
                    const GaussianProposal* proposal = nullptr);

struct PortfolioSnapshot
{
    CreditPortfolio portfolio;
    std::optional<GaussianProposal> proposal;
};

PortfolioSnapshot load_portfolio(const std::filesystem::path& path);

} // namespace wbis
