#include "wbis/credit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "wbis/error.hpp"
#include "wbis/normal.hpp"
#include "wbis/threshold.hpp"

namespace wbis {

std::int64_t CreditPortfolio::total_loss() const
{
    std::int64_t total = 0;
    for (auto c : loss) {
        total += c;
    }
    return total;
}

CreditPortfolio build_portfolio(std::uint64_t seed, std::size_t m, std::size_t d, std::int64_t loss_threshold)
{
    if (m == 0 || d == 0) {
        throw config_error("build_portfolio: m and d must be positive");
    }
    CreditPortfolio pf;
    pf.m = m;
    pf.d = d;
    pf.loss_threshold = loss_threshold;
    pf.build_seed = seed;
    const auto mi = static_cast<Eigen::Index>(m);
    const auto di = static_cast<Eigen::Index>(d);
    pf.loadings.resize(mi, di);
    pf.idiosyncratic.resize(mi);
    pf.default_prob.resize(mi);
    pf.default_threshold.resize(mi);
    pf.loss.resize(m);

    Philox4x32 rng(seed, stream_ids::portfolio_build);
    StandardNormal normal;
    const double md = static_cast<double>(m);
    for (Eigen::Index k = 0; k < mi; ++k) {
        const double kk = static_cast<double>(k + 1);
        pf.default_prob[k] = 0.01 * (1.0 + std::sin(16.0 * std::numbers::pi * kk / md));
        const auto c = static_cast<std::int64_t>(std::ceil(5.0 * kk / md));
        pf.loss[static_cast<std::size_t>(k)] = c * c;
        pf.default_threshold[k] = normal_quantile(1.0 - pf.default_prob[k]);

        Eigen::VectorXd dir(di);
        for (Eigen::Index j = 0; j < di; ++j) {
            dir[j] = std::abs(normal(rng));
        }
        const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        dir *= radius / dir.norm();
        pf.loadings.row(k) = dir.transpose();
        pf.idiosyncratic[k] = std::sqrt(std::max(0.0, 1.0 - dir.squaredNorm()));
    }
    return pf;
}

std::int64_t simulate_loss(const CreditPortfolio& portfolio, const Eigen::Ref<const Eigen::VectorXd>& z,
                           const Eigen::Ref<const Eigen::VectorXd>& eps)
{
    const Eigen::VectorXd latent = portfolio.loadings * z + portfolio.idiosyncratic.cwiseProduct(eps);
    std::int64_t total = 0;
    for (Eigen::Index k = 0; k < latent.size(); ++k) {
        if (latent[k] > portfolio.default_threshold[k]) {
            total += portfolio.loss[static_cast<std::size_t>(k)];
        }
    }
    return total;
}

std::int64_t simulate_loss(const CreditPortfolio& portfolio, const Eigen::Ref<const Eigen::VectorXd>& z,
                           Philox4x32& rng, StandardNormal& normal)
{
    const Eigen::VectorXd systematic = portfolio.loadings * z;
    std::int64_t total = 0;
    for (Eigen::Index k = 0; k < systematic.size(); ++k) {
        const double x = systematic[k] + portfolio.idiosyncratic[k] * normal(rng);
        if (x > portfolio.default_threshold[k]) {
            total += portfolio.loss[static_cast<std::size_t>(k)];
        }
    }
    return total;
}

GaussianProposal GaussianProposal::standard(std::size_t d)
{
    const auto di = static_cast<Eigen::Index>(d);
    return {Eigen::VectorXd::Zero(di), Eigen::VectorXd::Ones(di)};
}

void GaussianProposal::validate() const
{
    if (mean.size() != variance_diag.size() || mean.size() == 0) {
        throw config_error("GaussianProposal: mean and variance must have the same positive length");
    }
    if (!(variance_diag.array() > 0.0).all()) {
        throw config_error("GaussianProposal: variances must be strictly positive");
    }
}

double GaussianProposal::log_density(const Eigen::Ref<const Eigen::VectorXd>& z) const
{
    const Eigen::ArrayXd diff = z.array() - mean.array();
    const double quad = (diff.square() / variance_diag.array()).sum();
    const double log_det = variance_diag.array().log().sum();
    const double n = static_cast<double>(z.size());
    return -0.5 * (quad + log_det + n * std::log(2.0 * std::numbers::pi));
}

Eigen::VectorXd GaussianProposal::sample(Philox4x32& rng, StandardNormal& normal) const
{
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        z[j] = mean[j] + std::sqrt(variance_diag[j]) * normal(rng);
    }
    return z;
}

double standard_normal_log_density(const Eigen::Ref<const Eigen::VectorXd>& z)
{
    const double n = static_cast<double>(z.size());
    return -0.5 * (z.squaredNorm() + n * std::log(2.0 * std::numbers::pi));
}

double importance_weight_z(const GaussianProposal& proposal, const Eigen::Ref<const Eigen::VectorXd>& z)
{
    return std::exp(standard_normal_log_density(z) - proposal.log_density(z));
}

std::size_t CrossEntropyConfig::elite_count() const
{
    return static_cast<std::size_t>(std::ceil(elite_fraction * static_cast<double>(batch_size)));
}

void CrossEntropyConfig::validate() const
{
    if (batch_size == 0) {
        throw config_error("cross-entropy: batch_size must be positive");
    }
    if (!(elite_fraction > 0.0 && elite_fraction < 1.0)) {
        throw config_error("cross-entropy: elite_fraction must lie in (0, 1)");
    }
    if (max_iterations == 0) {
        throw config_error("cross-entropy: max_iterations must be positive");
    }
    if (!(smoothing > 0.0 && smoothing <= 1.0)) {
        throw config_error("cross-entropy: smoothing must lie in (0, 1]");
    }
    if (!(min_variance > 0.0)) {
        throw config_error("cross-entropy: min_variance must be positive");
    }
    if (elite_count() < 2) {
        throw config_error("cross-entropy: elite count ceil(elite_fraction * batch_size) must be at least 2");
    }
}

CrossEntropyFit cross_entropy_fit_detailed(const CreditPortfolio& portfolio, const CrossEntropyConfig& config,
                                           Philox4x32& rng)
{
    config.validate();
    const std::size_t d = portfolio.d;
    const auto di = static_cast<Eigen::Index>(d);
    // the target event L > x on integer losses is L >= x + 1
    const std::int64_t target = portfolio.loss_threshold + 1;

    CrossEntropyFit fit{GaussianProposal::standard(d), 0, {}, false};
    StandardNormal normal;
    std::vector<Eigen::VectorXd> zs(config.batch_size);
    std::vector<std::int64_t> losses(config.batch_size);
    std::vector<std::int64_t> sorted(config.batch_size);

    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        for (std::size_t i = 0; i < config.batch_size; ++i) {
            zs[i] = fit.proposal.sample(rng, normal);
            losses[i] = simulate_loss(portfolio, zs[i], rng, normal);
        }
        sorted = losses;
        const std::size_t elite = config.elite_count();
        std::nth_element(sorted.begin(), sorted.end() - static_cast<std::ptrdiff_t>(elite), sorted.end());
        const std::int64_t quantile = sorted[config.batch_size - elite];
        const std::int64_t min_loss = *std::min_element(losses.begin(), losses.end());

        std::int64_t level = std::min(target, quantile);
        bool strict = false;
        if (level < target && level <= min_loss) {
            // no discrimination at this level; require strict improvement
            strict = true;
        }

        double weight_sum = 0.0;
        Eigen::VectorXd first = Eigen::VectorXd::Zero(di);
        std::vector<std::pair<double, std::size_t>> elites;
        for (std::size_t i = 0; i < config.batch_size; ++i) {
            const bool in = strict ? losses[i] > level : losses[i] >= level;
            if (!in) {
                continue;
            }
            const double w = importance_weight_z(fit.proposal, zs[i]);
            elites.emplace_back(w, i);
            weight_sum += w;
            first += w * zs[i];
        }
        if (elites.empty() || !(weight_sum > 0.0) || !std::isfinite(weight_sum)) {
            throw fit_failure_error("cross_entropy_fit: no usable elite samples at iteration " +
                                    std::to_string(it + 1) + "; increase batch_size");
        }
        const Eigen::VectorXd mean = first / weight_sum;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(di);
        for (const auto& [w, i] : elites) {
            var += w * (zs[i] - mean).cwiseAbs2();
        }
        var /= weight_sum;

        const double s = config.smoothing;
        fit.proposal.mean = s * mean + (1.0 - s) * fit.proposal.mean;
        fit.proposal.variance_diag =
            (s * var + (1.0 - s) * fit.proposal.variance_diag).cwiseMax(config.min_variance);
        fit.iterations = it + 1;
        fit.level_history.push_back(static_cast<double>(level));
        if (level >= target) {
            fit.reached_target = true;
            break;
        }
    }
    return fit;
}

GaussianProposal cross_entropy_fit(const CreditPortfolio& portfolio, const CrossEntropyConfig& config,
                                   Philox4x32& rng)
{
    return cross_entropy_fit_detailed(portfolio, config, rng).proposal;
}

namespace {

double log_sum_exp(double a, double b)
{
    const double hi = std::max(a, b);
    if (std::isinf(hi) && hi < 0.0) {
        return hi;
    }
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

} // namespace

std::vector<WeightedSample> credit_batch(const CreditPortfolio& portfolio, const GaussianProposal& proposal,
                                         std::size_t n, std::optional<double> alpha, Philox4x32& rng)
{
    proposal.validate();
    if (static_cast<std::size_t>(proposal.mean.size()) != portfolio.d) {
        throw config_error("credit_batch: proposal dimension does not match the portfolio factor count");
    }
    const auto nominal = GaussianProposal::standard(portfolio.d);
    StandardNormal normal;
    auto draw_nominal = [&](Philox4x32& g) { return nominal.sample(g, normal); };
    auto draw_proposal = [&](Philox4x32& g) { return proposal.sample(g, normal); };

    std::vector<WeightedSample> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd z = alpha ? dis_sample(draw_nominal, draw_proposal, *alpha, rng) : draw_proposal(rng);
        const double f = simulate_loss(portfolio, z, rng, normal) > portfolio.loss_threshold ? 1.0 : 0.0;
        const double log_p = standard_normal_log_density(z);
        double log_q = proposal.log_density(z);
        if (alpha) {
            log_q = log_sum_exp(std::log(*alpha) + log_p, std::log1p(-*alpha) + log_q);
        }
        batch.push_back(make_weighted_sample_log(std::move(z), f, log_p, log_q));
    }
    return batch;
}

DefaultProbResult estimate_default_prob(const CreditPortfolio& portfolio, const GaussianProposal& proposal,
                                        Method method, std::size_t n, const DefaultProbParams& params,
                                        Philox4x32& rng)
{
    if (n == 0) {
        throw domain_error("estimate_default_prob: n must be positive");
    }
    switch (method) {
    case Method::MC: {
        const auto nominal = GaussianProposal::standard(portfolio.d);
        StandardNormal normal;
        std::vector<double> f(n);
        for (auto& v : f) {
            const Eigen::VectorXd z = nominal.sample(rng, normal);
            v = simulate_loss(portfolio, z, rng, normal) > portfolio.loss_threshold ? 1.0 : 0.0;
        }
        return {mc_estimate(f), std::nullopt, false};
    }
    case Method::IS: {
        const auto batch = credit_batch(portfolio, proposal, n, std::nullopt, rng);
        return {is_estimate(batch), std::nullopt, false};
    }
    case Method::DIS: {
        const auto batch = credit_batch(portfolio, proposal, n, params.alpha, rng);
        return {dis_estimate(batch, params.alpha), std::nullopt, false};
    }
    case Method::WBIS: {
        const auto batch = credit_batch(portfolio, proposal, n, std::nullopt, rng);
        const Eigen::ArrayXd w = weights_of(batch);
        const auto plan = make_grouping(n, params.c_constant);
        const auto sel = select_threshold(w, plan, params.significance);
        return {wbis_estimate(batch, sel.r), sel.r, sel.passed_any};
    }
    }
    throw domain_error("estimate_default_prob: unknown method");
}

void save_portfolio(const std::filesystem::path& path, const CreditPortfolio& portfolio,
                    const GaussianProposal* proposal)
{
    using nlohmann::json;
    json j;
    j["build_seed"] = portfolio.build_seed;
    j["m"] = portfolio.m;
    j["d"] = portfolio.d;
    j["loss_threshold"] = portfolio.loss_threshold;
    json rows = json::array();
    for (Eigen::Index k = 0; k < portfolio.loadings.rows(); ++k) {
        std::vector<double> row(portfolio.loadings.row(k).begin(), portfolio.loadings.row(k).end());
        rows.push_back(row);
    }
    j["loadings"] = rows;
    j["idiosyncratic"] = std::vector<double>(portfolio.idiosyncratic.begin(), portfolio.idiosyncratic.end());
    j["default_prob"] = std::vector<double>(portfolio.default_prob.begin(), portfolio.default_prob.end());
    j["loss"] = portfolio.loss;
    j["default_threshold"] =
        std::vector<double>(portfolio.default_threshold.begin(), portfolio.default_threshold.end());
    if (proposal) {
        j["proposal"] = {
            {"mean", std::vector<double>(proposal->mean.begin(), proposal->mean.end())},
            {"variance_diag", std::vector<double>(proposal->variance_diag.begin(), proposal->variance_diag.end())},
        };
    }
    std::ofstream out(path);
    if (!out) {
        throw error("save_portfolio: cannot open " + path.string());
    }
    // doubles are written in shortest round-trip form
    out << j.dump(1) << '\n';
}

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

PortfolioSnapshot load_portfolio(const std::filesystem::path& path)
{
    using nlohmann::json;
    std::ifstream in(path);
    if (!in) {
        throw error("load_portfolio: cannot open " + path.string());
    }
    const json j = json::parse(in);
    PortfolioSnapshot snap;
    auto& pf = snap.portfolio;
    pf.build_seed = j.at("build_seed").get<std::uint64_t>();
    pf.m = j.at("m").get<std::size_t>();
    pf.d = j.at("d").get<std::size_t>();
    pf.loss_threshold = j.at("loss_threshold").get<std::int64_t>();
    const auto rows = j.at("loadings").get<std::vector<std::vector<double>>>();
    if (rows.size() != pf.m) {
        throw error("load_portfolio: loadings row count does not match m");
    }
    pf.loadings.resize(static_cast<Eigen::Index>(pf.m), static_cast<Eigen::Index>(pf.d));
    for (std::size_t k = 0; k < pf.m; ++k) {
        if (rows[k].size() != pf.d) {
            throw error("load_portfolio: loadings row width does not match d");
        }
        for (std::size_t c = 0; c < pf.d; ++c) {
            pf.loadings(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = rows[k][c];
        }
    }
    pf.idiosyncratic = to_vector(j.at("idiosyncratic").get<std::vector<double>>());
    pf.default_prob = to_vector(j.at("default_prob").get<std::vector<double>>());
    pf.loss = j.at("loss").get<std::vector<std::int64_t>>();
    pf.default_threshold = to_vector(j.at("default_threshold").get<std::vector<double>>());
    if (j.contains("proposal")) {
        GaussianProposal q{to_vector(j["proposal"].at("mean").get<std::vector<double>>()),
                           to_vector(j["proposal"].at("variance_diag").get<std::vector<double>>())};
        q.validate();
        snap.proposal = std::move(q);
    }
    return snap;
}

} // namespace wbis
