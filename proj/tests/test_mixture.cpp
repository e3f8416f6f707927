#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "test_support.hpp"
#include "wbis/error.hpp"
#include "wbis/mixture.hpp"
#include "wbis/rng.hpp"

using namespace wbis;

namespace {

double phi(double x)
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// normalizing constant by direct quadrature of the unnormalized shape
double beta_oracle(double theta)
{
    const double edge = phi(theta / 2.0);
    const double mass = test::adaptive_simpson([&](double x) { return phi(theta * x) - edge; }, -0.5, 0.5);
    return 1.0 / mass;
}

double pdf_oracle(double x, double theta)
{
    if (x <= -0.5 || x >= 0.5) return 0.0;
    return beta_oracle(theta) * (phi(theta * x) - phi(theta / 2.0));
}

} // namespace

TEST_CASE("beta matches quadrature")
{
    for (double theta : {0.5, 1.0, 2.0, 3.0, 6.0}) {
        CHECK(nmul_beta(theta) == doctest::Approx(beta_oracle(theta)).epsilon(1e-10));
    }
    CHECK(nmul_beta(2.0) == doctest::Approx(10.0630).epsilon(1e-4));
    CHECK_THROWS_AS(nmul_beta(0.0), domain_error);
    CHECK_THROWS_AS(nmul_beta(-1.0), domain_error);
    CHECK_THROWS_AS(nmul_beta(std::nan("")), domain_error);
}

TEST_CASE("N_mul density values")
{
    const NmulDensity n2(2.0);
    CHECK(n2.pdf(0.0) == doctest::Approx(pdf_oracle(0.0, 2.0)).epsilon(1e-10));
    CHECK(n2.pdf(0.0) == doctest::Approx(1.5795).epsilon(1e-4));
    CHECK(n2.pdf(0.25) == doctest::Approx(pdf_oracle(0.25, 2.0)).epsilon(1e-10));
    CHECK(n2.pdf(-0.25) == n2.pdf(0.25));
    CHECK(n2.pdf(0.5) == 0.0);
    CHECK(n2.pdf(-0.5) == 0.0);
    CHECK(n2.pdf(0.7) == 0.0);
    CHECK(n2.pdf(0.4999999) > 0.0);
    CHECK(n2.envelope_max() == n2.pdf(0.0));
    CHECK(nmul_pdf(0.1, 2.0) == n2.pdf(0.1));
    const double mass = test::adaptive_simpson([&](double x) { return n2.pdf(x); }, -0.5, 0.5);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rejection sampler matches the density")
{
    const NmulDensity n2(2.0);
    Philox4x32 g(11, 0);
    const std::size_t draws = 1000000;
    std::vector<double> xs(draws);
    double sum = 0.0;
    for (auto& x : xs) {
        x = n2.sample(g);
        REQUIRE(x > -0.5);
        REQUIRE(x < 0.5);
        sum += x;
    }
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 1; i < 100; ++i) {
        const double t = -0.5 + i / 100.0;
        const double cdf = test::adaptive_simpson([&](double x) { return pdf_oracle(x, 2.0); }, -0.5, t, 1e-12);
        const double emp = double(std::lower_bound(xs.begin(), xs.end(), t) - xs.begin()) / draws;
        ks = std::max(ks, std::abs(emp - cdf));
    }
    CHECK(ks < 0.002);
    // symmetric density, variance below uniform's 1/12
    CHECK(std::abs(sum / draws) < 3.0 * std::sqrt(1.0 / 12.0 / draws));
}

TEST_CASE("integrand values")
{
    const MixtureModel model;
    const double eps = 1e-3;
    const double n0 = pdf_oracle(0.0, 2.0);
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(5);
    const double expected = 0.8 * std::pow(n0, 5) + 0.2 * std::pow(n0 - eps, 5);
    CHECK(model.integrand(origin) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(model.integrand(origin) == doctest::Approx(9.828).epsilon(1e-3));

    // near the corner every N factor vanishes and only eps^5 remains
    Eigen::VectorXd corner = Eigen::VectorXd::Constant(5, 0.5 - 1e-12);
    CHECK(model.integrand(corner) == doctest::Approx(0.2 * std::pow(eps, 5)).epsilon(1e-3));

    CHECK(model.perturbed_factor(0.25) == doctest::Approx(pdf_oracle(0.25, 2.0) - eps));
    CHECK(model.perturbed_factor(0.26) == doctest::Approx(pdf_oracle(0.26, 2.0) + eps));

    Philox4x32 g(5, 5);
    for (int t = 0; t < 200; ++t) {
        const Eigen::VectorXd x = model.sample_nominal(g);
        const double f = model.integrand(x);
        CHECK(f >= 0.2 * std::pow(eps, 5) * (1.0 - 1e-9) - 1e-300);
        Eigen::VectorXd flipped = -x;
        CHECK(model.integrand(flipped) == doctest::Approx(f).epsilon(1e-13));
        Eigen::VectorXd perm = x;
        std::swap(perm[0], perm[3]);
        std::swap(perm[1], perm[4]);
        CHECK(model.integrand(perm) == doctest::Approx(f).epsilon(1e-13));
    }
}

TEST_CASE("weights and densities")
{
    const MixtureModel model;
    const double n0 = pdf_oracle(0.0, 2.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
    CHECK(model.nominal_density(x) == 1.0);
    CHECK(model.proposal_density(x) == doctest::Approx(std::pow(n0, 5)).epsilon(1e-10));
    CHECK(model.weight(x) == doctest::Approx(0.1017).epsilon(1e-3));
    x.setConstant(0.25);
    CHECK(model.weight(x) == doctest::Approx(std::pow(pdf_oracle(0.25, 2.0), -5)).epsilon(1e-10));
    x.setConstant(0.49);
    CHECK(model.weight(x) > 1e3);
    x[2] = 0.5;
    CHECK(model.nominal_density(x) == 0.0);
    CHECK_THROWS_AS(model.weight(x), support_violation_error);
}

TEST_CASE("per-axis factors integrate as expected")
{
    const MixtureModel model;
    const std::vector<double> breaks{-0.5, -0.25, 0.25, 0.5};
    const auto rule = test::composite_gauss_legendre(breaks, {40, 40, 40});
    double f_main = 0.0, f_pert = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        f_main += rule.weights[i] * model.factor().pdf(rule.nodes[i]);
        f_pert += rule.weights[i] * model.perturbed_factor(rule.nodes[i]);
    }
    CHECK(f_main == doctest::Approx(1.0).epsilon(1e-12));
    // the perturbation adds eps over half the cube and removes it over the other half
    CHECK(f_pert == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(0.8 * std::pow(f_main, 5) + 0.2 * std::pow(f_pert, 5) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("batches")
{
    const MixtureModel model;
    Philox4x32 g(3, 1);
    const auto batch = model.proposal_batch(1000, g);
    CHECK(batch.size() == 1000);
    for (const auto& s : batch) {
        CHECK(s.weight == doctest::Approx(1.0 / s.proposal_density).epsilon(1e-14));
        CHECK(s.f_value == model.integrand(s.point));
    }
    const auto dis = model.defensive_batch(1000, 0.25, g);
    for (const auto& s : dis) {
        const double q = 0.25 + 0.75 * model.proposal_density(s.point);
        CHECK(s.proposal_density == doctest::Approx(q).epsilon(1e-14));
        CHECK(s.weight <= 4.0 + 1e-12);
    }
    Philox4x32 a(7, 7), b(7, 7);
    const auto b1 = model.proposal_batch(50, a);
    const auto b2 = model.proposal_batch(50, b);
    for (std::size_t i = 0; i < 50; ++i) CHECK(b1[i].weight == b2[i].weight);
}

TEST_CASE("problem validation")
{
    MixtureProblem p;
    CHECK_NOTHROW(p.validate());
    p.dimension = 0;
    CHECK_THROWS_AS(p.validate(), config_error);
    p = {};
    p.theta = 0.0;
    CHECK_THROWS_AS(p.validate(), config_error);
    p = {};
    p.mix_weight_main = 0.5;
    CHECK_THROWS_AS(p.validate(), config_error);
    p = {};
    p.inner_half_width = 0.6;
    CHECK_THROWS_AS(p.validate(), config_error);
}
