#pragma once

// Independent numerical oracles shared by the unit and acceptance suites.
// Nothing here calls into the library.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace wbis::test {

/// Adaptive Simpson quadrature on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-14,
                               int max_depth = 50)
{
    struct Rec
    {
        const std::function<double(double)>& f;
        double run(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const
        {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
                return left + right + delta / 15.0;
            }
            return run(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
                   run(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
        }
    };
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}.run(a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

/// Composite Gauss-Legendre rule over consecutive panels [breaks[i], breaks[i+1]].
struct QuadratureRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, const std::vector<int>& points)
{
    QuadratureRule rule;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        std::vector<double> x, w;
        gauss_legendre(points[p], x, w);
        const double half = 0.5 * (breaks[p + 1] - breaks[p]);
        const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
        for (std::size_t i = 0; i < x.size(); ++i) {
            rule.nodes.push_back(mid + half * x[i]);
            rule.weights.push_back(half * w[i]);
        }
    }
    return rule;
}

/// Standard normal density from the exponential series, in long double.
inline long double series_normal_pdf(long double x)
{
    const long double t = -x * x / 2.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= t / k;
        sum += term;
        if (std::abs(term) < 1e-25L) {
            break;
        }
    }
    const long double inv_sqrt_2pi = 0.398942280401432677939946059934381868L;
    return inv_sqrt_2pi * sum;
}

/// Binomial standard error of a rate estimated from `trials` draws.
inline double binomial_se(double rate, double trials)
{
    return std::sqrt(rate * (1.0 - rate) / trials);
}

} // namespace wbis::test
