#include "cmrs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "cmrs/transform.hpp"

namespace cmrs {

namespace {

constexpr int kMaxNewton = 200;
constexpr double kRootTol = 1e-14;

// Eigenvalues of the symmetric tridiagonal matrix with diagonal d and
// off-diagonal e (e[k] couples k and k+1), by implicit QL. Used only to seed
// Newton iteration. Returned in ascending order.
std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e) {
    const int n = static_cast<int>(d.size());
    e.resize(static_cast<std::size_t>(n), 0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw std::runtime_error("tridiagonal QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

QuadratureRule build_hermite(int n) {
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    std::vector<double> off(static_cast<std::size_t>(n - 1));
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
    const std::vector<double> guess = tridiagonal_eigenvalues(diag, off);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Largest roots first, matching the symmetric fill below.
        double z = std::abs(guess[static_cast<std::size_t>(n - 1 - i)]);
        double pp = 0.0;
        double log_scale = 0.0;
        bool converged = false;
        for (int it = 0; it < kMaxNewton; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            log_scale = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
                if (std::abs(p1) > 1e100) {
                    p1 *= 1e-100;
                    p2 *= 1e-100;
                    log_scale += 100.0 * std::numbers::ln10;
                }
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= kRootTol * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_hermite: Newton iteration did not converge");
        const double log_w = std::log(2.0) - 2.0 * std::log(std::abs(pp)) - 2.0 * log_scale;
        const double w = log_w < -745.0 ? 0.0 : std::exp(log_w);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_hermite(int order) {
    if (order < 2) throw DomainError("Gauss-Hermite order must be >= 2");
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_hermite(order)).first;
    return it->second;
}

QuadratureRule gauss_legendre(int order, double a, double b) {
    if (order < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    const int n = order;
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < kMaxNewton; ++it) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= kRootTol) break;
        }
        rule.nodes[i] = xm - xl * z;
        rule.nodes[n - 1 - i] = xm + xl * z;
        rule.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

QuadratureRule gauss_laguerre(int order, double alpha) {
    if (order < 1) throw DomainError("Gauss-Laguerre order must be >= 1");
    if (!(alpha > -1.0)) throw DomainError("Gauss-Laguerre requires alpha > -1");
    const int n = order;
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    std::vector<double> diag(static_cast<std::size_t>(n));
    std::vector<double> off(static_cast<std::size_t>(std::max(n - 1, 0)));
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k * (k + alpha));
    const std::vector<double> guess = tridiagonal_eigenvalues(diag, off);
    for (int i = 0; i < n; ++i) {
        double z = guess[static_cast<std::size_t>(i)];
        double pp = 0.0;
        double p2 = 0.0;
        double log_scale = 0.0;
        bool converged = false;
        for (int it = 0; it < kMaxNewton; ++it) {
            double p1 = 1.0;
            p2 = 0.0;
            log_scale = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0 + alpha - z) * p2 - (j - 1.0 + alpha) * p3) / j;
                if (std::abs(p1) > 1e100) {
                    p1 *= 1e-100;
                    p2 *= 1e-100;
                    log_scale += 100.0 * std::numbers::ln10;
                }
            }
            pp = (n * p1 - (n + alpha) * p2) / z;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= kRootTol * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_laguerre: Newton iteration did not converge");
        rule.nodes[i] = z;
        const double log_mag = std::lgamma(alpha + n) - std::lgamma(static_cast<double>(n)) -
                               std::log(std::abs(pp * n * p2)) - 2.0 * log_scale;
        rule.weights[i] = log_mag < -745.0 ? 0.0 : std::exp(log_mag);
    }
    return rule;
}

}  // namespace cmrs
