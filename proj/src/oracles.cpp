#include "cmrs/oracles.hpp"

#include <cmath>
#include <memory>

namespace cmrs {

namespace {

void require_distinct(const std::vector<double>& v, const char* what) {
    for (std::size_t a = 0; a < v.size(); ++a) {
        for (std::size_t b = a + 1; b < v.size(); ++b) {
            if (std::abs(v[a] - v[b]) < kTieTolerance * std::max(v[a], v[b])) {
                throw DomainError(std::string(what) + " must be pairwise distinct for the closed form");
            }
        }
    }
}

// e^{-lambda s} * sum_{k >= r} x^k / k!, with x = (lambda - mu) s, evaluated
// without overflow or cancellation.
double scaled_exp_tail(double lambda, double mu, double s, int r) {
    const double x = (lambda - mu) * s;
    if (std::abs(x) <= 1.0) {
        double term = 1.0;
        for (int k = 1; k <= r; ++k) term *= x / k;
        double sum = 0.0;
        for (int k = r; k < r + 60; ++k) {
            sum += term;
            term *= x / (k + 1);
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return std::exp(-lambda * s) * sum;
    }
    // Leading polynomial sum_{k < r} x^k / k!
    double poly = 0.0;
    double term = 1.0;
    for (int k = 0; k < r; ++k) {
        poly += term;
        term *= x / (k + 1);
    }
    if (x > 0.0) return std::exp(-mu * s) * (1.0 - std::exp(-x) * poly);
    return std::exp(-lambda * s) * (std::exp(x) - poly);
}

}  // namespace

ClosedFormOracle mixed_exp_oracle(const MixedExpFrailtySpec& spec) {
    const auto& lam = spec.lambdas;
    const std::size_t n = lam.size();
    if (n == 0) throw DomainError("mixed-exponential oracle needs at least one risk");
    for (double l : lam) {
        if (!(l > 0.0)) throw DomainError("frailty scales must be > 0");
    }
    require_distinct(lam, "frailty scales lambda_i");
    if (!spec.mixing.lst || !spec.mixing.lst_deriv) throw DomainError("mixing law lacks an LST");
    std::vector<double> a(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t m = 0; m < n; ++m) {
            if (m != k) a[k] *= lam[k] / (lam[k] - lam[m]);
        }
    }
    ClosedFormOracle o;
    o.n = n;
    const auto lst = spec.mixing.lst;
    const auto dlst = spec.mixing.lst_deriv;
    o.f_S = [lam, a, dlst](double s) {
        double f = 0.0;
        for (std::size_t k = 0; k < lam.size(); ++k) f -= a[k] / lam[k] * dlst(s / lam[k]);
        return f;
    };
    o.xi = [lam, a, lst, dlst](std::size_t i, double s) {
        if (i >= lam.size()) throw IndexError("risk index out of range");
        double x = -(s / lam[i]) * a[i] * dlst(s / lam[i]);
        const double li = lst(s / lam[i]);
        for (std::size_t k = 0; k < lam.size(); ++k) {
            if (k == i) continue;
            x += a[k] * lam[i] / (lam[i] - lam[k]) * (li - lst(s / lam[k]));
        }
        return x;
    };
    return o;
}

ClosedFormOracle me_example_oracle(double lambda, double mu) {
    if (!(lambda > 0.0) || !(mu > 0.0)) throw DomainError("rates must be > 0");
    if (std::abs(lambda - mu) < kTieTolerance * std::max(lambda, mu)) {
        throw DomainError("me_example_oracle requires lambda != mu; use me_equal_rates_oracle");
    }
    const double d = lambda - mu;
    ClosedFormOracle o;
    o.n = 2;
    o.f_S = [lambda, mu, d](double s) {
        return lambda * lambda * mu / (d * d) * scaled_exp_tail(lambda, mu, s, 2);
    };
    auto xi1 = [lambda, mu, d](double s) {
        return 2.0 * lambda * lambda * mu / (d * d * d) * scaled_exp_tail(lambda, mu, s, 3);
    };
    auto f = o.f_S;
    o.xi = [xi1, f](std::size_t i, double s) {
        if (i == 0) return xi1(s);
        if (i == 1) return s * f(s) - xi1(s);
        throw IndexError("risk index out of range");
    };
    return o;
}

ClosedFormOracle me_equal_rates_oracle(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("rate must be > 0");
    ClosedFormOracle o;
    o.n = 2;
    o.f_S = [lambda](double s) { return 0.5 * lambda * lambda * lambda * s * s * std::exp(-lambda * s); };
    auto f = o.f_S;
    o.xi = [f](std::size_t i, double s) {
        if (i == 0) return 2.0 * s / 3.0 * f(s);
        if (i == 1) return s / 3.0 * f(s);
        throw IndexError("risk index out of range");
    };
    return o;
}

AllocationResult oracle_result(const ClosedFormOracle& oracle, const std::vector<double>& s_grid,
                               double balance_tol) {
    validate_grid(s_grid);
    std::vector<DensityRow> rows;
    rows.reserve(s_grid.size());
    for (double s : s_grid) {
        DensityRow row;
        row.s = s;
        row.density = oracle.f_S(s);
        row.xi.resize(oracle.n);
        for (std::size_t i = 0; i < oracle.n; ++i) row.xi[i] = oracle.xi(i, s);
        rows.push_back(std::move(row));
    }
    return assemble_result(std::move(rows), oracle.atoms, oracle.n, balance_tol, kDefaultDensityFloor,
                           "oracle");
}

}  // namespace cmrs
