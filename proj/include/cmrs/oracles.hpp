#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "cmrs/allocation.hpp"
#include "cmrs/models.hpp"

namespace cmrs {

/// Exact (or series) densities used as ground truth in verification.
struct ClosedFormOracle {
    std::size_t n = 0;
    std::function<double(double)> f_S;
    std::function<double(std::size_t, double)> xi;
    double valid_lo = 0.0;
    double valid_hi = std::numeric_limits<double>::infinity();
    /// Omitted probability mass for truncated series, 0 for exact formulas.
    double truncation_bound = 0.0;
    AtomSet atoms;

    [[nodiscard]] double h(std::size_t i, double s) const { return xi(i, s) / f_S(s); }
};

/// Rates closer than this (relative) are treated as tied.
inline constexpr double kTieTolerance = 1e-8;

/// Closed forms for mixed exponentials under frailty with distinct scales.
ClosedFormOracle mixed_exp_oracle(const MixedExpFrailtySpec& spec);

/// X_1 ~ Erlang(2, lambda), X_2 ~ Exp(mu) independent, lambda != mu.
ClosedFormOracle me_example_oracle(double lambda, double mu);
/// The same portfolio with lambda = mu: S ~ Erlang(3, lambda), h_1(s) = 2s/3.
ClosedFormOracle me_equal_rates_oracle(double lambda);

inline constexpr int kSeriesCountCap = 60;

/// Truncated Poisson-count series for the common-shock compound Poisson
/// model with distinct severity rates. The total claim count is truncated at
/// the smallest K with P(N > K) <= mass_tol (N ~ Poisson(lambda_S)); K above
/// kSeriesCountCap raises DomainError.
ClosedFormOracle cscp_series_oracle(const CommonShockCPSpec& spec, double mass_tol = 1e-8);

/// AllocationResult built from exact densities on a grid (method "oracle").
AllocationResult oracle_result(const ClosedFormOracle& oracle, const std::vector<double>& s_grid,
                               double balance_tol = kDefaultBalanceTol);

}  // namespace cmrs
