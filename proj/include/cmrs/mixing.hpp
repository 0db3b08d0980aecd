#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace cmrs {

class CounterRng;

struct MixingNode {
    double theta = 0.0;
    double weight = 0.0;
};

/// Law of a positive frailty factor Theta: its LST, LST derivative and a
/// discrete quadrature (theta_k, w_k) with sum w_k = 1.
struct MixingLawHandle {
    std::function<double(double)> lst;
    std::function<double(double)> lst_deriv;
    std::vector<MixingNode> nodes;
    /// E[1/Theta] when finite; the frailty model's means are E[1/Theta] * lambda_i.
    std::optional<double> inverse_mean;
    std::function<double(CounterRng&)> sample;
};

inline constexpr int kDefaultMixingNodes = 200;

/// Gamma(alpha, 1) frailty (Clayton copula); nodes from generalized
/// Gauss-Laguerre.
MixingLawHandle gamma_mixing(double alpha, int nodes = kDefaultMixingNodes);

/// Positive 1/2-stable frailty with LST exp(-kappa sqrt(u)) (Levy law with
/// scale kappa^2 / 2).
MixingLawHandle levy_mixing(double kappa, int nodes = kDefaultMixingNodes);

/// Theta identically equal to `value` (independence).
MixingLawHandle degenerate_mixing(double value = 1.0);

/// Throws DomainError unless the weights are positive and sum to 1 within 1e-10.
void validate_mixing(const MixingLawHandle& law);

}  // namespace cmrs
