#pragma once

#include <vector>

namespace cmrs {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight e^{-x^2} on the real line. Nodes come
/// from Newton iteration on the orthonormal three-term recurrence (root
/// tolerance 1e-14); the recurrence is rescaled so large orders do not
/// overflow, and weights below the double range are returned as 0.
/// Rules are cached per order; the returned reference stays valid.
const QuadratureRule& gauss_hermite(int order);

/// Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int order, double a, double b);

/// Generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on (0, inf),
/// alpha > -1.
QuadratureRule gauss_laguerre(int order, double alpha);

}  // namespace cmrs
