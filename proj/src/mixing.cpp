#include "cmrs/mixing.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "cmrs/quadrature.hpp"
#include "cmrs/rng.hpp"
#include "cmrs/summation.hpp"
#include "cmrs/transform.hpp"

namespace cmrs {

namespace {

// P(|Z| > z) = 1e-12 for a standard normal Z.
constexpr double kHalfNormalCutoff = 7.1341;

void normalize(std::vector<MixingNode>& nodes) {
    CompensatedSum<double> total;
    for (const auto& n : nodes) total.add(n.weight);
    for (auto& n : nodes) n.weight /= total.value();
}

}  // namespace

void validate_mixing(const MixingLawHandle& law) {
    if (law.nodes.empty()) throw DomainError("mixing law has no quadrature nodes");
    CompensatedSum<double> total;
    for (const auto& n : law.nodes) {
        if (!(n.theta > 0.0) || !std::isfinite(n.theta)) {
            throw DomainError("mixing nodes must be positive and finite");
        }
        if (!(n.weight >= 0.0)) throw DomainError("mixing weights must be nonnegative");
        total.add(n.weight);
    }
    if (std::abs(total.value() - 1.0) > 1e-10) {
        throw DomainError("mixing weights must sum to 1 within 1e-10");
    }
}

MixingLawHandle gamma_mixing(double alpha, int nodes) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("gamma mixing requires alpha > 0");
    MixingLawHandle law;
    law.lst = [alpha](double u) {
        if (u < 0.0) throw DomainError("mixing LST requires u >= 0");
        return std::pow(1.0 + u, -alpha);
    };
    law.lst_deriv = [alpha](double u) {
        if (!(u > 0.0)) throw DomainError("mixing LST derivative requires u > 0");
        return -alpha * std::pow(1.0 + u, -alpha - 1.0);
    };
    const QuadratureRule rule = gauss_laguerre(nodes, alpha - 1.0);
    const double log_norm = -std::lgamma(alpha);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double w = rule.weights[k] * std::exp(log_norm);
        if (w > 0.0) law.nodes.push_back({rule.nodes[k], w});
    }
    normalize(law.nodes);
    if (alpha > 1.0) law.inverse_mean = 1.0 / (alpha - 1.0);
    law.sample = [alpha](CounterRng& rng) { return std::gamma_distribution<double>(alpha, 1.0)(rng); };
    validate_mixing(law);
    return law;
}

MixingLawHandle levy_mixing(double kappa, int nodes) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("Levy mixing requires kappa > 0");
    MixingLawHandle law;
    law.lst = [kappa](double u) {
        if (u < 0.0) throw DomainError("mixing LST requires u >= 0");
        return std::exp(-kappa * std::sqrt(u));
    };
    law.lst_deriv = [kappa](double u) {
        if (!(u > 0.0)) throw DomainError("Levy LST derivative requires u > 0");
        const double r = std::sqrt(u);
        return -kappa / (2.0 * r) * std::exp(-kappa * r);
    };
    // Theta = kappa^2 / (2 Z^2) with Z standard normal; integrate over |Z|.
    const QuadratureRule rule = gauss_legendre(nodes, 0.0, kHalfNormalCutoff);
    const double c = 2.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = rule.nodes[k];
        law.nodes.push_back({kappa * kappa / (2.0 * z * z), rule.weights[k] * c * std::exp(-0.5 * z * z)});
    }
    normalize(law.nodes);
    law.inverse_mean = 2.0 / (kappa * kappa);
    law.sample = [kappa](CounterRng& rng) {
        const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
        return kappa * kappa / (2.0 * z * z);
    };
    validate_mixing(law);
    return law;
}

MixingLawHandle degenerate_mixing(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("degenerate mixing requires value > 0");
    MixingLawHandle law;
    law.lst = [value](double u) {
        if (u < 0.0) throw DomainError("mixing LST requires u >= 0");
        return std::exp(-u * value);
    };
    law.lst_deriv = [value](double u) {
        if (!(u > 0.0)) throw DomainError("mixing LST derivative requires u > 0");
        return -value * std::exp(-u * value);
    };
    law.nodes = {{value, 1.0}};
    law.inverse_mean = 1.0 / value;
    law.sample = [value](CounterRng&) { return value; };
    return law;
}

}  // namespace cmrs
