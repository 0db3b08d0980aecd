#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmrs/mixing.hpp"
#include "cmrs/transform.hpp"

namespace cmrs {

// ---------------------------------------------------------------------------
// Marginal laws (building blocks for independent portfolios and severities)

struct PointAtom {
    double location = 0.0;
    double mass = 0.0;
};

class Marginal {
public:
    virtual ~Marginal() = default;
    /// E[e^{-zX}]
    [[nodiscard]] virtual Complex lst(Complex z) const = 0;
    /// E[X e^{-zX}]
    [[nodiscard]] virtual Complex size_biased(Complex z) const = 0;
    /// Both at once; overridden when the two share work.
    virtual void lst_pair(Complex z, Complex& value, Complex& biased) const {
        value = lst(z);
        biased = size_biased(z);
    }
    /// The single atom of the law, if any.
    [[nodiscard]] virtual std::optional<PointAtom> atom() const { return std::nullopt; }
    [[nodiscard]] virtual std::optional<double> mean() const = 0;
    [[nodiscard]] virtual std::vector<std::string> warnings() const { return {}; }
};

using MarginalPtr = std::shared_ptr<const Marginal>;

MarginalPtr exponential_marginal(double rate);
/// X identically equal to c >= 0 (c = 0 gives the zero risk).
MarginalPtr point_mass_marginal(double c);

struct MatrixExpSpec {
    std::vector<double> alpha;  // length p
    std::vector<double> T;      // p x p, row-major
    std::vector<double> u;      // length p
    double p0 = 0.0;            // mass at zero
    [[nodiscard]] std::size_t order() const noexcept { return alpha.size(); }
};

/// Erlang(k, rate) as a k-phase ME representation.
MatrixExpSpec erlang_spec(int k, double rate);
MarginalPtr matrix_exp_marginal(const MatrixExpSpec& spec);

struct LognormalValue {
    Complex value;
    bool overflow = false;  // some node had mu + sqrt(2) sigma x_k > 700 and was dropped
};

/// Gauss-Hermite approximations of E[e^{-zX}] and E[X e^{-zX}] for
/// X = exp(mu + sigma N).
LognormalValue lognormal_lst(double mu, double sigma, Complex z, int gh_order);
LognormalValue lognormal_lst_deriv(double mu, double sigma, Complex z, int gh_order);

inline constexpr int kDefaultGhOrder = 64;
MarginalPtr lognormal_marginal(double mu, double sigma, int gh_order = kDefaultGhOrder);

/// Independent risks: L_S = prod_j L_j, L_i* = E[X_i e^{-zX_i}] prod_{j!=i} L_j.
ModelPtr build_independent(std::vector<MarginalPtr> margins);

// ---------------------------------------------------------------------------
// Frailty families

/// X_i | Theta = theta ~ Exp(rate theta / lambda_i), independent given Theta.
struct MixedExpFrailtySpec {
    std::vector<double> lambdas;
    MixingLawHandle mixing;
};

ModelPtr build_mixed_exp_frailty(const MixedExpFrailtySpec& spec);

/// One EDF margin under frailty: cumulant kappa, its derivative, the
/// canonical map theta -> eta(theta) and dispersion phi. `in_domain` declares
/// where kappa may be evaluated.
struct EdfMargin {
    std::function<Complex(Complex)> kappa;
    std::function<Complex(Complex)> kappa_prime;
    std::function<double(double)> eta;
    double phi = 1.0;
    std::function<bool(Complex)> in_domain;
    /// E[X | Theta = theta] = mean_scale / theta, when the margin has that form.
    std::optional<double> mean_scale;
};

/// Gamma EDF: kappa(eta) = -log(-eta), eta(theta) = -theta / lambda.
/// Conditional law Gamma(shape 1/phi, rate theta / (lambda phi)), mean lambda / theta.
EdfMargin gamma_edf_margin(double lambda, double phi = 1.0);
/// Inverse Gaussian EDF: kappa(eta) = -sqrt(-2 eta), eta(theta) = -theta^2 / (2 lambda^2),
/// conditional mean lambda / theta.
EdfMargin inverse_gaussian_edf_margin(double lambda, double phi = 1.0);

struct EdfFrailtySpec {
    std::vector<EdfMargin> margins;
    MixingLawHandle mixing;
};

ModelPtr build_edf_frailty(const EdfFrailtySpec& spec);

// ---------------------------------------------------------------------------
// Compound families

/// Katz (a, b, 0) frequency with severity law. Severities may carry an atom
/// at 0 (their mass enters the aggregate atom at 0).
struct KatzRisk {
    double a = 0.0;
    double b = 0.0;
    MarginalPtr severity;
};

struct KatzCompoundSpec {
    std::vector<KatzRisk> risks;
};

/// Classifies (a, b): Poisson a = 0, b >= 0; binomial a < 0 with -(a+b)/a a
/// positive integer; negative binomial 0 < a < 1, a + b > 0.
[[nodiscard]] bool katz_valid(double a, double b);
/// (a, b, 0) probability generating function P(w).
[[nodiscard]] Complex katz_pgf(double a, double b, Complex w);

ModelPtr build_katz_compound(const KatzCompoundSpec& spec);

struct CommonShockCPSpec {
    double lambda0 = 0.0;
    std::vector<double> lambdas;
    double beta0 = 1.0;
    std::vector<double> betas;
    std::vector<double> weights;  // p_i, sum to 1
};

ModelPtr build_common_shock_cp(const CommonShockCPSpec& spec);

// ---------------------------------------------------------------------------

struct LognormalPortfolioSpec {
    std::vector<double> mu;
    std::vector<double> sigma;
    int gh_order = kDefaultGhOrder;

    /// sigma^2 = ln(1 + v / m^2), mu = ln m - sigma^2 / 2 per risk.
    static LognormalPortfolioSpec moment_matched(const std::vector<double>& means,
                                                 const std::vector<double>& variances,
                                                 int gh_order = kDefaultGhOrder);
};

ModelPtr build_lognormal_portfolio(const LognormalPortfolioSpec& spec);

/// Joint model over matrix-exponential margins (independent).
ModelPtr build_matrix_exp(const std::vector<MatrixExpSpec>& margins);

}  // namespace cmrs
