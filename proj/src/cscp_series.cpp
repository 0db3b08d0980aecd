#include <boost/math/distributions/poisson.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <memory>

#include "cmrs/oracles.hpp"

namespace cmrs {

namespace {

using Real = boost::multiprecision::cpp_bin_float_50;
using Grid = std::vector<std::vector<Real>>;  // [grade][u-order]

// Per-pole polynomial coefficients: density contribution of pole j is
// e^{-beta_j s} sum_r coef[j][r] s^r.
struct SeriesTerms {
    std::vector<Real> beta;
    std::vector<std::vector<Real>> coef;

    [[nodiscard]] Real eval(double s) const {
        const Real sv = s;
        Real total = 0;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            Real poly = 0;
            for (std::size_t r = coef[j].size(); r-- > 0;) poly = poly * sv + coef[j][r];
            total += poly * exp(-beta[j] * sv);
        }
        return total;
    }
};

class SeriesBuilder {
public:
    SeriesBuilder(std::vector<Real> lambda, std::vector<Real> beta, int K)
        : lambda_(std::move(lambda)), beta_(std::move(beta)), K_(K), M_(K + 2) {}

    // sum over |k| <= K of prod_j lambda_j^{k_j}/k_j! * r_{k + shift}(s), as pole terms.
    SeriesTerms build(const std::vector<int>& shift) const {
        const std::size_t poles = beta_.size();
        SeriesTerms out;
        out.beta = beta_;
        out.coef.assign(poles, std::vector<Real>(static_cast<std::size_t>(K_ + 3), Real(0)));
        for (std::size_t j = 0; j < poles; ++j) {
            Grid conv = unit();
            for (std::size_t l = 0; l < poles; ++l) {
                if (l == j) continue;
                conv = multiply(conv, factor(l, j, shift[l]));
            }
            // Cumulative over grade.
            for (int g = 1; g <= K_; ++g) {
                for (int m = 0; m <= M_; ++m) conv[g][m] += conv[g - 1][m];
            }
            Real lam_pow = 1;
            Real fact = 1;
            for (int kj = 0; kj <= K_; ++kj) {
                if (kj > 0) {
                    lam_pow *= lambda_[j];
                    fact *= kj;
                }
                const int order = kj + shift[j];
                if (order == 0) continue;
                if (lambda_[j] == 0 && kj > 0) break;
                const Real w = lam_pow / fact * pow(beta_[j], order);
                const auto& cum = conv[K_ - kj];
                // r = 1..order; term s^{r-1}/(r-1)! with u-order order - r.
                Real rfact = 1;
                for (int r = 1; r <= order; ++r) {
                    if (r > 1) rfact *= (r - 1);
                    out.coef[j][r - 1] += w * cum[order - r] / rfact;
                }
            }
        }
        return out;
    }

private:
    Grid unit() const {
        Grid g(static_cast<std::size_t>(K_ + 1), std::vector<Real>(static_cast<std::size_t>(M_ + 1), Real(0)));
        g[0][0] = 1;
        return g;
    }

    // Grade g, u-order m coefficient of lambda_l^g/g! (beta_l / (d + u))^{g + shift},
    // d = beta_l - beta_j.
    Grid factor(std::size_t l, std::size_t j, int shift) const {
        Grid g = unit();
        g[0][0] = 0;
        const Real d = beta_[l] - beta_[j];
        Real lam_pow = 1;
        Real fact = 1;
        for (int k = 0; k <= K_; ++k) {
            if (k > 0) {
                lam_pow *= lambda_[l];
                fact *= k;
            }
            if (k > 0 && lambda_[l] == 0) break;
            const int o = k + shift;
            if (o == 0) {
                g[k][0] = lam_pow / fact;
                continue;
            }
            // (beta/(d+u))^o = beta^o sum_m (-1)^m C(o+m-1, m) d^{-o-m} u^m
            Real c = lam_pow / fact * pow(beta_[l] / d, o);
            for (int m = 0; m <= M_; ++m) {
                g[k][m] = c;
                c *= -Real(o + m) / (Real(m + 1) * d);
            }
        }
        return g;
    }

    Grid multiply(const Grid& a, const Grid& b) const {
        Grid c(static_cast<std::size_t>(K_ + 1), std::vector<Real>(static_cast<std::size_t>(M_ + 1), Real(0)));
        for (int ga = 0; ga <= K_; ++ga) {
            for (int ma = 0; ma <= M_; ++ma) {
                if (a[ga][ma] == 0) continue;
                for (int gb = 0; gb + ga <= K_; ++gb) {
                    for (int mb = 0; mb + ma <= M_; ++mb) c[ga + gb][ma + mb] += a[ga][ma] * b[gb][mb];
                }
            }
        }
        return c;
    }

    std::vector<Real> lambda_;
    std::vector<Real> beta_;
    int K_;
    int M_;
};

}  // namespace

ClosedFormOracle cscp_series_oracle(const CommonShockCPSpec& spec, double mass_tol) {
    if (!(mass_tol > 0.0 && mass_tol < 1.0)) throw DomainError("mass_tol must lie in (0, 1)");
    const auto model = build_common_shock_cp(spec);  // validates the spec
    const std::size_t n = spec.lambdas.size();
    std::vector<double> betas{spec.beta0};
    betas.insert(betas.end(), spec.betas.begin(), spec.betas.end());
    for (std::size_t a = 0; a < betas.size(); ++a) {
        for (std::size_t b = a + 1; b < betas.size(); ++b) {
            if (std::abs(betas[a] - betas[b]) < kTieTolerance * std::max(betas[a], betas[b])) {
                throw DomainError("series oracle requires pairwise distinct severity rates");
            }
        }
    }
    double lambda_s = spec.lambda0;
    for (double l : spec.lambdas) lambda_s += l;

    int K = 0;
    double omitted = 0.0;
    if (lambda_s > 0.0) {
        const boost::math::poisson_distribution<double> pois(lambda_s);
        while (true) {
            omitted = boost::math::cdf(boost::math::complement(pois, static_cast<double>(K)));
            if (omitted <= mass_tol) break;
            if (++K > kSeriesCountCap) {
                throw DomainError("series truncation budget unreachable within the count cap");
            }
        }
    }

    std::vector<Real> lam{Real(spec.lambda0)};
    for (double l : spec.lambdas) lam.emplace_back(l);
    std::vector<Real> beta;
    for (double b : betas) beta.emplace_back(b);
    const SeriesBuilder builder(lam, beta, K);

    struct Terms {
        SeriesTerms density;
        SeriesTerms common;                 // shift +2 e_0
        std::vector<SeriesTerms> own;       // shift +2 e_i
        double scale = 0.0;                 // e^{-lambda_S}
        std::vector<double> weights, lambdas, betas;
        double lambda0 = 0.0, beta0 = 1.0;
    };
    auto t = std::make_shared<Terms>();
    std::vector<int> shift(n + 1, 0);
    t->density = builder.build(shift);
    if (spec.lambda0 > 0.0) {
        shift[0] = 2;
        t->common = builder.build(shift);
        shift[0] = 0;
    }
    t->own.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.lambdas[i] == 0.0) continue;
        shift[i + 1] = 2;
        t->own[i] = builder.build(shift);
        shift[i + 1] = 0;
    }
    t->scale = std::exp(-lambda_s);
    t->weights = spec.weights;
    t->lambdas = spec.lambdas;
    t->betas = spec.betas;
    t->lambda0 = spec.lambda0;
    t->beta0 = spec.beta0;

    ClosedFormOracle o;
    o.n = n;
    o.truncation_bound = omitted;
    o.atoms = model->atoms();
    o.f_S = [t](double s) { return t->scale * static_cast<double>(t->density.eval(s)); };
    o.xi = [t](std::size_t i, double s) {
        if (i >= t->lambdas.size()) throw IndexError("risk index out of range");
        Real v = 0;
        if (t->lambda0 > 0.0 && t->weights[i] > 0.0) {
            v += Real(t->lambda0 * t->weights[i] / t->beta0) * t->common.eval(s);
        }
        if (t->lambdas[i] > 0.0) v += Real(t->lambdas[i] / t->betas[i]) * t->own[i].eval(s);
        return t->scale * static_cast<double>(v);
    };
    return o;
}

}  // namespace cmrs
