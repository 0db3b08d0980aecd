#include "cmrs/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cmrs/linalg.hpp"
#include "cmrs/quadrature.hpp"
#include "cmrs/summation.hpp"

namespace cmrs {

namespace {

constexpr double kLognormalExponentCap = 700.0;

bool finite_all(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// ----------------------------------------------------------------- marginals

class ExponentialMarginal final : public Marginal {
public:
    explicit ExponentialMarginal(double rate) : rate_(rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential rate must be > 0");
    }
    Complex lst(Complex z) const override { return rate_ / (rate_ + z); }
    Complex size_biased(Complex z) const override {
        const Complex d = rate_ + z;
        return rate_ / (d * d);
    }
    std::optional<double> mean() const override { return 1.0 / rate_; }

private:
    double rate_;
};

class PointMassMarginal final : public Marginal {
public:
    explicit PointMassMarginal(double c) : c_(c) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("point mass location must be >= 0");
    }
    Complex lst(Complex z) const override { return c_ == 0.0 ? Complex{1.0, 0.0} : std::exp(-z * c_); }
    Complex size_biased(Complex z) const override {
        return c_ == 0.0 ? Complex{} : c_ * std::exp(-z * c_);
    }
    std::optional<PointAtom> atom() const override { return PointAtom{c_, 1.0}; }
    std::optional<double> mean() const override { return c_; }

private:
    double c_;
};

class MatrixExpMarginal final : public Marginal {
public:
    explicit MatrixExpMarginal(MatrixExpSpec spec) : spec_(std::move(spec)) {
        const std::size_t p = spec_.order();
        if (p == 0) throw DomainError("matrix-exponential order must be >= 1");
        if (spec_.u.size() != p || spec_.T.size() != p * p) {
            throw DomainError("matrix-exponential alpha, T and u have inconsistent sizes");
        }
        if (!finite_all(spec_.alpha) || !finite_all(spec_.T) || !finite_all(spec_.u)) {
            throw DomainError("matrix-exponential parameters must be finite");
        }
        if (!(spec_.p0 >= 0.0 && spec_.p0 < 1.0)) throw DomainError("matrix-exponential p0 must lie in [0, 1)");
        try {
            const Complex l8 = lst(Complex{1e-8, 0.0});
            if (std::abs(l8 - 1.0) > 1e-6) {
                throw DomainError("matrix-exponential law does not integrate to 1 - p0");
            }
            const Complex l6 = lst(Complex{1e-6, 0.0});
            if (!(l6.real() > 0.0 && l6.real() <= 1.0 + 1e-12) || std::abs(l6.imag()) > 1e-12) {
                throw DomainError("matrix-exponential transform at 1e-6 outside (0, 1]");
            }
            ComplexMatrix neg_t(p, p);
            for (std::size_t r = 0; r < p; ++r) {
                for (std::size_t c = 0; c < p; ++c) neg_t(r, c) = -spec_.T[r * p + c];
            }
            ComplexLu lu(neg_t);
            std::vector<Complex> u(spec_.u.begin(), spec_.u.end());
            const auto x = lu.solve(u);
            const auto y = lu.solve(x);
            Complex m{};
            for (std::size_t k = 0; k < p; ++k) m += spec_.alpha[k] * y[k];
            mean_ = m.real();
        } catch (const SingularMatrixError&) {
            throw DomainError("matrix-exponential T is singular; eigenvalues must have negative real part");
        }
    }

    Complex lst(Complex z) const override {
        Complex v, b;
        solve_pair(z, v, b, false);
        return v;
    }
    Complex size_biased(Complex z) const override {
        Complex v, b;
        solve_pair(z, v, b, true);
        return b;
    }
    void lst_pair(Complex z, Complex& value, Complex& biased) const override {
        solve_pair(z, value, biased, true);
    }
    std::optional<PointAtom> atom() const override {
        if (spec_.p0 > 0.0) return PointAtom{0.0, spec_.p0};
        return std::nullopt;
    }
    std::optional<double> mean() const override { return mean_; }

private:
    void solve_pair(Complex z, Complex& value, Complex& biased, bool want_biased) const {
        const std::size_t p = spec_.order();
        ComplexMatrix a(p, p);
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = 0; c < p; ++c) a(r, c) = -spec_.T[r * p + c];
            a(r, r) += z;
        }
        ComplexLu lu(std::move(a));
        std::vector<Complex> u(spec_.u.begin(), spec_.u.end());
        const auto x = lu.solve(u);
        Complex v = spec_.p0;
        for (std::size_t k = 0; k < p; ++k) v += spec_.alpha[k] * x[k];
        value = v;
        if (!want_biased) return;
        const auto y = lu.solve(x);
        Complex b{};
        for (std::size_t k = 0; k < p; ++k) b += spec_.alpha[k] * y[k];
        biased = b;
    }

    MatrixExpSpec spec_;
    double mean_ = 0.0;
};

struct LognormalNodes {
    std::vector<double> log_x;   // mu + sqrt(2) sigma x_k
    std::vector<double> weight;  // w_k / sqrt(pi)
    bool overflow = false;
};

LognormalNodes lognormal_nodes(double mu, double sigma, int gh_order) {
    if (!std::isfinite(mu)) throw DomainError("lognormal mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("lognormal sigma must be > 0");
    if (gh_order < 2) throw DomainError("Gauss-Hermite order must be >= 2");
    const QuadratureRule& rule = gauss_hermite(gh_order);
    LognormalNodes out;
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double lx = mu + std::numbers::sqrt2 * sigma * rule.nodes[k];
        if (lx > kLognormalExponentCap) {
            out.overflow = true;
            continue;
        }
        if (rule.weights[k] == 0.0) continue;
        out.log_x.push_back(lx);
        out.weight.push_back(rule.weights[k] * inv_sqrt_pi);
    }
    return out;
}

// Sum over nodes of w_k exp(power * l_k - z e^{l_k}).
Complex lognormal_sum(const LognormalNodes& nodes, Complex z, int power) {
    CompensatedComplexSum acc;
    for (std::size_t k = 0; k < nodes.log_x.size(); ++k) {
        const double lx = nodes.log_x[k];
        const Complex e = power * lx - z * std::exp(lx);
        if (e.real() < -745.0) continue;
        acc.add(nodes.weight[k] * std::exp(e));
    }
    return acc.value();
}

class LognormalMarginal final : public Marginal {
public:
    LognormalMarginal(double mu, double sigma, int gh_order)
        : mu_(mu), sigma_(sigma), nodes_(lognormal_nodes(mu, sigma, gh_order)) {}
    Complex lst(Complex z) const override { return lognormal_sum(nodes_, z, 0); }
    Complex size_biased(Complex z) const override { return lognormal_sum(nodes_, z, 1); }
    std::optional<double> mean() const override { return std::exp(mu_ + 0.5 * sigma_ * sigma_); }
    std::vector<std::string> warnings() const override {
        std::vector<std::string> w;
        if (sigma_ > 3.0) {
            w.push_back("lognormal sigma > 3: Gauss-Hermite accuracy degrades for heavy tails");
        }
        if (nodes_.overflow) {
            w.push_back("lognormal quadrature nodes with exponent > 700 were dropped");
        }
        return w;
    }

private:
    double mu_;
    double sigma_;
    LognormalNodes nodes_;
};

// ----------------------------------------------------------------- portfolios

class IndependentModel final : public JointTransformModel {
public:
    explicit IndependentModel(std::vector<MarginalPtr> margins) : margins_(std::move(margins)) {
        if (margins_.empty()) throw DomainError("portfolio needs at least one risk");
        std::vector<double> means;
        bool all_means = true;
        bool all_atoms = true;
        double loc = 0.0;
        double mass = 1.0;
        for (const auto& m : margins_) {
            if (!m) throw DomainError("null marginal");
            const auto mu = m->mean();
            if (mu) {
                means.push_back(*mu);
            } else {
                all_means = false;
            }
            const auto a = m->atom();
            if (a) {
                loc += a->location;
                mass *= a->mass;
            } else {
                all_atoms = false;
            }
            for (auto& w : m->warnings()) add_warning(std::move(w));
        }
        if (all_means) set_means(std::move(means));
        if (all_atoms && mass > 0.0) {
            Atom atom{loc, mass, std::vector<double>(margins_.size(), 0.0)};
            for (std::size_t i = 0; i < margins_.size(); ++i) {
                atom.allocation[i] = margins_[i]->atom()->location * mass;
            }
            set_atoms(AtomSet({atom}, margins_.size()));
        }
    }

    std::size_t size() const noexcept override { return margins_.size(); }

protected:
    Complex aggregate_at(Complex z) const override {
        Complex p{1.0, 0.0};
        for (const auto& m : margins_) p *= m->lst(z);
        return p;
    }

    Complex allocation_at(std::size_t i, Complex z) const override {
        Complex p = margins_[i]->size_biased(z);
        for (std::size_t j = 0; j < margins_.size(); ++j) {
            if (j != i) p *= margins_[j]->lst(z);
        }
        return p;
    }

    Complex evaluate_at(Complex z, std::span<Complex> out) const override {
        const std::size_t n = margins_.size();
        std::vector<Complex> value(n), biased(n), suffix(n + 1);
        for (std::size_t j = 0; j < n; ++j) margins_[j]->lst_pair(z, value[j], biased[j]);
        suffix[n] = Complex{1.0, 0.0};
        for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] * value[j];
        Complex prefix{1.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = biased[i] * prefix * suffix[i + 1];
            prefix *= value[i];
        }
        return prefix;
    }

private:
    std::vector<MarginalPtr> margins_;
};

class CommonShockModel final : public JointTransformModel {
public:
    explicit CommonShockModel(CommonShockCPSpec spec) : spec_(std::move(spec)) {
        const std::size_t n = spec_.lambdas.size();
        if (n == 0) throw DomainError("common-shock model needs at least one line");
        if (spec_.betas.size() != n || spec_.weights.size() != n) {
            throw DomainError("lambdas, betas and weights must have the same length");
        }
        if (!(spec_.lambda0 >= 0.0) || !std::isfinite(spec_.lambda0)) {
            throw DomainError("lambda0 must be >= 0");
        }
        if (!(spec_.beta0 > 0.0) || !std::isfinite(spec_.beta0)) throw DomainError("beta0 must be > 0");
        CompensatedSum<double> psum;
        CompensatedSum<double> lsum;
        lsum.add(spec_.lambda0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(spec_.lambdas[i] >= 0.0) || !std::isfinite(spec_.lambdas[i])) {
                throw DomainError("Poisson intensities must be >= 0");
            }
            if (!(spec_.betas[i] > 0.0) || !std::isfinite(spec_.betas[i])) {
                throw DomainError("severity rates must be > 0");
            }
            if (!(spec_.weights[i] >= 0.0)) throw DomainError("common-shock weights must be >= 0");
            psum.add(spec_.weights[i]);
            lsum.add(spec_.lambdas[i]);
        }
        if (std::abs(psum.value() - 1.0) > 1e-12) {
            throw DomainError("common-shock weights must sum to 1 within 1e-12");
        }
        lambda_s_ = lsum.value();
        set_atoms(AtomSet({Atom{0.0, std::exp(-lambda_s_), std::vector<double>(n, 0.0)}}, n));
        std::vector<double> means(n);
        for (std::size_t i = 0; i < n; ++i) {
            means[i] = spec_.lambda0 * spec_.weights[i] / spec_.beta0 + spec_.lambdas[i] / spec_.betas[i];
        }
        set_means(std::move(means));
    }

    std::size_t size() const noexcept override { return spec_.lambdas.size(); }
    [[nodiscard]] double lambda_s() const noexcept { return lambda_s_; }

protected:
    Complex aggregate_at(Complex z) const override {
        CompensatedComplexSum e;
        e.add(-spec_.lambda0 * z / (spec_.beta0 + z));
        for (std::size_t i = 0; i < spec_.lambdas.size(); ++i) {
            if (spec_.lambdas[i] == 0.0) continue;
            e.add(-spec_.lambdas[i] * z / (spec_.betas[i] + z));
        }
        return std::exp(e.value());
    }

    Complex allocation_at(std::size_t i, Complex z) const override {
        return aggregate_at(z) * factor(i, z, common(z));
    }

    Complex evaluate_at(Complex z, std::span<Complex> out) const override {
        const Complex ls = aggregate_at(z);
        const Complex c = common(z);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ls * factor(i, z, c);
        return ls;
    }

private:
    Complex common(Complex z) const {
        const Complex d = spec_.beta0 + z;
        return spec_.lambda0 * spec_.beta0 / (d * d);
    }
    Complex factor(std::size_t i, Complex z, Complex common) const {
        const Complex d = spec_.betas[i] + z;
        return spec_.weights[i] * common + spec_.lambdas[i] * spec_.betas[i] / (d * d);
    }

    CommonShockCPSpec spec_;
    double lambda_s_ = 0.0;
};

class KatzModel final : public JointTransformModel {
public:
    explicit KatzModel(KatzCompoundSpec spec) : spec_(std::move(spec)) {
        const std::size_t n = spec_.risks.size();
        if (n == 0) throw DomainError("compound Katz model needs at least one risk");
        double mass = 1.0;
        std::vector<double> means;
        bool all_means = true;
        for (const auto& r : spec_.risks) {
            if (!katz_valid(r.a, r.b)) {
                std::ostringstream msg;
                msg << "(a, b) = (" << r.a << ", " << r.b << ") is not a valid Katz (a,b,0) law";
                throw DomainError(msg.str());
            }
            if (!r.severity) throw DomainError("compound Katz risk needs a severity law");
            const auto sev_atom = r.severity->atom();
            double q = 0.0;
            if (sev_atom) {
                if (sev_atom->location != 0.0) {
                    throw DomainError("severity atoms are supported only at 0");
                }
                q = sev_atom->mass;
            }
            mass *= katz_pgf(r.a, r.b, Complex{q, 0.0}).real();
            const auto sev_mean = r.severity->mean();
            if (sev_mean) {
                means.push_back((r.a + r.b) / (1.0 - r.a) * *sev_mean);
            } else {
                all_means = false;
            }
            for (auto& w : r.severity->warnings()) add_warning(std::move(w));
        }
        if (mass > 0.0) set_atoms(AtomSet({Atom{0.0, mass, std::vector<double>(n, 0.0)}}, n));
        if (all_means) set_means(std::move(means));
    }

    std::size_t size() const noexcept override { return spec_.risks.size(); }

protected:
    Complex aggregate_at(Complex z) const override {
        Complex p{1.0, 0.0};
        for (const auto& r : spec_.risks) p *= pgf_checked(r, r.severity->lst(z));
        return p;
    }

    Complex allocation_at(std::size_t i, Complex z) const override {
        std::vector<Complex> out(size());
        evaluate_at(z, out);
        return out[i];
    }

    Complex evaluate_at(Complex z, std::span<Complex> out) const override {
        const std::size_t n = spec_.risks.size();
        std::vector<Complex> phi(n), phi1(n);
        Complex ls{1.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            spec_.risks[j].severity->lst_pair(z, phi[j], phi1[j]);
            ls *= pgf_checked(spec_.risks[j], phi[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = spec_.risks[i];
            out[i] = (r.a + r.b) / (1.0 - r.a * phi[i]) * phi1[i] * ls;
        }
        return ls;
    }

private:
    static Complex pgf_checked(const KatzRisk& r, Complex phi) {
        if ((r.a * phi).real() >= 1.0) throw DomainError("Katz transform requires Re(a phi(t)) < 1");
        return katz_pgf(r.a, r.b, phi);
    }

    KatzCompoundSpec spec_;
};

}  // namespace

MarginalPtr exponential_marginal(double rate) { return std::make_shared<ExponentialMarginal>(rate); }

MarginalPtr point_mass_marginal(double c) { return std::make_shared<PointMassMarginal>(c); }

MatrixExpSpec erlang_spec(int k, double rate) {
    if (k < 1) throw DomainError("Erlang shape must be >= 1");
    if (!(rate > 0.0)) throw DomainError("Erlang rate must be > 0");
    const std::size_t p = static_cast<std::size_t>(k);
    MatrixExpSpec spec;
    spec.alpha.assign(p, 0.0);
    spec.alpha[0] = 1.0;
    spec.T.assign(p * p, 0.0);
    spec.u.assign(p, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
        spec.T[r * p + r] = -rate;
        if (r + 1 < p) spec.T[r * p + r + 1] = rate;
    }
    spec.u[p - 1] = rate;
    return spec;
}

MarginalPtr matrix_exp_marginal(const MatrixExpSpec& spec) {
    return std::make_shared<MatrixExpMarginal>(spec);
}

LognormalValue lognormal_lst(double mu, double sigma, Complex z, int gh_order) {
    if (!(z.real() > 0.0)) throw DomainError("lognormal transform requires Re z > 0");
    const LognormalNodes nodes = lognormal_nodes(mu, sigma, gh_order);
    return {lognormal_sum(nodes, z, 0), nodes.overflow};
}

LognormalValue lognormal_lst_deriv(double mu, double sigma, Complex z, int gh_order) {
    if (!(z.real() > 0.0)) throw DomainError("lognormal transform requires Re z > 0");
    const LognormalNodes nodes = lognormal_nodes(mu, sigma, gh_order);
    return {lognormal_sum(nodes, z, 1), nodes.overflow};
}

MarginalPtr lognormal_marginal(double mu, double sigma, int gh_order) {
    return std::make_shared<LognormalMarginal>(mu, sigma, gh_order);
}

ModelPtr build_independent(std::vector<MarginalPtr> margins) {
    return std::make_shared<IndependentModel>(std::move(margins));
}

bool katz_valid(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    if (a == 0.0) return b >= 0.0;
    if (a < 0.0) {
        const double m = -(a + b) / a;
        return m >= 1.0 - 1e-9 && std::abs(m - std::round(m)) <= 1e-9 * std::max(1.0, m);
    }
    return a < 1.0 && a + b > 0.0;
}

Complex katz_pgf(double a, double b, Complex w) {
    if (a == 0.0) return std::exp(b * (w - 1.0));
    const Complex base = (1.0 - a * w) / (1.0 - a);
    if (a < 0.0) {
        // Binomial: integer exponent m, no branch cut.
        const int m = static_cast<int>(std::lround(-(a + b) / a));
        Complex p{1.0, 0.0};
        for (int k = 0; k < m; ++k) p *= base;
        return p;
    }
    return std::pow(base, -(a + b) / a);
}

ModelPtr build_katz_compound(const KatzCompoundSpec& spec) { return std::make_shared<KatzModel>(spec); }

ModelPtr build_common_shock_cp(const CommonShockCPSpec& spec) {
    return std::make_shared<CommonShockModel>(spec);
}

LognormalPortfolioSpec LognormalPortfolioSpec::moment_matched(const std::vector<double>& means,
                                                              const std::vector<double>& variances,
                                                              int gh_order) {
    if (means.size() != variances.size()) throw DomainError("means and variances differ in length");
    LognormalPortfolioSpec spec;
    spec.gh_order = gh_order;
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (!(means[i] > 0.0) || !(variances[i] > 0.0)) {
            throw DomainError("moment matching needs positive mean and variance");
        }
        const double s2 = std::log1p(variances[i] / (means[i] * means[i]));
        spec.sigma.push_back(std::sqrt(s2));
        spec.mu.push_back(std::log(means[i]) - 0.5 * s2);
    }
    return spec;
}

ModelPtr build_lognormal_portfolio(const LognormalPortfolioSpec& spec) {
    if (spec.mu.size() != spec.sigma.size()) throw DomainError("mu and sigma differ in length");
    if (spec.gh_order < 2) throw DomainError("Gauss-Hermite order must be >= 2");
    std::vector<MarginalPtr> margins;
    for (std::size_t i = 0; i < spec.mu.size(); ++i) {
        margins.push_back(lognormal_marginal(spec.mu[i], spec.sigma[i], spec.gh_order));
    }
    return build_independent(std::move(margins));
}

ModelPtr build_matrix_exp(const std::vector<MatrixExpSpec>& margins) {
    std::vector<MarginalPtr> m;
    for (const auto& spec : margins) m.push_back(matrix_exp_marginal(spec));
    return build_independent(std::move(m));
}

}  // namespace cmrs
