#include <cmath>

#include "cmrs/models.hpp"
#include "cmrs/summation.hpp"

namespace cmrs {

namespace {

class MixedExpFrailtyModel final : public JointTransformModel {
public:
    explicit MixedExpFrailtyModel(MixedExpFrailtySpec spec) : spec_(std::move(spec)) {
        if (spec_.lambdas.empty()) throw DomainError("frailty model needs at least one risk");
        for (double l : spec_.lambdas) {
            if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("frailty scales lambda_i must be > 0");
        }
        validate_mixing(spec_.mixing);
        if (spec_.mixing.inverse_mean) {
            std::vector<double> means;
            for (double l : spec_.lambdas) means.push_back(l * *spec_.mixing.inverse_mean);
            set_means(std::move(means));
        }
    }

    std::size_t size() const noexcept override { return spec_.lambdas.size(); }

protected:
    Complex aggregate_at(Complex z) const override {
        CompensatedComplexSum acc;
        for (const auto& node : spec_.mixing.nodes) {
            Complex p{node.weight, 0.0};
            for (double l : spec_.lambdas) {
                const double r = node.theta / l;
                p *= r / (r + z);
            }
            acc.add(p);
        }
        return acc.value();
    }

    Complex allocation_at(std::size_t i, Complex z) const override {
        CompensatedComplexSum acc;
        for (const auto& node : spec_.mixing.nodes) {
            Complex p{node.weight, 0.0};
            for (double l : spec_.lambdas) {
                const double r = node.theta / l;
                p *= r / (r + z);
            }
            acc.add(p / (node.theta / spec_.lambdas[i] + z));
        }
        return acc.value();
    }

    Complex evaluate_at(Complex z, std::span<Complex> out) const override {
        const std::size_t n = spec_.lambdas.size();
        std::vector<CompensatedComplexSum> acc(n);
        CompensatedComplexSum total;
        for (const auto& node : spec_.mixing.nodes) {
            Complex p{node.weight, 0.0};
            for (double l : spec_.lambdas) {
                const double r = node.theta / l;
                p *= r / (r + z);
            }
            total.add(p);
            for (std::size_t i = 0; i < n; ++i) acc[i].add(p / (node.theta / spec_.lambdas[i] + z));
        }
        for (std::size_t i = 0; i < n; ++i) out[i] = acc[i].value();
        return total.value();
    }

private:
    MixedExpFrailtySpec spec_;
};

class EdfFrailtyModel final : public JointTransformModel {
public:
    explicit EdfFrailtyModel(EdfFrailtySpec spec) : spec_(std::move(spec)) {
        if (spec_.margins.empty()) throw DomainError("EDF frailty model needs at least one risk");
        for (const auto& m : spec_.margins) {
            if (!m.kappa || !m.kappa_prime || !m.eta || !m.in_domain) {
                throw DomainError("EDF margin is missing a cumulant, derivative, canonical map or domain");
            }
            if (!(m.phi > 0.0)) throw DomainError("EDF dispersion must be > 0");
        }
        validate_mixing(spec_.mixing);
        bool all = spec_.mixing.inverse_mean.has_value();
        std::vector<double> means;
        for (const auto& m : spec_.margins) {
            if (!m.mean_scale) {
                all = false;
                break;
            }
            means.push_back(*m.mean_scale * spec_.mixing.inverse_mean.value_or(0.0));
        }
        if (all) set_means(std::move(means));
    }

    std::size_t size() const noexcept override { return spec_.margins.size(); }

protected:
    Complex aggregate_at(Complex z) const override {
        std::vector<Complex> out(size());
        return evaluate_at(z, out);
    }

    Complex allocation_at(std::size_t i, Complex z) const override {
        std::vector<Complex> out(size());
        evaluate_at(z, out);
        return out[i];
    }

    Complex evaluate_at(Complex z, std::span<Complex> out) const override {
        const std::size_t n = spec_.margins.size();
        std::vector<CompensatedComplexSum> acc(n);
        std::vector<Complex> shifted(n);
        CompensatedComplexSum total;
        for (const auto& node : spec_.mixing.nodes) {
            CompensatedComplexSum exponent;
            for (std::size_t j = 0; j < n; ++j) {
                const auto& m = spec_.margins[j];
                const Complex eta{m.eta(node.theta), 0.0};
                shifted[j] = eta - m.phi * z;
                if (!m.in_domain(eta) || !m.in_domain(shifted[j])) {
                    throw DomainError("EDF cumulant argument leaves the declared domain");
                }
                exponent.add((m.kappa(shifted[j]) - m.kappa(eta)) / m.phi);
            }
            const Complex p = node.weight * std::exp(exponent.value());
            total.add(p);
            for (std::size_t i = 0; i < n; ++i) acc[i].add(spec_.margins[i].kappa_prime(shifted[i]) * p);
        }
        for (std::size_t i = 0; i < n; ++i) out[i] = acc[i].value();
        return total.value();
    }

private:
    EdfFrailtySpec spec_;
};

bool negative_half_plane(Complex eta) { return eta.real() < 0.0 && std::isfinite(eta.imag()); }

}  // namespace

ModelPtr build_mixed_exp_frailty(const MixedExpFrailtySpec& spec) {
    return std::make_shared<MixedExpFrailtyModel>(spec);
}

ModelPtr build_edf_frailty(const EdfFrailtySpec& spec) { return std::make_shared<EdfFrailtyModel>(spec); }

EdfMargin gamma_edf_margin(double lambda, double phi) {
    if (!(lambda > 0.0) || !(phi > 0.0)) throw DomainError("gamma EDF margin needs lambda > 0, phi > 0");
    EdfMargin m;
    m.kappa = [](Complex eta) { return -std::log(-eta); };
    m.kappa_prime = [](Complex eta) { return -1.0 / eta; };
    m.eta = [lambda](double theta) { return -theta / lambda; };
    m.phi = phi;
    m.in_domain = negative_half_plane;
    m.mean_scale = lambda;
    return m;
}

EdfMargin inverse_gaussian_edf_margin(double lambda, double phi) {
    if (!(lambda > 0.0) || !(phi > 0.0)) {
        throw DomainError("inverse Gaussian EDF margin needs lambda > 0, phi > 0");
    }
    EdfMargin m;
    m.kappa = [](Complex eta) { return -std::sqrt(-2.0 * eta); };
    m.kappa_prime = [](Complex eta) { return 1.0 / std::sqrt(-2.0 * eta); };
    m.eta = [lambda](double theta) { return -theta * theta / (2.0 * lambda * lambda); };
    m.phi = phi;
    m.in_domain = negative_half_plane;
    m.mean_scale = lambda;
    return m;
}

}  // namespace cmrs
