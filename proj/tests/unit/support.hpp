#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "cmrs/models.hpp"
#include "cmrs/rng.hpp"
#include "cmrs/transform.hpp"

namespace cmrs::test {

/// Log-spaced grid lo..hi with `count` points.
inline std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> t;
    for (int k = 0; k < count; ++k) t.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
    return t;
}

inline std::vector<double> step_grid(double lo, double hi, double step) {
    std::vector<double> s;
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int k = 0; k < count; ++k) s.push_back(lo + k * step);
    return s;
}

/// Parameters of the common-shock compound Poisson portfolio used throughout.
inline CommonShockCPSpec reference_cscp() {
    return {1.5, {0.8, 1.1, 0.6}, 0.9, {1.4, 0.7, 1.9}, {0.2, 0.3, 0.5}};
}

/// Independent Erlang(2, lambda) + Exp(mu) portfolio.
inline ModelPtr example3_model(double lambda, double mu) {
    return build_independent({matrix_exp_marginal(erlang_spec(2, lambda)), exponential_marginal(mu)});
}

/// Closed-form h_1 for Erlang(2, lambda) + Exp(mu), delta = lambda - mu != 0,
/// written from the conditional density: S | X_1 has density proportional to
/// x e^{-delta x} on [0, s].
inline double example3_h1(double lambda, double mu, double s) {
    const double d = lambda - mu;
    // E[X_1 | S = s] = int_0^s x^2 e^{-d x} dx / int_0^s x e^{-d x} dx, by
    // Simpson with many panels (independent of the library's closed forms).
    const int panels = 20000;
    const double h = s / panels;
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k <= panels; ++k) {
        const double x = k * h;
        const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double e = std::exp(-d * x);
        num += w * x * x * e;
        den += w * x * e;
    }
    return num / den;
}

/// The same quantity from the closed form with delta s, for moderate s.
inline double example3_h1_closed(double lambda, double mu, double s) {
    const double d = lambda - mu;
    const double y = d * s;
    return (2.0 / d) * (std::expm1(y) - y - y * y / 2.0) / (std::expm1(y) - y);
}

/// Random doubles in [lo, hi) from a fixed stream.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : rng_(seed, 0) {}
    double operator()(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }

private:
    CounterRng rng_;
};

/// Wraps a model and scales L_2* by a factor (injected fault).
class ScaledAllocationModel final : public JointTransformModel {
public:
    ScaledAllocationModel(ModelPtr base, std::size_t index, double factor)
        : base_(std::move(base)), index_(index), factor_(factor) {}
    [[nodiscard]] std::size_t size() const noexcept override { return base_->size(); }
    [[nodiscard]] double abscissa() const noexcept override { return base_->abscissa(); }

protected:
    Complex aggregate_at(Complex z) const override { return base_->aggregate(z); }
    Complex allocation_at(std::size_t i, Complex z) const override {
        const Complex v = base_->allocation(i, z);
        return i == index_ ? factor_ * v : v;
    }

private:
    ModelPtr base_;
    std::size_t index_;
    double factor_;
};

}  // namespace cmrs::test
