#include "cmrs/sampling.hpp"

#include <omp.h>

#include <cmath>
#include <random>

#include "cmrs/summation.hpp"

namespace cmrs {

namespace {

double exponential(CounterRng& rng, double rate) { return -std::log(rng.uniform()) / rate; }

class MixedExpSampler final : public Sampler {
public:
    explicit MixedExpSampler(MixedExpFrailtySpec spec) : spec_(std::move(spec)) {
        if (!spec_.mixing.sample) throw DomainError("mixing law has no sampler");
        for (double l : spec_.lambdas) {
            if (!(l > 0.0)) throw DomainError("frailty scales must be > 0");
        }
    }
    std::size_t size() const noexcept override { return spec_.lambdas.size(); }
    void draw(CounterRng& rng, std::span<double> x) const override {
        const double theta = spec_.mixing.sample(rng);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = exponential(rng, theta / spec_.lambdas[i]);
    }

private:
    MixedExpFrailtySpec spec_;
};

class CommonShockSampler final : public Sampler {
public:
    explicit CommonShockSampler(CommonShockCPSpec spec) : spec_(std::move(spec)) {
        (void)build_common_shock_cp(spec_);  // validation
    }
    std::size_t size() const noexcept override { return spec_.lambdas.size(); }
    void draw(CounterRng& rng, std::span<double> x) const override {
        const double common = compound(rng, spec_.lambda0, spec_.beta0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = spec_.weights[i] * common + compound(rng, spec_.lambdas[i], spec_.betas[i]);
        }
    }

private:
    static double compound(CounterRng& rng, double lambda, double beta) {
        if (lambda == 0.0) return 0.0;
        const auto count = std::poisson_distribution<long>(lambda)(rng);
        if (count == 0) return 0.0;
        return std::gamma_distribution<double>(static_cast<double>(count), 1.0 / beta)(rng);
    }

    CommonShockCPSpec spec_;
};

class LognormalSampler final : public Sampler {
public:
    explicit LognormalSampler(LognormalPortfolioSpec spec) : spec_(std::move(spec)) {
        if (spec_.mu.size() != spec_.sigma.size() || spec_.mu.empty()) {
            throw DomainError("lognormal sampler needs matching mu and sigma");
        }
    }
    std::size_t size() const noexcept override { return spec_.mu.size(); }
    void draw(CounterRng& rng, std::span<double> x) const override {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
            x[i] = std::exp(spec_.mu[i] + spec_.sigma[i] * z);
        }
    }

private:
    LognormalPortfolioSpec spec_;
};

class PhaseTypeSampler final : public Sampler {
public:
    explicit PhaseTypeSampler(std::vector<MatrixExpSpec> margins) : margins_(std::move(margins)) {
        if (margins_.empty()) throw DomainError("phase-type sampler needs at least one margin");
        for (const auto& m : margins_) check(m);
    }
    std::size_t size() const noexcept override { return margins_.size(); }
    void draw(CounterRng& rng, std::span<double> x) const override {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = draw_one(rng, margins_[i]);
    }

private:
    static void check(const MatrixExpSpec& m) {
        (void)matrix_exp_marginal(m);
        const std::size_t p = m.order();
        CompensatedSum<double> asum;
        for (double a : m.alpha) {
            if (a < 0.0) throw DomainError("ME spec is not phase-type: negative initial probability");
            asum.add(a);
        }
        if (asum.value() > 1.0 + 1e-12) throw DomainError("ME spec is not phase-type: sum alpha > 1");
        if (std::abs(m.p0 - (1.0 - asum.value())) > 1e-9) {
            throw DomainError("ME spec is not phase-type: p0 != 1 - sum alpha");
        }
        for (std::size_t r = 0; r < p; ++r) {
            double row = 0.0;
            for (std::size_t c = 0; c < p; ++c) {
                const double v = m.T[r * p + c];
                if (r != c && v < 0.0) throw DomainError("ME spec is not phase-type: negative off-diagonal rate");
                row += v;
            }
            if (!(m.T[r * p + r] < 0.0)) throw DomainError("ME spec is not phase-type: nonnegative diagonal");
            if (std::abs(m.u[r] + row) > 1e-12 * std::max(1.0, std::abs(m.T[r * p + r]))) {
                throw DomainError("ME spec is not phase-type: u != -T 1");
            }
        }
    }

    static double draw_one(CounterRng& rng, const MatrixExpSpec& m) {
        const std::size_t p = m.order();
        double u = rng.uniform();
        std::size_t phase = p;
        for (std::size_t k = 0; k < p; ++k) {
            if (u < m.alpha[k]) {
                phase = k;
                break;
            }
            u -= m.alpha[k];
        }
        double t = 0.0;
        while (phase < p) {
            const double rate = -m.T[phase * p + phase];
            t += exponential(rng, rate);
            double v = rng.uniform() * rate;
            std::size_t next = p;  // absorption unless a transition is chosen
            for (std::size_t c = 0; c < p; ++c) {
                if (c == phase) continue;
                const double q = m.T[phase * p + c];
                if (v < q) {
                    next = c;
                    break;
                }
                v -= q;
            }
            phase = next;
        }
        return t;
    }

    std::vector<MatrixExpSpec> margins_;
};

}  // namespace

SamplerPtr mixed_exp_sampler(const MixedExpFrailtySpec& spec) { return std::make_shared<MixedExpSampler>(spec); }

SamplerPtr common_shock_sampler(const CommonShockCPSpec& spec) {
    return std::make_shared<CommonShockSampler>(spec);
}

SamplerPtr lognormal_sampler(const LognormalPortfolioSpec& spec) { return std::make_shared<LognormalSampler>(spec); }

SamplerPtr phase_type_sampler(const std::vector<MatrixExpSpec>& margins) {
    return std::make_shared<PhaseTypeSampler>(margins);
}

McSample draw_samples(const Sampler& sampler, std::size_t count, std::uint64_t seed, int threads) {
    McSample out;
    out.n = sampler.size();
    out.count = count;
    out.x.assign(count * out.n, 0.0);
    out.s.assign(count, 0.0);
    const int nt = threads > 0 ? threads : omp_get_max_threads();
    const auto rows = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t k = 0; k < rows; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        CounterRng rng(seed, uk);
        std::span<double> row(out.x.data() + uk * out.n, out.n);
        sampler.draw(rng, row);
        double s = 0.0;
        for (double v : row) s += v;
        out.s[uk] = s;
    }
    return out;
}

McEstimate conditional_mean(const McSample& sample, std::size_t i, double s, double bandwidth) {
    if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be > 0");
    if (i >= sample.n) throw IndexError("risk index out of range");
    CompensatedSum<double> wsum, wx;
    for (std::size_t k = 0; k < sample.count; ++k) {
        const double u = (sample.s[k] - s) / bandwidth;
        if (std::abs(u) > 38.0) continue;
        const double w = std::exp(-0.5 * u * u);
        wsum.add(w);
        wx.add(w * sample.x[k * sample.n + i]);
    }
    if (!(wsum.value() > 0.0)) throw DomainError("no effective sample mass inside the kernel window");
    McEstimate est;
    est.estimate = wx.value() / wsum.value();
    est.bandwidth = bandwidth;
    est.samples = sample.count;
    CompensatedSum<double> var;
    for (std::size_t k = 0; k < sample.count; ++k) {
        const double u = (sample.s[k] - s) / bandwidth;
        if (std::abs(u) > 38.0) continue;
        const double w = std::exp(-0.5 * u * u);
        const double d = sample.x[k * sample.n + i] - est.estimate;
        var.add(w * w * d * d);
    }
    est.standard_error = std::sqrt(var.value()) / wsum.value();
    return est;
}

McEstimate mc_conditional_mean(const Sampler& sampler, std::size_t i, double s, double bandwidth,
                               std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < kMinMcSamples) throw DomainError("Monte Carlo needs at least 1000 samples");
    if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be > 0");
    const McSample sample = draw_samples(sampler, n_samples, seed);
    return conditional_mean(sample, i, s, bandwidth);
}

}  // namespace cmrs
