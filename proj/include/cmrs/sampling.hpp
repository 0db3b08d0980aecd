#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cmrs/models.hpp"
#include "cmrs/rng.hpp"

namespace cmrs {

/// Draws one risk vector (X_1..X_n) per call.
class Sampler {
public:
    virtual ~Sampler() = default;
    [[nodiscard]] virtual std::size_t size() const noexcept = 0;
    virtual void draw(CounterRng& rng, std::span<double> x) const = 0;
};

using SamplerPtr = std::shared_ptr<const Sampler>;

SamplerPtr mixed_exp_sampler(const MixedExpFrailtySpec& spec);
SamplerPtr common_shock_sampler(const CommonShockCPSpec& spec);
SamplerPtr lognormal_sampler(const LognormalPortfolioSpec& spec);
/// Independent phase-type margins. Rejects ME specs that are not phase-type
/// (negative alpha or off-diagonal T entries, u != -T 1, p0 != 1 - sum alpha).
SamplerPtr phase_type_sampler(const std::vector<MatrixExpSpec>& margins);

/// Samples stored row-major (count x n) together with their sums.
struct McSample {
    std::size_t n = 0;
    std::size_t count = 0;
    std::vector<double> x;
    std::vector<double> s;
};

/// Sample k always uses substream (seed, k), so the result does not depend on
/// the thread count.
[[nodiscard]] McSample draw_samples(const Sampler& sampler, std::size_t count, std::uint64_t seed,
                                    int threads = 0);

struct McEstimate {
    double estimate = 0.0;
    double bandwidth = 0.0;
    std::size_t samples = 0;
    double standard_error = 0.0;
};

inline constexpr double kDefaultBandwidth = 0.05;
inline constexpr std::size_t kMinMcSamples = 1000;

/// Nadaraya-Watson estimate of E[X_i | S = s] with a Gaussian kernel.
/// Standard-error proxy: sqrt(sum K^2 (X_i - m)^2) / sum K.
[[nodiscard]] McEstimate conditional_mean(const McSample& sample, std::size_t i, double s,
                                          double bandwidth);

[[nodiscard]] McEstimate mc_conditional_mean(const Sampler& sampler, std::size_t i, double s,
                                             double bandwidth, std::size_t n_samples,
                                             std::uint64_t seed);

}  // namespace cmrs
