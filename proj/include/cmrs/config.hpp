#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmrs/inversion.hpp"
#include "cmrs/models.hpp"
#include "cmrs/oracles.hpp"
#include "cmrs/sampling.hpp"

namespace cmrs {

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    std::string family;
    nlohmann::json params;  // normalized family parameters
};

struct GridConfig {
    std::optional<double> start, stop, step;
    std::vector<double> points;  // explicit list, or expanded from start/stop/step

    [[nodiscard]] std::vector<double> values() const;
};

struct OutputConfig {
    std::string csv;
    int precision = 12;
    /// When set, allocate also reports E[X_i | S >= s*] at this threshold.
    std::optional<double> tail_threshold;
};

struct VerifyConfig {
    std::string oracle = "closed_form";  // closed_form | mc | both
    std::size_t mc_samples = 1000000;
    std::uint64_t seed = 20240611;
    double bandwidth = kDefaultBandwidth;
    double tolerance = 1e-4;
    double range_lo = 0.1;
    double range_hi = 10.0;
    std::vector<double> mc_points{2.0, 4.0, 6.0, 8.0, 10.0};
    double se_multiplier = 3.0;
};

struct SweepConfig {
    std::vector<double> A;
    std::vector<int> N, m, M;
};

struct DiagnoseConfig {
    std::vector<double> t_grid;
    double transform_tol = 1e-5;
    std::vector<InversionScheme> methods;
    std::optional<SweepConfig> sweep;
};

struct BenchConfig {
    std::vector<std::size_t> sizes{5, 100, 1000};
    int repetitions = 3;
    std::vector<InversionScheme> methods;
};

struct RunConfig {
    ModelConfig model;
    GridConfig grid;
    InversionScheme scheme = EulerScheme{};
    OutputConfig output;
    std::optional<VerifyConfig> verify;
    double balance_tol = kDefaultBalanceTol;
    std::optional<DiagnoseConfig> diagnose;
    std::optional<BenchConfig> bench;
};

/// Diagnose defaults: log t-grid 1e-2..1e2 (9 points) and methods GS(M=10),
/// Euler at theta = 0 and Euler at the configured tilt (0.2 when untilted).
[[nodiscard]] DiagnoseConfig default_diagnose_config(const InversionScheme& scheme);

[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::string& path);
/// Normalized form: every default filled in, so parse(to_json(c)) reproduces c.
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

[[nodiscard]] InversionScheme parse_scheme(const nlohmann::json& j);
[[nodiscard]] nlohmann::json scheme_to_json(const InversionScheme& scheme);

[[nodiscard]] ModelPtr build_model(const ModelConfig& model);
/// Closed-form oracle for the configured family; throws ConfigError if none exists.
[[nodiscard]] ClosedFormOracle build_oracle(const ModelConfig& model);
/// Monte Carlo sampler for the configured family; throws ConfigError if none exists.
[[nodiscard]] SamplerPtr build_sampler(const ModelConfig& model);

/// Common-shock spec with n lines used by the bench command: lambda0 = 1.5,
/// lambda_i cycling (0.8, 1.1, 0.6) scaled by 3/n, beta_i cycling
/// (1.4, 0.7, 1.9), beta0 = 0.9, weights cycling (0.2, 0.3, 0.5) normalized.
[[nodiscard]] CommonShockCPSpec bench_cscp_spec(std::size_t n);

}  // namespace cmrs
