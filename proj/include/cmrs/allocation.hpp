#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmrs/inversion.hpp"
#include "cmrs/transform.hpp"

namespace cmrs {

inline constexpr double kDefaultBalanceTol = 1e-3;
inline constexpr double kDefaultDensityFloor = 1e-300;
/// Inverted densities in [-kNegativeDensityTol, 0) are treated as round-off and clamped to 0.
inline constexpr double kNegativeDensityTol = 1e-8;

/// Tilting is part of the scheme (EulerScheme::theta).
struct AllocationRequest {
    ModelPtr model;
    std::vector<double> s_grid;
    InversionScheme scheme = EulerScheme{};
    double balance_tol = kDefaultBalanceTol;
    double density_floor = kDefaultDensityFloor;
    int threads = 0;
};

enum class PointStatus : std::uint8_t { ok, degraded, failed };

[[nodiscard]] const char* to_string(PointStatus status) noexcept;

struct GridPoint {
    double s = 0.0;
    double density = 0.0;        // f_S(s)
    std::vector<double> xi;      // allocation densities
    std::vector<double> h;       // xi_i / f_S
    std::vector<double> pi;      // h_i / s
    double sum_h = 0.0;
    double balance_residual = 0.0;  // |sum xi - s f| / (s f)
    PointStatus status = PointStatus::ok;
    bool clipped = false;
    std::string reason;
};

struct AtomAllocation {
    double location = 0.0;
    double mass = 0.0;
    std::vector<double> nu;
    std::vector<double> h;   // nu_i / mass
    std::vector<double> pi;  // h_i / location, 0 at location 0
};

struct AllocationResult {
    std::size_t n = 0;
    std::string method;
    double balance_tol = kDefaultBalanceTol;
    std::vector<GridPoint> points;
    std::vector<AtomAllocation> atoms;
    std::vector<std::string> warnings;

    [[nodiscard]] bool all_ok() const noexcept;
};

/// Continuous part of a model: L_S - A_S and L_i* - A_i, no atoms.
class AtomicTransformRemainder final : public JointTransformModel {
public:
    explicit AtomicTransformRemainder(ModelPtr base);
    [[nodiscard]] std::size_t size() const noexcept override { return base_->size(); }
    [[nodiscard]] double abscissa() const noexcept override { return base_->abscissa(); }

protected:
    Complex aggregate_at(Complex z) const override;
    Complex allocation_at(std::size_t i, Complex z) const override;
    Complex evaluate_at(Complex z, std::span<Complex> out) const override;

private:
    ModelPtr base_;
    AtomSet stripped_;
};

[[nodiscard]] std::shared_ptr<const AtomicTransformRemainder> strip_atoms(ModelPtr model);

/// Inverted (or exact) densities at one s, before ratios are formed.
struct DensityRow {
    double s = 0.0;
    double density = 0.0;
    std::vector<double> xi;
    bool failed = false;
    std::string reason;
};

/// Forms h, pi, residuals and statuses from density rows and the atom set.
[[nodiscard]] AllocationResult assemble_result(std::vector<DensityRow> rows, const AtomSet& atoms,
                                               std::size_t n, double balance_tol,
                                               double density_floor, std::string method);

/// Throws DomainError on an empty, non-positive or non-increasing grid.
void validate_grid(const std::vector<double>& s_grid);

/// Parallel over grid points.
[[nodiscard]] AllocationResult allocate(const AllocationRequest& request);
/// Single-threaded reference; identical output to allocate().
[[nodiscard]] AllocationResult allocate_serial(const AllocationRequest& request);

struct BreakdownReport {
    std::optional<double> first_failure;  // smallest s where the balance check fails
    AllocationResult marked;              // points from first_failure on marked degraded
};

/// A point breaks down when |sum_i h_i(s) - s| > balance_tol * s or it failed.
[[nodiscard]] BreakdownReport breakdown_scan(const AllocationResult& result, double balance_tol);

struct TailContribution {
    std::vector<double> contribution;  // E[X_i | S >= s_star]
    double tail_mass = 0.0;            // integrated P(S >= s_star) over the grid plus atoms
    double upper_limit = 0.0;          // last grid point used
    double truncation_bound = 0.0;     // estimated mass beyond upper_limit relative to tail_mass
};

/// Trapezoid integrals of xi_i and f_S over [s_star, upper_limit] plus atoms
/// at or above s_star. Integration stops before the first failed point.
[[nodiscard]] TailContribution tail_contribution(const AllocationResult& result, double s_star);

struct ProportionTable {
    std::vector<double> s;
    std::vector<std::vector<double>> pi;  // atoms first, then grid points
};

[[nodiscard]] ProportionTable proportions(const AllocationResult& result);

}  // namespace cmrs
