#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cmrs/transform.hpp"

namespace cmrs {

/// Euler contour does not stay right of the tilt shift / transform abscissa.
class ContourError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A transform returned NaN/Inf at an inversion node.
class InversionError : public std::runtime_error {
public:
    InversionError(const std::string& what, std::size_t node) : std::runtime_error(what), node_(node) {}
    [[nodiscard]] std::size_t node_index() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Gaver-Stehfest rule of order M; weights are the exact rationals rounded once.
class GsScheme {
public:
    explicit GsScheme(int M = 10);
    [[nodiscard]] int order() const noexcept { return M_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

private:
    int M_;
    std::vector<double> weights_;
};

/// Abate-Whitt Euler summation on the line Re z = A / (2s), N terms plus
/// binomial averaging of order m. theta > 0 inverts the tilted transform
/// F(z - theta) and multiplies the result by e^{-theta s}.
struct EulerScheme {
    double A = 18.4;
    int N = 25;
    int m = 15;
    double theta = 0.0;
};

using InversionScheme = std::variant<GsScheme, EulerScheme>;

[[nodiscard]] double scheme_tilt(const InversionScheme& scheme) noexcept;
[[nodiscard]] std::string scheme_label(const InversionScheme& scheme);

/// Transform arguments for one s. For Euler the nodes are already shifted by
/// -theta, so values are taken directly from the untilted transform.
struct NodeSet {
    double s = 0.0;
    std::vector<Complex> z;
};

/// `abscissa` is the half-plane bound of the transform being inverted: a
/// positive value with GS raises TiltIncompatibleError, and an Euler node
/// with Re z <= abscissa raises ContourError.
[[nodiscard]] NodeSet make_nodes(const InversionScheme& scheme, double s, double abscissa = 0.0);

/// Density estimate from transform values at `nodes` (one value per node).
[[nodiscard]] double combine(const InversionScheme& scheme, const NodeSet& nodes,
                             std::span<const Complex> values);

[[nodiscard]] double gs_invert(const std::function<double(double)>& transform, double s,
                               const GsScheme& scheme);
[[nodiscard]] double euler_invert(const std::function<Complex(Complex)>& transform, double s,
                                  const EulerScheme& scheme);

enum class CellStatus : std::uint8_t { ok, non_finite, contour_violation, domain_error };

[[nodiscard]] const char* to_string(CellStatus status) noexcept;

/// Row per s, column per transform. Failed cells hold NaN.
struct InversionMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<CellStatus> status;
    std::vector<std::string> messages;  // per row, empty when the row is fine

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    [[nodiscard]] CellStatus status_at(std::size_t r, std::size_t c) const { return status[r * cols + c]; }
};

/// Writes `cols` transform values at z into `out`.
using VectorTransform = std::function<void(Complex z, std::span<Complex> out)>;

/// Inverts every column on every s, evaluating each node once for all
/// columns. Rows are distributed over `threads` OpenMP threads (0 = runtime
/// default). Results are identical to invert_batch_serial.
[[nodiscard]] InversionMatrix invert_batch(const VectorTransform& transform, std::size_t cols,
                                           std::span<const double> s_grid,
                                           const InversionScheme& scheme, double abscissa = 0.0,
                                           int threads = 0);
[[nodiscard]] InversionMatrix invert_batch_serial(const VectorTransform& transform, std::size_t cols,
                                                  std::span<const double> s_grid,
                                                  const InversionScheme& scheme,
                                                  double abscissa = 0.0);

[[nodiscard]] InversionMatrix invert_batch(const std::vector<std::function<Complex(Complex)>>& transforms,
                                           std::span<const double> s_grid,
                                           const InversionScheme& scheme, int threads = 0);

}  // namespace cmrs
