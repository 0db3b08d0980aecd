#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmrs {

using Complex = std::complex<double>;

/// Argument outside the half-plane where a transform is defined, or an
/// invalid model parameter.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Raised when a real-axis (Gaver-Stehfest) rule meets a positively tilted
/// target, whose shifted nodes would leave the domain of convergence.
class TiltIncompatibleError : public DomainError {
public:
    TiltIncompatibleError()
        : DomainError("Gaver-Stehfest cannot be combined with positive tilting") {}
};

/// One atom of the aggregate law: location s_j, mass mu_S({s_j}) and the
/// allocation masses nu_i({s_j}).
struct Atom {
    double location = 0.0;
    double mass = 0.0;
    std::vector<double> allocation;
};

/// Known atoms of S. Every entry satisfies sum_i nu_i = s_j * mu_S.
class AtomSet {
public:
    AtomSet() = default;
    AtomSet(std::vector<Atom> entries, std::size_t n);

    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::vector<Atom>& entries() const noexcept { return entries_; }
    [[nodiscard]] double total_mass() const noexcept;

    /// A_S(z) = sum_j mu_S({s_j}) e^{-z s_j}
    [[nodiscard]] Complex aggregate_part(Complex z) const;
    /// A_i(z) = sum_j nu_i({s_j}) e^{-z s_j}
    [[nodiscard]] Complex allocation_part(std::size_t i, Complex z) const;

    /// Masses rescaled by e^{theta s_j}, the atomic part of the tilted measure.
    [[nodiscard]] AtomSet tilted(double theta) const;

private:
    std::vector<Atom> entries_;
};

/// Joint transform of a nonnegative risk vector evaluated on the diagonal:
/// L_S(z) = E[e^{-zS}] and L_i*(z) = E[X_i e^{-zS}] for Re z > abscissa().
///
/// Implementations are immutable after construction and safe to evaluate
/// concurrently.
class JointTransformModel {
public:
    virtual ~JointTransformModel() = default;

    [[nodiscard]] virtual std::size_t size() const noexcept = 0;

    /// Evaluation requires Re z strictly greater than this value.
    [[nodiscard]] virtual double abscissa() const noexcept { return 0.0; }

    [[nodiscard]] Complex aggregate(Complex z) const;
    [[nodiscard]] Complex allocation(std::size_t i, Complex z) const;

    /// L_S(z) as the return value and every L_i*(z) written to `out`
    /// (size() entries). Models share work between the two where possible.
    Complex evaluate(Complex z, std::span<Complex> out) const;

    [[nodiscard]] const AtomSet& atoms() const noexcept { return atoms_; }
    /// E[X_i] when finite and known.
    [[nodiscard]] const std::optional<std::vector<double>>& means() const noexcept { return means_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

protected:
    virtual Complex aggregate_at(Complex z) const = 0;
    virtual Complex allocation_at(std::size_t i, Complex z) const = 0;
    virtual Complex evaluate_at(Complex z, std::span<Complex> out) const;

    void set_atoms(AtomSet atoms) { atoms_ = std::move(atoms); }
    void set_means(std::vector<double> means) { means_ = std::move(means); }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    void check_domain(Complex z) const;

private:
    AtomSet atoms_;
    std::optional<std::vector<double>> means_;
    std::vector<std::string> warnings_;
};

using ModelPtr = std::shared_ptr<const JointTransformModel>;

[[nodiscard]] Complex eval_aggregate(const JointTransformModel& model, Complex z);
[[nodiscard]] Complex eval_allocation(const JointTransformModel& model, std::size_t i, Complex z);

// Real-axis evaluation goes through the complex path; the result must be
// real to within 1e-14 relative, otherwise DomainError.
[[nodiscard]] double eval_aggregate(const JointTransformModel& model, double t);
[[nodiscard]] double eval_allocation(const JointTransformModel& model, std::size_t i, double t);

/// Exponentially tilted view: transforms at z delegate to the base at
/// z - theta, atom masses are scaled by e^{theta s_j}.
class TiltedModelView final : public JointTransformModel {
public:
    TiltedModelView(ModelPtr base, double theta);

    [[nodiscard]] std::size_t size() const noexcept override { return base_->size(); }
    [[nodiscard]] double abscissa() const noexcept override { return base_->abscissa() + theta_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] const JointTransformModel& base() const noexcept { return *base_; }

protected:
    Complex aggregate_at(Complex z) const override;
    Complex allocation_at(std::size_t i, Complex z) const override;
    Complex evaluate_at(Complex z, std::span<Complex> out) const override;

private:
    ModelPtr base_;
    double theta_;
};

[[nodiscard]] ModelPtr tilt_view(ModelPtr model, double theta);

/// Central difference (L_S(t+h) - L_S(t-h)) / 2h with h = h_rel * t.
[[nodiscard]] double numerical_aggregate_derivative(const JointTransformModel& model, double t,
                                                    double h_rel);

struct DiagonalCheck {
    double t = 0.0;
    double allocation_sum = 0.0;  // sum_i L_i*(t)
    double derivative = 0.0;      // L_S'(t), central difference
    double residual = 0.0;
    bool passed = false;
};

inline constexpr double kResidualFloor = 1e-300;

/// Transform-level identity sum_i L_i*(t) = -L_S'(t), residual relative to
/// max(|L_S'(t)|, kResidualFloor).
[[nodiscard]] std::vector<DiagonalCheck> diagonal_diagnostic(const JointTransformModel& model,
                                                             std::span<const double> t_grid,
                                                             double tol, double h_rel = 1e-6);

}  // namespace cmrs
