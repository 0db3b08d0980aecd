#include "cmrs/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cmrs/summation.hpp"

namespace cmrs {

namespace {

constexpr double kAtomBalanceTol = 1e-12;

double real_part_checked(Complex v, const char* what) {
    if (std::abs(v.imag()) > 1e-14 * std::abs(v.real()) && std::abs(v.imag()) > kResidualFloor) {
        std::ostringstream msg;
        msg << what << ": real argument produced complex value " << v;
        throw DomainError(msg.str());
    }
    return v.real();
}

}  // namespace

AtomSet::AtomSet(std::vector<Atom> entries, std::size_t n) : entries_(std::move(entries)) {
    CompensatedSum<double> total;
    for (const auto& a : entries_) {
        if (!(a.location >= 0.0) || !std::isfinite(a.location)) {
            throw DomainError("atom location must be finite and nonnegative");
        }
        if (!(a.mass >= 0.0 && a.mass <= 1.0)) {
            throw DomainError("atom mass must lie in [0, 1]");
        }
        if (a.allocation.size() != n) {
            throw DomainError("atom allocation masses must have one entry per risk");
        }
        CompensatedSum<double> nu;
        for (double v : a.allocation) {
            if (!(v >= 0.0)) throw DomainError("atom allocation masses must be nonnegative");
            nu.add(v);
        }
        const double expected = a.location * a.mass;
        if (std::abs(nu.value() - expected) > kAtomBalanceTol * std::max(1.0, expected)) {
            throw DomainError("atom allocation masses must sum to location * mass");
        }
        total.add(a.mass);
    }
    if (total.value() > 1.0 + kAtomBalanceTol) {
        throw DomainError("total atom mass exceeds 1");
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
}

double AtomSet::total_mass() const noexcept {
    CompensatedSum<double> total;
    for (const auto& a : entries_) total.add(a.mass);
    return total.value();
}

Complex AtomSet::aggregate_part(Complex z) const {
    Complex acc{0.0, 0.0};
    for (const auto& a : entries_) {
        acc += a.location == 0.0 ? Complex{a.mass, 0.0} : a.mass * std::exp(-z * a.location);
    }
    return acc;
}

Complex AtomSet::allocation_part(std::size_t i, Complex z) const {
    Complex acc{0.0, 0.0};
    for (const auto& a : entries_) {
        const double nu = a.allocation.at(i);
        if (nu == 0.0) continue;
        acc += nu * std::exp(-z * a.location);
    }
    return acc;
}

AtomSet AtomSet::tilted(double theta) const {
    AtomSet out;
    out.entries_ = entries_;
    for (auto& a : out.entries_) {
        const double scale = std::exp(theta * a.location);
        a.mass *= scale;
        for (auto& v : a.allocation) v *= scale;
    }
    return out;
}

void JointTransformModel::check_domain(Complex z) const {
    if (!(z.real() > abscissa()) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        std::ostringstream msg;
        msg << "transform evaluated at z = " << z << " outside Re z > " << abscissa();
        throw DomainError(msg.str());
    }
}

Complex JointTransformModel::aggregate(Complex z) const {
    check_domain(z);
    return aggregate_at(z);
}

Complex JointTransformModel::allocation(std::size_t i, Complex z) const {
    if (i >= size()) {
        throw IndexError("risk index " + std::to_string(i) + " out of range for n = " +
                         std::to_string(size()));
    }
    check_domain(z);
    return allocation_at(i, z);
}

Complex JointTransformModel::evaluate(Complex z, std::span<Complex> out) const {
    if (out.size() != size()) throw IndexError("evaluate: output span must have size() entries");
    check_domain(z);
    return evaluate_at(z, out);
}

Complex JointTransformModel::evaluate_at(Complex z, std::span<Complex> out) const {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = allocation_at(i, z);
    return aggregate_at(z);
}

Complex eval_aggregate(const JointTransformModel& model, Complex z) { return model.aggregate(z); }

Complex eval_allocation(const JointTransformModel& model, std::size_t i, Complex z) {
    return model.allocation(i, z);
}

double eval_aggregate(const JointTransformModel& model, double t) {
    return real_part_checked(model.aggregate(Complex{t, 0.0}), "eval_aggregate");
}

double eval_allocation(const JointTransformModel& model, std::size_t i, double t) {
    return real_part_checked(model.allocation(i, Complex{t, 0.0}), "eval_allocation");
}

TiltedModelView::TiltedModelView(ModelPtr base, double theta)
    : base_(std::move(base)), theta_(theta) {
    if (!base_) throw DomainError("tilt_view: null base model");
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("tilt parameter must be >= 0");
    set_atoms(base_->atoms().tilted(theta));
    if (base_->means()) set_means(*base_->means());
}

Complex TiltedModelView::aggregate_at(Complex z) const { return base_->aggregate(z - theta_); }

Complex TiltedModelView::allocation_at(std::size_t i, Complex z) const {
    return base_->allocation(i, z - theta_);
}

Complex TiltedModelView::evaluate_at(Complex z, std::span<Complex> out) const {
    return base_->evaluate(z - theta_, out);
}

ModelPtr tilt_view(ModelPtr model, double theta) {
    return std::make_shared<TiltedModelView>(std::move(model), theta);
}

double numerical_aggregate_derivative(const JointTransformModel& model, double t, double h_rel) {
    if (!(t > 0.0)) throw DomainError("numerical derivative requires t > 0");
    if (!(h_rel > 0.0 && h_rel < 0.1)) throw DomainError("h_rel must lie in (0, 0.1)");
    const double h = h_rel * t;
    if (!(t - h > model.abscissa())) throw DomainError("t - h leaves the transform domain");
    return (eval_aggregate(model, t + h) - eval_aggregate(model, t - h)) / (2.0 * h);
}

std::vector<DiagonalCheck> diagonal_diagnostic(const JointTransformModel& model,
                                               std::span<const double> t_grid, double tol,
                                               double h_rel) {
    std::vector<DiagonalCheck> report;
    report.reserve(t_grid.size());
    std::vector<Complex> alloc(model.size());
    for (double t : t_grid) {
        if (!(t > 0.0)) throw DomainError("diagonal diagnostic requires t > 0");
        DiagonalCheck c;
        c.t = t;
        model.evaluate(Complex{t, 0.0}, alloc);
        CompensatedSum<double> sum;
        for (const auto& v : alloc) sum.add(v.real());
        c.allocation_sum = sum.value();
        c.derivative = numerical_aggregate_derivative(model, t, h_rel);
        c.residual = std::abs(c.allocation_sum + c.derivative) /
                     std::max(std::abs(c.derivative), kResidualFloor);
        c.passed = c.residual <= tol;
        report.push_back(c);
    }
    return report;
}

}  // namespace cmrs
