#include "cmrs/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmrs/summation.hpp"

namespace cmrs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tilted target with its atoms stripped, the inner (untilted) scheme and the
// abscissa the nodes must respect.
struct InversionPlan {
    std::shared_ptr<const AtomicTransformRemainder> remainder;
    InversionScheme scheme;
    double theta = 0.0;
};

InversionPlan plan(const AllocationRequest& request) {
    if (!request.model) throw DomainError("allocation request has no model");
    validate_grid(request.s_grid);
    if (!(request.balance_tol > 0.0)) throw DomainError("balance_tol must be > 0");
    if (!(request.density_floor >= 0.0)) throw DomainError("density_floor must be >= 0");
    InversionPlan p;
    p.theta = scheme_tilt(request.scheme);
    p.scheme = request.scheme;
    ModelPtr target = request.model;
    if (p.theta > 0.0) {
        target = tilt_view(request.model, p.theta);
        auto inner = std::get<EulerScheme>(request.scheme);
        inner.theta = 0.0;
        p.scheme = inner;
    }
    p.remainder = strip_atoms(target);
    return p;
}

AllocationResult finish(const AllocationRequest& request, const InversionPlan& p,
                        const InversionMatrix& m) {
    const std::size_t n = request.model->size();
    std::vector<DensityRow> rows(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        DensityRow& row = rows[r];
        row.s = request.s_grid[r];
        const double untilt = p.theta > 0.0 ? std::exp(-p.theta * row.s) : 1.0;
        row.density = m.at(r, 0) * untilt;
        row.xi.resize(n);
        for (std::size_t i = 0; i < n; ++i) row.xi[i] = m.at(r, i + 1) * untilt;
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (m.status_at(r, c) != CellStatus::ok) {
                row.failed = true;
                row.reason = std::string(to_string(m.status_at(r, c)));
                if (!m.messages[r].empty()) row.reason += ": " + m.messages[r];
                break;
            }
        }
    }
    AllocationResult result = assemble_result(std::move(rows), request.model->atoms(), n,
                                              request.balance_tol, request.density_floor,
                                              scheme_label(request.scheme));
    result.warnings = request.model->warnings();
    return result;
}

VectorTransform remainder_transform(const std::shared_ptr<const AtomicTransformRemainder>& model) {
    return [model](Complex z, std::span<Complex> out) {
        out[0] = model->evaluate(z, out.subspan(1));
    };
}

}  // namespace

const char* to_string(PointStatus status) noexcept {
    switch (status) {
        case PointStatus::ok: return "ok";
        case PointStatus::degraded: return "degraded";
        case PointStatus::failed: return "failed";
    }
    return "unknown";
}

bool AllocationResult::all_ok() const noexcept {
    return std::all_of(points.begin(), points.end(),
                       [](const GridPoint& p) { return p.status == PointStatus::ok; });
}

AtomicTransformRemainder::AtomicTransformRemainder(ModelPtr base)
    : base_(std::move(base)) {
    if (!base_) throw DomainError("strip_atoms: null model");
    stripped_ = base_->atoms();
    if (base_->means()) set_means(*base_->means());
    for (const auto& w : base_->warnings()) add_warning(w);
}

Complex AtomicTransformRemainder::aggregate_at(Complex z) const {
    return base_->aggregate(z) - stripped_.aggregate_part(z);
}

Complex AtomicTransformRemainder::allocation_at(std::size_t i, Complex z) const {
    return base_->allocation(i, z) - stripped_.allocation_part(i, z);
}

Complex AtomicTransformRemainder::evaluate_at(Complex z, std::span<Complex> out) const {
    const Complex ls = base_->evaluate(z, out);
    if (stripped_.empty()) return ls;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= stripped_.allocation_part(i, z);
    return ls - stripped_.aggregate_part(z);
}

std::shared_ptr<const AtomicTransformRemainder> strip_atoms(ModelPtr model) {
    return std::make_shared<AtomicTransformRemainder>(std::move(model));
}

void validate_grid(const std::vector<double>& s_grid) {
    if (s_grid.empty()) throw DomainError("s grid is empty");
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        if (!(s_grid[k] > 0.0) || !std::isfinite(s_grid[k])) {
            throw DomainError("s grid values must be positive and finite");
        }
        if (k > 0 && !(s_grid[k] > s_grid[k - 1])) {
            throw DomainError("s grid must be strictly increasing");
        }
    }
}

AllocationResult assemble_result(std::vector<DensityRow> rows, const AtomSet& atoms, std::size_t n,
                                 double balance_tol, double density_floor, std::string method) {
    AllocationResult result;
    result.n = n;
    result.method = std::move(method);
    result.balance_tol = balance_tol;
    for (const auto& a : atoms.entries()) {
        AtomAllocation aa;
        aa.location = a.location;
        aa.mass = a.mass;
        aa.nu = a.allocation;
        aa.h.resize(n);
        aa.pi.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            aa.h[i] = a.mass > 0.0 ? a.allocation[i] / a.mass : 0.0;
            aa.pi[i] = a.location > 0.0 ? aa.h[i] / a.location : 0.0;
        }
        result.atoms.push_back(std::move(aa));
    }
    result.points.reserve(rows.size());
    for (auto& row : rows) {
        GridPoint p;
        p.s = row.s;
        p.density = row.density;
        p.xi = std::move(row.xi);
        p.reason = std::move(row.reason);
        bool failed = row.failed;
        if (!failed) {
            if (p.density < -kNegativeDensityTol) {
                failed = true;
                p.reason = "negative density";
            } else if (p.density < 0.0) {
                p.density = 0.0;
            }
            for (auto& x : p.xi) {
                if (x < -kNegativeDensityTol) {
                    failed = true;
                    p.reason = "negative allocation density";
                } else if (x < 0.0) {
                    x = 0.0;
                }
            }
        }
        if (!failed && !(p.density > density_floor)) {
            failed = true;
            p.reason = "density below floor";
        }
        if (failed) {
            p.status = PointStatus::failed;
            p.h.assign(n, kNaN);
            p.pi.assign(n, kNaN);
            p.sum_h = kNaN;
            p.balance_residual = kNaN;
            result.points.push_back(std::move(p));
            continue;
        }
        CompensatedSum<double> xsum;
        for (double x : p.xi) xsum.add(x);
        const double target = p.s * p.density;
        p.balance_residual = std::abs(xsum.value() - target) / target;
        p.status = p.balance_residual > balance_tol ? PointStatus::degraded : PointStatus::ok;
        p.h.resize(n);
        p.pi.resize(n);
        CompensatedSum<double> hsum;
        for (std::size_t i = 0; i < n; ++i) {
            double h = p.xi[i] / p.density;
            if (p.status == PointStatus::ok && (h < 0.0 || h > p.s)) {
                h = std::clamp(h, 0.0, p.s);
                p.clipped = true;
            }
            p.h[i] = h;
            p.pi[i] = h / p.s;
            hsum.add(h);
        }
        p.sum_h = hsum.value();
        if (p.status == PointStatus::degraded && p.reason.empty()) p.reason = "budget balance";
        result.points.push_back(std::move(p));
    }
    return result;
}

AllocationResult allocate(const AllocationRequest& request) {
    const InversionPlan p = plan(request);
    const InversionMatrix m = invert_batch(remainder_transform(p.remainder), request.model->size() + 1,
                                           request.s_grid, p.scheme, p.remainder->abscissa(),
                                           request.threads);
    return finish(request, p, m);
}

AllocationResult allocate_serial(const AllocationRequest& request) {
    const InversionPlan p = plan(request);
    const InversionMatrix m = invert_batch_serial(remainder_transform(p.remainder),
                                                  request.model->size() + 1, request.s_grid, p.scheme,
                                                  p.remainder->abscissa());
    return finish(request, p, m);
}

BreakdownReport breakdown_scan(const AllocationResult& result, double balance_tol) {
    BreakdownReport report;
    report.marked = result;
    for (std::size_t k = 0; k < result.points.size(); ++k) {
        const auto& p = result.points[k];
        const bool broken =
            p.status == PointStatus::failed || !(std::abs(p.sum_h - p.s) <= balance_tol * p.s);
        if (!broken) continue;
        report.first_failure = p.s;
        for (std::size_t j = k; j < report.marked.points.size(); ++j) {
            auto& q = report.marked.points[j];
            if (q.status == PointStatus::ok) {
                q.status = PointStatus::degraded;
                if (q.reason.empty()) q.reason = "after breakdown";
            }
        }
        break;
    }
    return report;
}

TailContribution tail_contribution(const AllocationResult& result, double s_star) {
    std::size_t valid = 0;
    while (valid < result.points.size() && result.points[valid].status != PointStatus::failed) ++valid;
    if (valid == 0) throw DomainError("tail_contribution: no usable grid points");
    const auto& pts = result.points;
    if (!(s_star >= pts.front().s && s_star <= pts[valid - 1].s)) {
        std::ostringstream msg;
        msg << "s_star = " << s_star << " outside the usable grid [" << pts.front().s << ", "
            << pts[valid - 1].s << "]";
        throw DomainError(msg.str());
    }
    const std::size_t n = result.n;
    std::size_t k = 0;
    while (k + 1 < valid && pts[k + 1].s <= s_star) ++k;

    // Values at s_star by linear interpolation on [s_k, s_{k+1}].
    double f_prev = pts[k].density;
    std::vector<double> xi_prev = pts[k].xi;
    if (s_star > pts[k].s && k + 1 < valid) {
        const double w = (s_star - pts[k].s) / (pts[k + 1].s - pts[k].s);
        f_prev = (1.0 - w) * pts[k].density + w * pts[k + 1].density;
        for (std::size_t i = 0; i < n; ++i) xi_prev[i] = (1.0 - w) * pts[k].xi[i] + w * pts[k + 1].xi[i];
    }
    double s_prev = s_star;
    CompensatedSum<double> den;
    std::vector<CompensatedSum<double>> num(n);
    for (std::size_t j = k + 1; j < valid; ++j) {
        const double ds = pts[j].s - s_prev;
        den.add(0.5 * ds * (f_prev + pts[j].density));
        for (std::size_t i = 0; i < n; ++i) num[i].add(0.5 * ds * (xi_prev[i] + pts[j].xi[i]));
        s_prev = pts[j].s;
        f_prev = pts[j].density;
        xi_prev = pts[j].xi;
    }
    for (const auto& a : result.atoms) {
        if (a.location < s_star) continue;
        den.add(a.mass);
        for (std::size_t i = 0; i < n; ++i) num[i].add(a.nu[i]);
    }
    TailContribution out;
    out.tail_mass = den.value();
    out.upper_limit = pts[valid - 1].s;
    if (!(out.tail_mass > 0.0)) throw DomainError("tail_contribution: zero tail mass above s_star");
    out.contribution.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.contribution[i] = num[i].value() / out.tail_mass;
    // Mass beyond the grid from an exponential fit through the last two points.
    double beyond = std::numeric_limits<double>::infinity();
    if (valid >= 2) {
        const double fa = pts[valid - 2].density;
        const double fb = pts[valid - 1].density;
        if (fb == 0.0) {
            beyond = 0.0;
        } else if (fa > fb && fb > 0.0) {
            const double rate = std::log(fa / fb) / (pts[valid - 1].s - pts[valid - 2].s);
            beyond = fb / rate;
        }
    }
    out.truncation_bound = beyond / out.tail_mass;
    return out;
}

ProportionTable proportions(const AllocationResult& result) {
    ProportionTable t;
    for (const auto& a : result.atoms) {
        t.s.push_back(a.location);
        t.pi.push_back(a.pi);
    }
    for (const auto& p : result.points) {
        t.s.push_back(p.s);
        t.pi.push_back(p.pi);
    }
    return t;
}

}  // namespace cmrs
