#include "cmrs/inversion.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cmrs/gs_weights.hpp"
#include "cmrs/summation.hpp"

namespace cmrs {

namespace {

std::vector<double> binomial_weights(int m) {
    // C(m, r) 2^{-m}, built by the multiplicative recurrence.
    std::vector<double> w(static_cast<std::size_t>(m) + 1);
    w[0] = std::ldexp(1.0, -m);
    for (int r = 1; r <= m; ++r) w[r] = w[r - 1] * (m - r + 1) / r;
    return w;
}

double euler_combine(const EulerScheme& e, double s, std::span<const Complex> values) {
    const std::size_t last = static_cast<std::size_t>(e.N + e.m);
    CompensatedSum<double> partial;
    std::vector<double> sums;
    sums.reserve(static_cast<std::size_t>(e.m) + 1);
    partial.add(0.5 * values[0].real());
    if (e.N == 0) sums.push_back(partial.value());
    for (std::size_t k = 1; k <= last; ++k) {
        partial.add(k % 2 == 0 ? values[k].real() : -values[k].real());
        if (k >= static_cast<std::size_t>(e.N)) sums.push_back(partial.value());
    }
    const auto w = binomial_weights(e.m);
    CompensatedSum<double> avg;
    for (std::size_t r = 0; r < w.size(); ++r) avg.add(w[r] * sums[r]);
    return std::exp(0.5 * e.A) / s * avg.value() * std::exp(-e.theta * s);
}

void validate_euler(const EulerScheme& e) {
    if (!(e.A > 0.0) || !std::isfinite(e.A)) throw DomainError("Euler A must be > 0");
    if (e.N < 0 || e.m < 0) throw DomainError("Euler N and m must be >= 0");
    if (e.m > 1000) throw DomainError("Euler m must be <= 1000");
    if (!(e.theta >= 0.0) || !std::isfinite(e.theta)) throw DomainError("tilt theta must be >= 0");
}

void invert_row(const VectorTransform& transform, std::size_t cols, double s,
                const InversionScheme& scheme, double abscissa, double* values, CellStatus* status,
                std::string& message) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    NodeSet nodes;
    try {
        nodes = make_nodes(scheme, s, abscissa);
    } catch (const ContourError& e) {
        for (std::size_t c = 0; c < cols; ++c) {
            values[c] = nan;
            status[c] = CellStatus::contour_violation;
        }
        message = e.what();
        return;
    } catch (const std::exception& e) {
        for (std::size_t c = 0; c < cols; ++c) {
            values[c] = nan;
            status[c] = CellStatus::domain_error;
        }
        message = e.what();
        return;
    }
    const std::size_t k_nodes = nodes.z.size();
    std::vector<Complex> buffer(k_nodes * cols);
    try {
        for (std::size_t k = 0; k < k_nodes; ++k) {
            transform(nodes.z[k], std::span<Complex>(buffer.data() + k * cols, cols));
        }
    } catch (const std::exception& e) {
        for (std::size_t c = 0; c < cols; ++c) {
            values[c] = nan;
            status[c] = CellStatus::domain_error;
        }
        message = e.what();
        return;
    }
    std::vector<Complex> column(k_nodes);
    for (std::size_t c = 0; c < cols; ++c) {
        bool finite = true;
        for (std::size_t k = 0; k < k_nodes; ++k) {
            column[k] = buffer[k * cols + c];
            if (!std::isfinite(column[k].real()) || !std::isfinite(column[k].imag())) finite = false;
        }
        const double v = finite ? combine(scheme, nodes, column) : nan;
        if (std::isfinite(v)) {
            values[c] = v;
            status[c] = CellStatus::ok;
        } else {
            values[c] = nan;
            status[c] = CellStatus::non_finite;
            if (message.empty()) message = "non-finite transform value or inversion result";
        }
    }
}

InversionMatrix prepare(std::size_t rows, std::size_t cols, const InversionScheme& scheme,
                        double abscissa) {
    if (std::holds_alternative<GsScheme>(scheme) && abscissa > 0.0) throw TiltIncompatibleError();
    if (const auto* e = std::get_if<EulerScheme>(&scheme)) validate_euler(*e);
    InversionMatrix out;
    out.rows = rows;
    out.cols = cols;
    out.values.assign(rows * cols, 0.0);
    out.status.assign(rows * cols, CellStatus::ok);
    out.messages.assign(rows, std::string{});
    return out;
}

}  // namespace

GsScheme::GsScheme(int M) : M_(M), weights_(gs_weights(M)) {}

double scheme_tilt(const InversionScheme& scheme) noexcept {
    if (const auto* e = std::get_if<EulerScheme>(&scheme)) return e->theta;
    return 0.0;
}

std::string scheme_label(const InversionScheme& scheme) {
    std::ostringstream os;
    if (const auto* g = std::get_if<GsScheme>(&scheme)) {
        os << "gs(M=" << g->order() << ")";
    } else {
        const auto& e = std::get<EulerScheme>(scheme);
        os << "euler(A=" << e.A << ",N=" << e.N << ",m=" << e.m << ",theta=" << e.theta << ")";
    }
    return os.str();
}

NodeSet make_nodes(const InversionScheme& scheme, double s, double abscissa) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("inversion point s must be > 0");
    NodeSet nodes;
    nodes.s = s;
    if (const auto* g = std::get_if<GsScheme>(&scheme)) {
        if (abscissa > 0.0) throw TiltIncompatibleError();
        const int count = 2 * g->order();
        nodes.z.reserve(static_cast<std::size_t>(count));
        for (int k = 1; k <= count; ++k) nodes.z.emplace_back(k * std::numbers::ln2 / s, 0.0);
        return nodes;
    }
    const auto& e = std::get<EulerScheme>(scheme);
    validate_euler(e);
    const double re = e.A / (2.0 * s) - e.theta;
    if (!(re > abscissa)) {
        std::ostringstream msg;
        msg << "Euler contour Re z = " << re << " at s = " << s << " is not right of " << abscissa
            << " (need A > 2 theta s)";
        throw ContourError(msg.str());
    }
    const std::size_t count = static_cast<std::size_t>(e.N + e.m) + 1;
    nodes.z.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        nodes.z.emplace_back(re, std::numbers::pi * static_cast<double>(k) / s);
    }
    return nodes;
}

double combine(const InversionScheme& scheme, const NodeSet& nodes, std::span<const Complex> values) {
    if (values.size() != nodes.z.size()) throw DomainError("combine: one value per node required");
    if (const auto* g = std::get_if<GsScheme>(&scheme)) {
        CompensatedSum<double> acc;
        const auto& w = g->weights();
        for (std::size_t k = 0; k < w.size(); ++k) acc.add(w[k] * values[k].real());
        return std::numbers::ln2 / nodes.s * acc.value();
    }
    return euler_combine(std::get<EulerScheme>(scheme), nodes.s, values);
}

double gs_invert(const std::function<double(double)>& transform, double s, const GsScheme& scheme) {
    const NodeSet nodes = make_nodes(scheme, s);
    std::vector<Complex> values(nodes.z.size());
    for (std::size_t k = 0; k < nodes.z.size(); ++k) {
        const double v = transform(nodes.z[k].real());
        if (!std::isfinite(v)) {
            throw InversionError("transform returned a non-finite value at node " + std::to_string(k), k);
        }
        values[k] = v;
    }
    return combine(scheme, nodes, values);
}

double euler_invert(const std::function<Complex(Complex)>& transform, double s, const EulerScheme& scheme) {
    const NodeSet nodes = make_nodes(scheme, s);
    std::vector<Complex> values(nodes.z.size());
    for (std::size_t k = 0; k < nodes.z.size(); ++k) {
        const Complex v = transform(nodes.z[k]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw InversionError("transform returned a non-finite value at node " + std::to_string(k), k);
        }
        values[k] = v;
    }
    return combine(scheme, nodes, values);
}

const char* to_string(CellStatus status) noexcept {
    switch (status) {
        case CellStatus::ok: return "ok";
        case CellStatus::non_finite: return "non_finite";
        case CellStatus::contour_violation: return "contour_violation";
        case CellStatus::domain_error: return "domain_error";
    }
    return "unknown";
}

InversionMatrix invert_batch(const VectorTransform& transform, std::size_t cols,
                             std::span<const double> s_grid, const InversionScheme& scheme,
                             double abscissa, int threads) {
    InversionMatrix out = prepare(s_grid.size(), cols, scheme, abscissa);
    const int nt = threads > 0 ? threads : omp_get_max_threads();
    const auto rows = static_cast<std::ptrdiff_t>(s_grid.size());
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const auto ur = static_cast<std::size_t>(r);
        invert_row(transform, cols, s_grid[ur], scheme, abscissa, out.values.data() + ur * cols,
                   out.status.data() + ur * cols, out.messages[ur]);
    }
    return out;
}

InversionMatrix invert_batch_serial(const VectorTransform& transform, std::size_t cols,
                                    std::span<const double> s_grid, const InversionScheme& scheme,
                                    double abscissa) {
    InversionMatrix out = prepare(s_grid.size(), cols, scheme, abscissa);
    for (std::size_t r = 0; r < s_grid.size(); ++r) {
        invert_row(transform, cols, s_grid[r], scheme, abscissa, out.values.data() + r * cols,
                   out.status.data() + r * cols, out.messages[r]);
    }
    return out;
}

InversionMatrix invert_batch(const std::vector<std::function<Complex(Complex)>>& transforms,
                             std::span<const double> s_grid, const InversionScheme& scheme, int threads) {
    VectorTransform vt = [&transforms](Complex z, std::span<Complex> out) {
        for (std::size_t c = 0; c < transforms.size(); ++c) out[c] = transforms[c](z);
    };
    return invert_batch(vt, transforms.size(), s_grid, scheme, 0.0, threads);
}

}  // namespace cmrs
