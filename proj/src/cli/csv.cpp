#include "cmrs/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cmrs {

std::vector<std::string> csv_header(std::size_t n) {
    std::vector<std::string> h{"s", "f_S"};
    for (const char* prefix : {"xi_", "h_", "pi_"}) {
        for (std::size_t i = 1; i <= n; ++i) h.push_back(prefix + std::to_string(i));
    }
    h.insert(h.end(), {"sum_h", "balance_residual", "status"});
    return h;
}

std::string format_number(double x, int precision) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_allocation_csv(std::ostream& out, const AllocationResult& result, int precision) {
    const auto header = csv_header(result.n);
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    const auto num = [precision](double x) { return format_number(x, precision); };
    const auto row = [&](double s, double f, const std::vector<double>& xi, const std::vector<double>& h,
                         const std::vector<double>& pi, double sum_h, double residual, const char* status) {
        out << num(s) << ',' << num(f);
        for (const auto* v : {&xi, &h, &pi}) {
            for (std::size_t i = 0; i < result.n; ++i) out << ',' << num(i < v->size() ? (*v)[i] : std::nan(""));
        }
        out << ',' << num(sum_h) << ',' << num(residual) << ',' << status << '\n';
    };

    std::vector<const AtomAllocation*> atoms;
    for (const auto& a : result.atoms) atoms.push_back(&a);
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const AtomAllocation* a, const AtomAllocation* b) { return a->location < b->location; });
    for (const auto* a : atoms) {
        double sum_h = 0.0;
        double sum_nu = 0.0;
        for (double v : a->h) sum_h += v;
        for (double v : a->nu) sum_nu += v;
        const double target = a->location * a->mass;
        const double residual = target > 0.0 ? std::abs(sum_nu - target) / target : std::abs(sum_nu);
        row(a->location, a->mass, a->nu, a->h, a->pi, sum_h, residual, "atom");
    }
    for (const auto& p : result.points) {
        row(p.s, p.density, p.xi, p.h, p.pi, p.sum_h, p.balance_residual, to_string(p.status));
    }
}

}  // namespace cmrs
