// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/support.hpp"
#include "cmrs/allocation.hpp"
#include "cmrs/config.hpp"
#include "cmrs/gs_weights.hpp"
#include "cmrs/inversion.hpp"
#include "cmrs/models.hpp"
#include "cmrs/oracles.hpp"
#include "cmrs/sampling.hpp"
#include "cmrs/transform.hpp"

using namespace cmrs;
using cmrs::test::log_grid;
using cmrs::test::step_grid;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit;  // seconds
    std::function<Outcome()> run;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

AllocationResult run_alloc(ModelPtr model, std::vector<double> grid, InversionScheme scheme,
                           int threads = 0) {
    AllocationRequest r;
    r.model = std::move(model);
    r.s_grid = std::move(grid);
    r.scheme = std::move(scheme);
    r.threads = threads;
    return allocate(r);
}

ModelPtr iid_exp(std::size_t n, double rate) {
    return build_independent(std::vector<MarginalPtr>(n, exponential_marginal(rate)));
}

// Budget-balance residuals of the closed-form runs, collected for criterion 6.
struct BalanceLog {
    double worst = 0.0;
    std::size_t ok_points = 0;
    std::vector<std::string> runs;

    void add(const std::string& label, const AllocationResult& res) {
        for (const auto& p : res.points) {
            if (p.status != PointStatus::ok) continue;
            worst = std::max(worst, p.balance_residual);
            ++ok_points;
        }
        runs.push_back(label);
    }
};

BalanceLog g_balance;

Outcome gs_weight_identities() {
    for (int M = 1; M <= kMaxGsOrder; ++M) {
        const auto& w = gs_weights_exact(M);
        Rational sum = 0;
        Rational sum_k = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            sum += w[k];
            sum_k += w[k] / Rational(static_cast<long>(k + 1));
        }
        if (sum != 0 || sum_k != 1) return {false, "identity fails at M = " + std::to_string(M)};
    }
    const auto& w1 = gs_weights_exact(1);
    if (w1.size() != 2 || w1[0] != 2 || w1[1] != -2) return {false, "M = 1 weights differ from (2, -2)"};
    return {true, "M = 1..24 exact; M = 1 weights (2, -2)"};
}

Outcome inversion_fixtures() {
    const auto ex3 = cmrs::test::example3_model(2.0, 1.0);
    // Erlang(2, 2) + Exp(1) by convolution.
    const auto ex3_density = [](double s) { return 4.0 * std::exp(-s) * (1.0 - std::exp(-s) * (1.0 + s)); };
    const GsScheme gs(8);
    const EulerScheme euler{18.4, 25, 15, 0.0};
    double gs_err = 0.0;
    double euler_err = 0.0;
    double gs_worst_s = 0.0;
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double targets[3] = {std::exp(-s), s * std::exp(-s), ex3_density(s)};
        const double g[3] = {gs_invert([](double t) { return 1.0 / (1.0 + t); }, s, gs),
                             gs_invert([](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }, s, gs),
                             gs_invert([&](double t) { return eval_aggregate(*ex3, t); }, s, gs)};
        const double e[3] = {euler_invert([](Complex z) { return 1.0 / (1.0 + z); }, s, euler),
                             euler_invert([](Complex z) { return 1.0 / ((1.0 + z) * (1.0 + z)); }, s, euler),
                             euler_invert([&](Complex z) { return ex3->aggregate(z); }, s, euler)};
        for (int k = 0; k < 3; ++k) {
            const double ge = std::abs(g[k] - targets[k]);
            if (ge > gs_err) {
                gs_err = ge;
                gs_worst_s = s;
            }
            euler_err = std::max(euler_err, std::abs(e[k] - targets[k]));
        }
    }
    const bool pass = gs_err <= 1e-6 && euler_err <= 1e-6;
    return {pass, "max error GS(8) " + fmt(gs_err) + " (at s = " + fmt(gs_worst_s) + "), Euler " + fmt(euler_err) +
                      ", tol 1e-6"};
}

Outcome closed_form_cmrs() {
    const auto res = run_alloc(cmrs::test::example3_model(2.0, 1.0), step_grid(0.1, 10.0, 0.1), EulerScheme{});
    g_balance.add("Erlang(2)+Exp", res);
    double err = 0.0;
    std::size_t bad = 0;
    for (const auto& p : res.points) {
        if (p.status != PointStatus::ok) ++bad;
        err = std::max(err, std::abs(p.h[0] - cmrs::test::example3_h1_closed(2.0, 1.0, p.s)));
    }
    const double at1 = cmrs::test::example3_h1_closed(2.0, 1.0, 1.0);
    const bool pass = bad == 0 && err <= 1e-4 && std::abs(at1 - 0.60779) <= 1e-5;
    return {pass, "max |h_1 - oracle| " + fmt(err) + ", oracle h_1(1) = " + std::to_string(at1) +
                      ", non-ok points " + std::to_string(bad)};
}

Outcome homogeneity() {
    // Body grid: points of [0.1, 10] where f_S is at least 1e-4 of its maximum.
    double err = 0.0;
    std::size_t checked = 0;
    std::size_t bad = 0;
    for (std::size_t n : {2u, 3u, 10u}) {
        const auto res = run_alloc(iid_exp(n, 1.3), step_grid(0.1, 10.0, 0.1), EulerScheme{24.0, 25, 15, 0.0});
        g_balance.add("iid n=" + std::to_string(n), res);
        double fmax = 0.0;
        for (const auto& p : res.points) fmax = std::max(fmax, p.density);
        for (const auto& p : res.points) {
            if (p.density < 1e-4 * fmax) continue;
            if (p.status != PointStatus::ok) ++bad;
            for (double h : p.h) err = std::max(err, std::abs(h - p.s / static_cast<double>(n)));
            ++checked;
        }
    }
    return {bad == 0 && err <= 1e-6,
            "max |h_i - s/n| " + fmt(err) + " over " + std::to_string(checked) + " body points, tol 1e-6"};
}

Outcome cscp_reproduction() {
    const auto spec = cmrs::test::reference_cscp();
    const auto model = build_common_shock_cp(spec);
    const auto oracle = cscp_series_oracle(spec);

    const auto body = run_alloc(model, step_grid(0.1, 15.0, 0.1), EulerScheme{24.0, 25, 15, 0.2});
    g_balance.add("cscp", body);
    double err = 0.0;
    std::size_t bad = 0;
    for (const auto& p : body.points) {
        if (p.status != PointStatus::ok) ++bad;
        for (std::size_t i = 0; i < p.h.size(); ++i) err = std::max(err, std::abs(p.h[i] - oracle.h(i, p.s)));
    }

    const auto grid = step_grid(0.1, 75.0, 0.1);
    const auto fade = [&](InversionScheme scheme) {
        const auto f = breakdown_scan(run_alloc(model, grid, std::move(scheme)), kDefaultBalanceTol).first_failure;
        return f.value_or(std::numeric_limits<double>::infinity());
    };
    const double f_gs = fade(GsScheme(10));
    const double f_e0 = fade(EulerScheme{24.0, 25, 15, 0.0});
    const double f_e2 = fade(EulerScheme{24.0, 25, 15, 0.2});
    const bool ordered = f_gs < f_e0 && f_e0 < f_e2;
    return {bad == 0 && err <= 1e-3 && ordered,
            "max |h - series| " + fmt(err) + " on [0.1, 15]; fade GS(10) " + fmt(f_gs) + ", Euler(0) " + fmt(f_e0) +
                ", Euler(0.2) " + fmt(f_e2)};
}

Outcome budget_balance() {
    if (g_balance.runs.empty()) return {false, "no closed-form runs recorded"};
    std::string runs;
    for (const auto& r : g_balance.runs) runs += (runs.empty() ? "" : ", ") + r;
    return {g_balance.worst <= 1e-3, "worst relative residual " + fmt(g_balance.worst) + " over " +
                                         std::to_string(g_balance.ok_points) + " ok points (" + runs + ")"};
}

Outcome tilt_invariance() {
    const auto grid = step_grid(0.1, 10.0, 0.1);
    double worst = 0.0;
    std::size_t bad = 0;
    const std::vector<std::pair<std::string, ModelPtr>> fixtures{
        {"Erlang(2)+Exp", cmrs::test::example3_model(2.0, 1.0)},
        {"cscp", build_common_shock_cp(cmrs::test::reference_cscp())}};
    for (const auto& [label, model] : fixtures) {
        const auto base = run_alloc(model, grid, EulerScheme{18.4, 25, 15, 0.0});
        for (double theta : {0.2, 0.5}) {
            const auto tilted = run_alloc(model, grid, EulerScheme{18.4, 25, 15, theta});
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (base.points[k].status != PointStatus::ok || tilted.points[k].status != PointStatus::ok) ++bad;
                for (std::size_t i = 0; i < base.n; ++i) {
                    worst = std::max(worst, std::abs(base.points[k].h[i] - tilted.points[k].h[i]));
                }
            }
        }
    }
    return {bad == 0 && worst <= 1e-5, "max |h(theta) - h(0)| " + fmt(worst) + ", tol 1e-5"};
}

Outcome lognormal_portfolio() {
    const auto spec = LognormalPortfolioSpec::moment_matched({1.0, 2.0, 2.0}, {5.0, 2.0, 5.0}, 4096);
    const auto model = build_lognormal_portfolio(spec);

    const auto t_grid = log_grid(1e-2, 1e2, 41);
    double diag = 0.0;
    for (const auto& c : diagonal_diagnostic(*model, t_grid, 1e-5)) diag = std::max(diag, c.residual);

    const auto res = run_alloc(model, step_grid(0.5, 15.0, 0.1), EulerScheme{});
    double balance = 0.0;
    std::size_t bad = 0;
    for (const auto& p : res.points) {
        if (p.status != PointStatus::ok) ++bad;
        balance = std::max(balance, std::abs(p.sum_h - p.s));
    }

    const auto sampler = lognormal_sampler(spec);
    const auto sample = draw_samples(*sampler, 1000000, 20240611);
    const std::vector<double> mc_points{2.0, 4.0, 6.0, 8.0, 10.0};
    const auto at = run_alloc(model, mc_points, EulerScheme{});
    double worst_z = 0.0;
    for (std::size_t k = 0; k < mc_points.size(); ++k) {
        if (at.points[k].status != PointStatus::ok) ++bad;
        for (std::size_t i = 0; i < spec.mu.size(); ++i) {
            const auto mc = conditional_mean(sample, i, mc_points[k], kDefaultBandwidth);
            worst_z = std::max(worst_z, std::abs(at.points[k].h[i] - mc.estimate) / mc.standard_error);
        }
    }
    const bool pass = bad == 0 && diag <= 1e-5 && balance <= 1e-3 && worst_z <= 3.0;
    return {pass, "diagonal residual " + fmt(diag) + ", max |sum h - s| " + fmt(balance) + ", worst MC deviation " +
                      fmt(worst_z) + " SE"};
}

Outcome scaling_trend() {
    const std::vector<std::size_t> sizes{5, 100, 1000, 10000};
    const auto grid = step_grid(0.5, 50.0, 0.5);
    const EulerScheme untilted{18.4, 25, 15, 0.0};
    const EulerScheme tilted{18.4, 25, 15, 0.2};
    constexpr int kReps = 5;
    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    std::vector<double> t0;
    std::vector<double> t2;
    for (std::size_t n : sizes) {
        const auto model = build_common_shock_cp(bench_cscp_spec(n));
        std::vector<double> a;
        std::vector<double> b;
        // Interleave the two schemes so drift in machine load hits both alike.
        for (int r = 0; r < kReps; ++r) {
            for (int which = 0; which < 2; ++which) {
                const auto start = std::chrono::steady_clock::now();
                const auto res = run_alloc(model, grid, which == 0 ? untilted : tilted);
                const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                if (res.points.size() != grid.size()) return {false, "incomplete run at n = " + std::to_string(n)};
                (which == 0 ? a : b).push_back(dt);
            }
        }
        t0.push_back(median(a));
        t2.push_back(median(b));
    }
    bool monotone = true;
    double worst_gap = 0.0;
    std::string detail;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (k > 0 && (t0[k] <= t0[k - 1] || t2[k] <= t2[k - 1])) monotone = false;
        worst_gap = std::max(worst_gap, std::abs(t2[k] - t0[k]) / std::min(t0[k], t2[k]));
        detail += "n=" + std::to_string(sizes[k]) + " " + fmt(t0[k]) + "/" + fmt(t2[k]) + "s; ";
    }
    return {monotone && worst_gap < 0.25,
            detail + "monotone " + (monotone ? "yes" : "no") + ", max tilt gap " + fmt(100.0 * worst_gap) + "%"};
}

Outcome atom_handling() {
    const auto spec = cmrs::test::reference_cscp();
    const auto model = build_common_shock_cp(spec);
    double lambda_s = spec.lambda0;
    for (double l : spec.lambdas) lambda_s += l;
    const auto& atoms = model->atoms().entries();
    if (atoms.size() != 1 || atoms[0].location != 0.0) return {false, "expected a single atom at 0"};
    const double mass_err = std::abs(atoms[0].mass - std::exp(-lambda_s));

    const auto res = run_alloc(model, step_grid(0.5, 2.0, 0.5), EulerScheme{});
    double h0 = 0.0;
    if (res.atoms.size() != 1) return {false, "allocation lost the atom"};
    for (double h : res.atoms[0].h) h0 = std::max(h0, std::abs(h));

    const double remainder = std::abs(strip_atoms(model)->aggregate(Complex(1e4, 0.0)));
    const bool pass = mass_err <= 1e-12 && h0 == 0.0 && remainder <= 1e-6;
    return {pass, "|mass - e^{-lambda_S}| " + fmt(mass_err) + ", max |h_i(0)| " + fmt(h0) +
                      ", stripped L_S(1e4) " + fmt(remainder) + " (tol 1e-6)"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "GS weight identities", 1.0, gs_weight_identities},
        {2, "inversion fixtures", 1.0, inversion_fixtures},
        {3, "closed-form CMRS", 5.0, closed_form_cmrs},
        {4, "homogeneity", 10.0, homogeneity},
        {5, "common-shock reproduction", 60.0, cscp_reproduction},
        {6, "budget balance", 1.0, budget_balance},
        {7, "tilt invariance", 30.0, tilt_invariance},
        {8, "lognormal portfolio", 300.0, lognormal_portfolio},
        {9, "scaling trend", 600.0, scaling_trend},
        {10, "atom handling", 1.0, atom_handling},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.time_limit;
        const bool pass = out.pass && in_time;
        if (!pass) ++failures;
        std::printf("criterion %2d %-26s %s  %s  [%.2fs / limit %.0fs%s]\n", c.id, c.name.c_str(),
                    pass ? "PASS" : "FAIL", out.detail.c_str(), secs, c.time_limit, in_time ? "" : ", too slow");
        std::fflush(stdout);
    }
    std::printf("acceptance: %d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
