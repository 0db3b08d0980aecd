#include "cmrs/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "cmrs/allocation.hpp"
#include "cmrs/config.hpp"
#include "cmrs/csv.hpp"
#include "cmrs/gs_weights.hpp"
#include "cmrs/linalg.hpp"

namespace cmrs {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    const auto fail = [&err](const char* code, const std::exception& e) {
        err << "error: " << code << ": " << one_line(e.what()) << '\n';
        return kExitError;
    };
    try {
        return body();
    } catch (const ConfigError& e) {
        return fail("config", e);
    } catch (const TiltIncompatibleError& e) {
        return fail("tilt_incompatible", e);
    } catch (const ContourError& e) {
        return fail("contour", e);
    } catch (const DomainError& e) {
        return fail("domain", e);
    } catch (const IndexError& e) {
        return fail("index", e);
    } catch (const InversionError& e) {
        return fail("inversion", e);
    } catch (const SingularMatrixError& e) {
        return fail("singular_matrix", e);
    } catch (const IoError& e) {
        return fail("io", e);
    } catch (const std::exception& e) {
        return fail("internal", e);
    }
}

RunConfig load(const CliOptions& options) {
    if (options.config_path.empty()) throw ConfigError("--config is required");
    return load_config(options.config_path);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    return file;
}

/// Writes through `body` to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(fallback);
        return;
    }
    auto file = open_output(path);
    body(file);
    file.flush();
    if (!file) throw IoError("failed writing '" + path + "'");
}

AllocationResult run_allocation(const ModelPtr& model, const std::vector<double>& grid,
                                const InversionScheme& scheme, double balance_tol, int threads) {
    AllocationRequest request;
    request.model = model;
    request.s_grid = grid;
    request.scheme = scheme;
    request.balance_tol = balance_tol;
    request.threads = threads;
    return allocate(request);
}

struct StatusCounts {
    std::size_t ok = 0, degraded = 0, failed = 0;
    double max_residual = 0.0;  // over ok points
};

StatusCounts count_status(const AllocationResult& r) {
    StatusCounts c;
    for (const auto& p : r.points) {
        switch (p.status) {
            case PointStatus::ok:
                ++c.ok;
                c.max_residual = std::max(c.max_residual, p.balance_residual);
                break;
            case PointStatus::degraded: ++c.degraded; break;
            case PointStatus::failed: ++c.failed; break;
        }
    }
    return c;
}

std::string fmt(double x, int precision = 6) { return format_number(x, precision); }

std::string fade_text(const std::optional<double>& fade) { return fade ? fmt(*fade) : std::string("none"); }

}  // namespace

int cmd_allocate(const CliOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = load(options);
        const ModelPtr model = build_model(config.model);
        const AllocationResult result =
            run_allocation(model, config.grid.values(), config.scheme, config.balance_tol, options.threads);
        const std::string path = options.out_path.empty() ? config.output.csv : options.out_path;
        emit(path, out, [&](std::ostream& os) { write_allocation_csv(os, result, config.output.precision); });

        std::ostream& report = path.empty() ? err : out;
        for (const auto& w : result.warnings) err << "warning: " << one_line(w) << '\n';
        const auto counts = count_status(result);
        report << "allocate: method=" << result.method << " points=" << result.points.size()
               << " atoms=" << result.atoms.size() << " ok=" << counts.ok << " degraded=" << counts.degraded
               << " failed=" << counts.failed << '\n';
        if (config.output.tail_threshold) {
            const auto tail = tail_contribution(result, *config.output.tail_threshold);
            report << "tail: s_star=" << fmt(*config.output.tail_threshold, 12)
                   << " tail_mass=" << fmt(tail.tail_mass, 12) << " upper_limit=" << fmt(tail.upper_limit, 12)
                   << " truncation_bound=" << fmt(tail.truncation_bound, 6);
            for (std::size_t i = 0; i < tail.contribution.size(); ++i) {
                report << " x_" << i + 1 << '=' << fmt(tail.contribution[i], 12);
            }
            report << '\n';
        }
        return counts.degraded + counts.failed == 0 ? kExitOk : kExitDegraded;
    });
}

int cmd_diagnose(const CliOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig config = load(options);
        if (!config.diagnose) config.diagnose = default_diagnose_config(config.scheme);
        const DiagnoseConfig& d = *config.diagnose;
        const ModelPtr model = build_model(config.model);
        const auto grid = config.grid.values();
        bool healthy = true;

        out << "model: " << config.model.family << " n=" << model->size() << '\n';
        for (const auto& w : model->warnings()) out << "warning: " << one_line(w) << '\n';

        out << "transform residuals (tol " << fmt(d.transform_tol) << ")\n";
        out << "  t,allocation_sum,neg_derivative,residual,status\n";
        const auto checks = diagonal_diagnostic(*model, d.t_grid, d.transform_tol);
        for (const auto& c : checks) {
            out << "  " << fmt(c.t) << ',' << fmt(c.allocation_sum, 12) << ',' << fmt(-c.derivative, 12) << ','
                << fmt(c.residual, 3) << ',' << (c.passed ? "pass" : "FAIL") << '\n';
            healthy = healthy && c.passed;
        }

        const auto base = run_allocation(model, grid, config.scheme, config.balance_tol, options.threads);
        const auto base_counts = count_status(base);
        out << "budget residuals: method=" << base.method << " max_ok_residual=" << fmt(base_counts.max_residual, 3)
            << " ok=" << base_counts.ok << " degraded=" << base_counts.degraded << " failed=" << base_counts.failed
            << '\n';
        healthy = healthy && base_counts.degraded + base_counts.failed == 0;

        struct Row {
            std::string method;
            std::optional<double> fade;
            StatusCounts counts;
        };
        std::vector<Row> rows;
        const auto evaluate = [&](const InversionScheme& scheme) {
            Row row{scheme_label(scheme), std::nullopt, {}};
            try {
                const auto r = run_allocation(model, grid, scheme, config.balance_tol, options.threads);
                row.fade = breakdown_scan(r, config.balance_tol).first_failure;
                row.counts = count_status(r);
            } catch (const DomainError& e) {
                row.method += " [" + one_line(e.what()) + "]";
                row.fade = grid.front();
                row.counts.failed = grid.size();
            }
            rows.push_back(row);
        };
        for (const auto& m : d.methods) evaluate(m);
        const std::size_t n_methods = rows.size();
        if (d.sweep) {
            const auto* base_euler = std::get_if<EulerScheme>(&config.scheme);
            const EulerScheme e0 = base_euler ? *base_euler : EulerScheme{};
            if (!d.sweep->A.empty() || !d.sweep->N.empty() || !d.sweep->m.empty()) {
                const auto As = d.sweep->A.empty() ? std::vector<double>{e0.A} : d.sweep->A;
                const auto Ns = d.sweep->N.empty() ? std::vector<int>{e0.N} : d.sweep->N;
                const auto ms = d.sweep->m.empty() ? std::vector<int>{e0.m} : d.sweep->m;
                for (double A : As) {
                    for (int N : Ns) {
                        for (int m : ms) evaluate(EulerScheme{A, N, m, e0.theta});
                    }
                }
            }
            for (int M : d.sweep->M) evaluate(GsScheme(M));
        }

        const auto print_rows = [&](std::ostream& os, std::size_t lo, std::size_t hi, const std::string& indent) {
            for (std::size_t k = lo; k < hi; ++k) {
                const auto& r = rows[k];
                os << indent << csv_escape(r.method) << ',' << fade_text(r.fade) << ','
                   << fmt(r.counts.max_residual, 3) << ',' << r.counts.ok << ',' << r.counts.degraded << ','
                   << r.counts.failed << '\n';
            }
        };
        const std::string columns = "method,fade_point,max_ok_residual,ok,degraded,failed";
        out << "fade points (balance_tol " << fmt(config.balance_tol) << ")\n  " << columns << '\n';
        print_rows(out, 0, n_methods, "  ");
        if (rows.size() > n_methods) {
            out << "parameter sweep\n  " << columns << '\n';
            print_rows(out, n_methods, rows.size(), "  ");
        }
        if (!options.out_path.empty()) {
            emit(options.out_path, out, [&](std::ostream& os) {
                os << columns << '\n';
                print_rows(os, 0, rows.size(), "");
            });
        }
        out << "diagnose: " << (healthy ? "ok" : "degraded") << '\n';
        return healthy ? kExitOk : kExitDegraded;
    });
}

int cmd_verify(const CliOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = load(options);
        if (!config.verify) throw ConfigError("verify block is required");
        VerifyConfig v = *config.verify;
        if (options.seed) v.seed = *options.seed;
        const bool use_closed = v.oracle == "closed_form" || v.oracle == "both";
        const bool use_mc = v.oracle == "mc" || v.oracle == "both";

        // Resolve oracle and sampler up front so unsupported requests fail before any work.
        std::optional<ClosedFormOracle> oracle;
        SamplerPtr sampler;
        if (use_closed) oracle = build_oracle(config.model);
        if (use_mc) sampler = build_sampler(config.model);
        const ModelPtr model = build_model(config.model);
        bool passed = true;

        if (oracle) {
            std::vector<double> grid;
            for (double s : config.grid.values()) {
                if (s >= v.range_lo && s <= v.range_hi && s >= oracle->valid_lo && s <= oracle->valid_hi) {
                    grid.push_back(s);
                }
            }
            if (grid.empty()) throw ConfigError("no grid points inside the verification range");
            const auto result = run_allocation(model, grid, config.scheme, config.balance_tol, options.threads);
            double max_err = 0.0;
            double worst_s = grid.front();
            std::size_t bad = 0;
            for (const auto& p : result.points) {
                if (p.status != PointStatus::ok) {
                    ++bad;
                    continue;
                }
                for (std::size_t i = 0; i < model->size(); ++i) {
                    const double e = std::abs(p.h[i] - oracle->h(i, p.s));
                    if (!(e <= max_err)) {
                        max_err = e;
                        worst_s = p.s;
                    }
                }
            }
            const bool ok = bad == 0 && max_err <= v.tolerance;
            passed = passed && ok;
            out << "closed_form: method=" << result.method << " points=" << grid.size() << " range=[" << fmt(grid.front())
                << ',' << fmt(grid.back()) << "] max_abs_error=" << fmt(max_err, 3) << " at s=" << fmt(worst_s)
                << " non_ok=" << bad << " tolerance=" << fmt(v.tolerance) << ' ' << (ok ? "PASS" : "FAIL") << '\n';
        }

        if (sampler) {
            const auto sample = draw_samples(*sampler, v.mc_samples, v.seed, options.threads);
            const auto result =
                run_allocation(model, v.mc_points, config.scheme, config.balance_tol, options.threads);
            for (const auto& p : result.points) {
                for (std::size_t i = 0; i < model->size(); ++i) {
                    const auto est = conditional_mean(sample, i, p.s, v.bandwidth);
                    const double diff = std::abs(p.h[i] - est.estimate);
                    const bool ok = p.status == PointStatus::ok && diff <= v.se_multiplier * est.standard_error;
                    passed = passed && ok;
                    out << "mc: s=" << fmt(p.s) << " i=" << i + 1 << " h=" << fmt(p.h[i], 8)
                        << " mc=" << fmt(est.estimate, 8) << " se=" << fmt(est.standard_error, 3)
                        << " z=" << fmt(est.standard_error > 0.0 ? diff / est.standard_error
                                                                  : std::numeric_limits<double>::infinity(), 3)
                        << " status=" << to_string(p.status) << ' ' << (ok ? "PASS" : "FAIL") << '\n';
                }
            }
            out << "mc: samples=" << v.mc_samples << " seed=" << v.seed << " bandwidth=" << fmt(v.bandwidth)
                << " se_multiplier=" << fmt(v.se_multiplier) << '\n';
        }
        out << "verify: " << (passed ? "PASS" : "FAIL") << '\n';
        return passed ? kExitOk : kExitDegraded;
    });
}

int cmd_bench(const CliOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = load(options);
        if (!config.bench) throw ConfigError("bench block is required");
        const BenchConfig& b = *config.bench;
        const auto grid = config.grid.values();
        const bool spread = b.repetitions > 1;
        std::ostringstream table;
        table << "n,method,repetitions,mean_seconds" << (spread ? ",sd_seconds" : "") << '\n';
        for (std::size_t n : b.sizes) {
            const ModelPtr model = build_common_shock_cp(bench_cscp_spec(n));
            for (const auto& method : b.methods) {
                std::vector<double> times;
                for (int r = 0; r < b.repetitions; ++r) {
                    const auto t0 = std::chrono::steady_clock::now();
                    const auto result = run_allocation(model, grid, method, config.balance_tol, options.threads);
                    const auto t1 = std::chrono::steady_clock::now();
                    if (result.points.size() != grid.size()) throw std::logic_error("bench: incomplete result");
                    times.push_back(std::chrono::duration<double>(t1 - t0).count());
                }
                double mean = 0.0;
                for (double t : times) mean += t;
                mean /= static_cast<double>(times.size());
                table << n << ',' << csv_escape(scheme_label(method)) << ',' << b.repetitions << ','
                      << fmt(mean, 6);
                if (spread) {
                    double ss = 0.0;
                    for (double t : times) ss += (t - mean) * (t - mean);
                    table << ',' << fmt(std::sqrt(ss / static_cast<double>(times.size() - 1)), 6);
                }
                table << '\n';
            }
        }
        const std::string path = options.out_path.empty() ? config.output.csv : options.out_path;
        emit(path, out, [&](std::ostream& os) { os << table.str(); });
        return kExitOk;
    });
}

int cmd_weights(int M, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (M < 1 || M > kMaxGsOrder) {
            throw DomainError("Gaver-Stehfest order M=" + std::to_string(M) + " outside 1.." +
                              std::to_string(kMaxGsOrder));
        }
        const auto& zeta = gs_weights_exact(M);
        Rational sum = 0;
        Rational sum_over_k = 0;
        out << "k,zeta_exact,zeta_float\n";
        for (std::size_t k = 1; k <= zeta.size(); ++k) {
            const Rational& z = zeta[k - 1];
            sum += z;
            sum_over_k += z / Rational(static_cast<long long>(k));
            out << k << ',' << z.str() << ',' << fmt(z.convert_to<double>(), 17) << '\n';
        }
        out << "sum zeta_k = " << sum.str() << (sum == 0 ? " (exact)" : " (IDENTITY FAILED)") << '\n';
        out << "sum zeta_k/k = " << sum_over_k.str() << (sum_over_k == 1 ? " (exact)" : " (IDENTITY FAILED)")
            << '\n';
        return sum == 0 && sum_over_k == 1 ? kExitOk : kExitDegraded;
    });
}

}  // namespace cmrs
