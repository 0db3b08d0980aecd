#include "cmrs/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cmrs {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

double number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
    return x;
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

int integer(const json& j, const std::string& key, const std::string& where) {
    const double x = number(j, key, where);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(where + "." + key + " must be an integer");
    return static_cast<int>(x);
}

int integer_or(const json& j, const std::string& key, int fallback, const std::string& where) {
    return j.contains(key) ? integer(j, key, where) : fallback;
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + "." + key + " must contain numbers");
        out.push_back(x.get<double>());
        if (!std::isfinite(out.back())) throw ConfigError(where + "." + key + " must be finite");
    }
    return out;
}

std::string text(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ConfigError(where + "." + key + " must be a string");
    }
    return j.at(key).get<std::string>();
}

// ------------------------------------------------------------ model params

json normalize_mixing(const json& j) {
    const std::string w = "model.mixing";
    const std::string type = text(j, "type", w);
    if (type == "gamma") {
        check_keys(j, {"type", "alpha", "nodes"}, w);
        return {{"type", type}, {"alpha", number(j, "alpha", w)},
                {"nodes", integer_or(j, "nodes", kDefaultMixingNodes, w)}};
    }
    if (type == "levy") {
        check_keys(j, {"type", "kappa", "nodes"}, w);
        return {{"type", type}, {"kappa", number(j, "kappa", w)},
                {"nodes", integer_or(j, "nodes", kDefaultMixingNodes, w)}};
    }
    if (type == "degenerate") {
        check_keys(j, {"type", "value"}, w);
        return {{"type", type}, {"value", number_or(j, "value", 1.0, w)}};
    }
    throw ConfigError("unknown mixing type '" + type + "'");
}

MixingLawHandle build_mixing(const json& j) {
    const std::string type = j.at("type");
    if (type == "gamma") return gamma_mixing(j.at("alpha"), j.at("nodes"));
    if (type == "levy") return levy_mixing(j.at("kappa"), j.at("nodes"));
    return degenerate_mixing(j.at("value"));
}

json normalize_margin(const json& j, const std::string& w) {
    const std::string type = text(j, "type", w);
    if (type == "exponential") {
        check_keys(j, {"type", "rate"}, w);
        return {{"type", type}, {"rate", number(j, "rate", w)}};
    }
    if (type == "erlang") {
        check_keys(j, {"type", "k", "rate"}, w);
        return {{"type", type}, {"k", integer(j, "k", w)}, {"rate", number(j, "rate", w)}};
    }
    if (type == "matrix_exponential") {
        check_keys(j, {"type", "alpha", "T", "u", "p0"}, w);
        json rows = json::array();
        if (!j.contains("T") || !j.at("T").is_array()) throw ConfigError(w + ".T must be an array of rows");
        for (const auto& row : j.at("T")) {
            json r = json::array();
            if (!row.is_array()) throw ConfigError(w + ".T must be an array of rows");
            for (const auto& x : row) {
                if (!x.is_number()) throw ConfigError(w + ".T must contain numbers");
                r.push_back(x.get<double>());
            }
            rows.push_back(r);
        }
        return {{"type", type}, {"alpha", numbers(j, "alpha", w)}, {"T", rows},
                {"u", numbers(j, "u", w)}, {"p0", number_or(j, "p0", 0.0, w)}};
    }
    throw ConfigError("unknown margin type '" + type + "' in " + w);
}

MatrixExpSpec margin_spec(const json& j) {
    const std::string type = j.at("type");
    if (type == "exponential") return erlang_spec(1, j.at("rate"));
    if (type == "erlang") return erlang_spec(j.at("k"), j.at("rate"));
    MatrixExpSpec spec;
    spec.alpha = j.at("alpha").get<std::vector<double>>();
    spec.u = j.at("u").get<std::vector<double>>();
    spec.p0 = j.at("p0");
    const std::size_t p = spec.alpha.size();
    if (j.at("T").size() != p) throw ConfigError("matrix-exponential T must be p x p");
    for (const auto& row : j.at("T")) {
        if (row.size() != p) throw ConfigError("matrix-exponential T must be p x p");
        for (const auto& x : row) spec.T.push_back(x.get<double>());
    }
    return spec;
}

MarginalPtr build_margin(const json& j) {
    if (j.at("type") == "exponential") return exponential_marginal(j.at("rate"));
    return matrix_exp_marginal(margin_spec(j));
}

json normalize_model(const json& j, std::string& family) {
    const std::string w = "model";
    family = text(j, "family", w);
    if (family == "mixed_exp_frailty") {
        check_keys(j, {"family", "lambdas", "mixing"}, w);
        if (!j.contains("mixing")) throw ConfigError("model is missing 'mixing'");
        return {{"lambdas", numbers(j, "lambdas", w)}, {"mixing", normalize_mixing(j.at("mixing"))}};
    }
    if (family == "edf_frailty") {
        check_keys(j, {"family", "margins", "mixing"}, w);
        if (!j.contains("margins") || !j.at("margins").is_array()) throw ConfigError("model.margins must be an array");
        json margins = json::array();
        for (const auto& m : j.at("margins")) {
            const std::string mw = "model.margins[]";
            const std::string type = text(m, "type", mw);
            if (type != "gamma" && type != "inverse_gaussian") {
                throw ConfigError("unknown EDF margin type '" + type + "'");
            }
            check_keys(m, {"type", "lambda", "phi"}, mw);
            margins.push_back({{"type", type}, {"lambda", number(m, "lambda", mw)},
                               {"phi", number_or(m, "phi", 1.0, mw)}});
        }
        if (!j.contains("mixing")) throw ConfigError("model is missing 'mixing'");
        return {{"margins", margins}, {"mixing", normalize_mixing(j.at("mixing"))}};
    }
    if (family == "matrix_exponential") {
        check_keys(j, {"family", "margins"}, w);
        if (!j.contains("margins") || !j.at("margins").is_array()) throw ConfigError("model.margins must be an array");
        json margins = json::array();
        for (const auto& m : j.at("margins")) margins.push_back(normalize_margin(m, "model.margins[]"));
        return {{"margins", margins}};
    }
    if (family == "me_example") {
        check_keys(j, {"family", "lambda", "mu"}, w);
        return {{"lambda", number(j, "lambda", w)}, {"mu", number(j, "mu", w)}};
    }
    if (family == "katz_compound") {
        check_keys(j, {"family", "risks"}, w);
        if (!j.contains("risks") || !j.at("risks").is_array()) throw ConfigError("model.risks must be an array");
        json risks = json::array();
        for (const auto& r : j.at("risks")) {
            const std::string rw = "model.risks[]";
            check_keys(r, {"a", "b", "severity"}, rw);
            if (!r.contains("severity")) throw ConfigError(rw + " is missing 'severity'");
            risks.push_back({{"a", number(r, "a", rw)}, {"b", number(r, "b", rw)},
                             {"severity", normalize_margin(r.at("severity"), rw + ".severity")}});
        }
        return {{"risks", risks}};
    }
    if (family == "common_shock_cp") {
        check_keys(j, {"family", "lambda0", "lambdas", "beta0", "betas", "weights"}, w);
        return {{"lambda0", number(j, "lambda0", w)}, {"lambdas", numbers(j, "lambdas", w)},
                {"beta0", number(j, "beta0", w)}, {"betas", numbers(j, "betas", w)},
                {"weights", numbers(j, "weights", w)}};
    }
    if (family == "lognormal") {
        check_keys(j, {"family", "mu", "sigma", "means", "variances", "gh_order"}, w);
        json out{{"gh_order", integer_or(j, "gh_order", kDefaultGhOrder, w)}};
        const bool direct = j.contains("mu") || j.contains("sigma");
        const bool moments = j.contains("means") || j.contains("variances");
        if (direct == moments) throw ConfigError("lognormal model needs either mu/sigma or means/variances");
        if (direct) {
            out["mu"] = numbers(j, "mu", w);
            out["sigma"] = numbers(j, "sigma", w);
        } else {
            out["means"] = numbers(j, "means", w);
            out["variances"] = numbers(j, "variances", w);
        }
        return out;
    }
    throw ConfigError("unknown model family '" + family + "'");
}

LognormalPortfolioSpec lognormal_spec(const json& p) {
    const int order = p.at("gh_order");
    if (p.contains("mu")) {
        LognormalPortfolioSpec spec;
        spec.mu = p.at("mu").get<std::vector<double>>();
        spec.sigma = p.at("sigma").get<std::vector<double>>();
        spec.gh_order = order;
        return spec;
    }
    return LognormalPortfolioSpec::moment_matched(p.at("means").get<std::vector<double>>(),
                                                  p.at("variances").get<std::vector<double>>(), order);
}

CommonShockCPSpec cscp_spec(const json& p) {
    CommonShockCPSpec spec;
    spec.lambda0 = p.at("lambda0");
    spec.lambdas = p.at("lambdas").get<std::vector<double>>();
    spec.beta0 = p.at("beta0");
    spec.betas = p.at("betas").get<std::vector<double>>();
    spec.weights = p.at("weights").get<std::vector<double>>();
    return spec;
}

MixedExpFrailtySpec frailty_spec(const json& p) {
    return {p.at("lambdas").get<std::vector<double>>(), build_mixing(p.at("mixing"))};
}

std::vector<MatrixExpSpec> me_margins(const ModelConfig& m) {
    std::vector<MatrixExpSpec> specs;
    if (m.family == "me_example") {
        specs.push_back(erlang_spec(2, m.params.at("lambda")));
        specs.push_back(erlang_spec(1, m.params.at("mu")));
    } else {
        for (const auto& margin : m.params.at("margins")) specs.push_back(margin_spec(margin));
    }
    return specs;
}

// ------------------------------------------------------------ other blocks

GridConfig parse_grid(const json& j) {
    const std::string w = "grid";
    check_keys(j, {"start", "stop", "step", "points"}, w);
    GridConfig g;
    if (j.contains("points")) {
        if (j.contains("start") || j.contains("stop") || j.contains("step")) {
            throw ConfigError("grid takes either points or start/stop/step");
        }
        g.points = numbers(j, "points", w);
    } else {
        g.start = number(j, "start", w);
        g.stop = number(j, "stop", w);
        g.step = number(j, "step", w);
        if (!(*g.step > 0.0) || !(*g.stop >= *g.start)) throw ConfigError("grid needs step > 0 and stop >= start");
        const auto count = static_cast<std::size_t>(std::floor((*g.stop - *g.start) / *g.step + 1e-9)) + 1;
        if (count > 10000000) throw ConfigError("grid has too many points");
        for (std::size_t k = 0; k < count; ++k) {
            g.points.push_back(std::round((*g.start + k * *g.step) * 1e12) / 1e12);
        }
    }
    try {
        validate_grid(g.points);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    return g;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> t;
    for (int k = 0; k < count; ++k) t.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
    return t;
}

std::vector<InversionScheme> default_methods(const InversionScheme& base) {
    EulerScheme e;
    if (const auto* b = std::get_if<EulerScheme>(&base)) e = *b;
    EulerScheme untilted = e;
    untilted.theta = 0.0;
    EulerScheme tilted = e;
    if (!(tilted.theta > 0.0)) tilted.theta = 0.2;
    return {GsScheme(10), untilted, tilted};
}

std::vector<InversionScheme> parse_methods(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of schemes");
    std::vector<InversionScheme> out;
    for (const auto& m : j) out.push_back(parse_scheme(m));
    return out;
}

json methods_json(const std::vector<InversionScheme>& methods) {
    json a = json::array();
    for (const auto& m : methods) a.push_back(scheme_to_json(m));
    return a;
}

std::vector<int> integers(const json& j, const std::string& key, const std::string& where) {
    std::vector<int> out;
    for (double x : numbers(j, key, where)) {
        if (x != std::floor(x)) throw ConfigError(where + "." + key + " must contain integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

}  // namespace

std::vector<double> GridConfig::values() const { return points; }

DiagnoseConfig default_diagnose_config(const InversionScheme& scheme) {
    DiagnoseConfig d;
    d.t_grid = log_grid(1e-2, 1e2, 9);
    d.methods = default_methods(scheme);
    return d;
}

InversionScheme parse_scheme(const json& j) {
    const std::string w = "scheme";
    const std::string method = text(j, "method", w);
    if (method == "gs") {
        check_keys(j, {"method", "M", "tilt"}, w);
        if (number_or(j, "tilt", 0.0, w) > 0.0) throw TiltIncompatibleError();
        const int M = integer_or(j, "M", 10, w);
        if (M < 1 || M > 24) throw ConfigError("scheme.M must lie in 1..24");
        return GsScheme(M);
    }
    if (method == "euler") {
        check_keys(j, {"method", "A", "N", "m", "tilt"}, w);
        EulerScheme e;
        e.A = number_or(j, "A", e.A, w);
        e.N = integer_or(j, "N", e.N, w);
        e.m = integer_or(j, "m", e.m, w);
        e.theta = number_or(j, "tilt", 0.0, w);
        if (!(e.A > 0.0) || e.N < 0 || e.m < 0 || e.m > 1000 || !(e.theta >= 0.0)) {
            throw ConfigError("euler scheme needs A > 0, N >= 0, 0 <= m <= 1000, tilt >= 0");
        }
        return e;
    }
    throw ConfigError("unknown scheme method '" + method + "'");
}

json scheme_to_json(const InversionScheme& scheme) {
    if (const auto* g = std::get_if<GsScheme>(&scheme)) return {{"method", "gs"}, {"M", g->order()}};
    const auto& e = std::get<EulerScheme>(scheme);
    return {{"method", "euler"}, {"A", e.A}, {"N", e.N}, {"m", e.m}, {"tilt", e.theta}};
}

RunConfig parse_config(const json& doc) {
    check_keys(doc, {"model", "grid", "scheme", "output", "verify", "tolerance", "diagnose", "bench"}, "config");
    RunConfig c;
    if (!doc.contains("model")) throw ConfigError("config is missing 'model'");
    c.model.params = normalize_model(doc.at("model"), c.model.family);
    if (!doc.contains("grid")) throw ConfigError("config is missing 'grid'");
    c.grid = parse_grid(doc.at("grid"));
    if (doc.contains("scheme")) c.scheme = parse_scheme(doc.at("scheme"));
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        check_keys(o, {"csv", "precision", "tail_threshold"}, "output");
        if (o.contains("csv")) c.output.csv = text(o, "csv", "output");
        c.output.precision = integer_or(o, "precision", 12, "output");
        if (c.output.precision < 1 || c.output.precision > 17) throw ConfigError("output.precision must lie in 1..17");
        if (o.contains("tail_threshold")) {
            c.output.tail_threshold = number(o, "tail_threshold", "output");
            if (!(*c.output.tail_threshold >= 0.0)) throw ConfigError("output.tail_threshold must be >= 0");
        }
    }
    if (doc.contains("tolerance")) {
        const auto& t = doc.at("tolerance");
        check_keys(t, {"balance_tol"}, "tolerance");
        c.balance_tol = number_or(t, "balance_tol", kDefaultBalanceTol, "tolerance");
        if (!(c.balance_tol > 0.0)) throw ConfigError("tolerance.balance_tol must be > 0");
    }
    if (doc.contains("verify")) {
        const auto& v = doc.at("verify");
        const std::string w = "verify";
        check_keys(v, {"oracle", "mc_samples", "seed", "bandwidth", "tolerance", "range", "mc_points",
                       "se_multiplier"}, w);
        VerifyConfig vc;
        if (v.contains("oracle")) vc.oracle = text(v, "oracle", w);
        if (vc.oracle != "closed_form" && vc.oracle != "mc" && vc.oracle != "both") {
            throw ConfigError("verify.oracle must be closed_form, mc or both");
        }
        const double samples = number_or(v, "mc_samples", static_cast<double>(vc.mc_samples), w);
        if (samples < static_cast<double>(kMinMcSamples) || samples != std::floor(samples)) {
            throw ConfigError("verify.mc_samples must be an integer >= 1000");
        }
        vc.mc_samples = static_cast<std::size_t>(samples);
        if (v.contains("seed")) {
            if (!v.at("seed").is_number_unsigned()) throw ConfigError("verify.seed must be a nonnegative integer");
            vc.seed = v.at("seed").get<std::uint64_t>();
        }
        vc.bandwidth = number_or(v, "bandwidth", vc.bandwidth, w);
        vc.tolerance = number_or(v, "tolerance", vc.tolerance, w);
        vc.se_multiplier = number_or(v, "se_multiplier", vc.se_multiplier, w);
        if (v.contains("range")) {
            const auto r = numbers(v, "range", w);
            if (r.size() != 2 || !(r[0] < r[1])) throw ConfigError("verify.range must be [lo, hi] with lo < hi");
            vc.range_lo = r[0];
            vc.range_hi = r[1];
        }
        if (v.contains("mc_points")) vc.mc_points = numbers(v, "mc_points", w);
        if (!(vc.bandwidth > 0.0) || !(vc.tolerance > 0.0) || !(vc.se_multiplier > 0.0)) {
            throw ConfigError("verify bandwidth, tolerance and se_multiplier must be > 0");
        }
        c.verify = vc;
    }
    if (doc.contains("diagnose")) {
        const auto& d = doc.at("diagnose");
        const std::string w = "diagnose";
        check_keys(d, {"t_grid", "transform_tol", "methods", "sweep"}, w);
        DiagnoseConfig dc;
        dc.t_grid = d.contains("t_grid") ? numbers(d, "t_grid", w) : log_grid(1e-2, 1e2, 9);
        for (double t : dc.t_grid) {
            if (!(t > 0.0)) throw ConfigError("diagnose.t_grid values must be > 0");
        }
        dc.transform_tol = number_or(d, "transform_tol", dc.transform_tol, w);
        dc.methods = d.contains("methods") ? parse_methods(d.at("methods"), "diagnose.methods")
                                           : default_methods(c.scheme);
        if (d.contains("sweep")) {
            const auto& s = d.at("sweep");
            check_keys(s, {"A", "N", "m", "M"}, "diagnose.sweep");
            SweepConfig sc;
            if (s.contains("A")) sc.A = numbers(s, "A", "diagnose.sweep");
            if (s.contains("N")) sc.N = integers(s, "N", "diagnose.sweep");
            if (s.contains("m")) sc.m = integers(s, "m", "diagnose.sweep");
            if (s.contains("M")) sc.M = integers(s, "M", "diagnose.sweep");
            dc.sweep = sc;
        }
        c.diagnose = dc;
    }
    if (doc.contains("bench")) {
        const auto& b = doc.at("bench");
        const std::string w = "bench";
        check_keys(b, {"sizes", "repetitions", "methods"}, w);
        BenchConfig bc;
        if (b.contains("sizes")) {
            bc.sizes.clear();
            for (double x : numbers(b, "sizes", w)) {
                if (!(x >= 1.0) || x != std::floor(x)) throw ConfigError("bench.sizes must be positive integers");
                bc.sizes.push_back(static_cast<std::size_t>(x));
            }
        }
        bc.repetitions = integer_or(b, "repetitions", bc.repetitions, w);
        if (bc.repetitions < 1) throw ConfigError("bench.repetitions must be >= 1");
        if (b.contains("methods")) {
            bc.methods = parse_methods(b.at("methods"), "bench.methods");
        } else {
            const auto all = default_methods(c.scheme);
            bc.methods = {all[1], all[2]};
        }
        c.bench = bc;
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    json doc;
    json model = c.model.params;
    model["family"] = c.model.family;
    doc["model"] = model;
    if (c.grid.start) {
        doc["grid"] = {{"start", *c.grid.start}, {"stop", *c.grid.stop}, {"step", *c.grid.step}};
    } else {
        doc["grid"] = {{"points", c.grid.points}};
    }
    doc["scheme"] = scheme_to_json(c.scheme);
    doc["output"] = {{"csv", c.output.csv}, {"precision", c.output.precision}};
    if (c.output.tail_threshold) doc["output"]["tail_threshold"] = *c.output.tail_threshold;
    doc["tolerance"] = {{"balance_tol", c.balance_tol}};
    if (c.verify) {
        const auto& v = *c.verify;
        doc["verify"] = {{"oracle", v.oracle},         {"mc_samples", v.mc_samples},
                         {"seed", v.seed},             {"bandwidth", v.bandwidth},
                         {"tolerance", v.tolerance},   {"range", {v.range_lo, v.range_hi}},
                         {"mc_points", v.mc_points},   {"se_multiplier", v.se_multiplier}};
    }
    if (c.diagnose) {
        const auto& d = *c.diagnose;
        json dj{{"t_grid", d.t_grid}, {"transform_tol", d.transform_tol}, {"methods", methods_json(d.methods)}};
        if (d.sweep) {
            json s = json::object();
            if (!d.sweep->A.empty()) s["A"] = d.sweep->A;
            if (!d.sweep->N.empty()) s["N"] = d.sweep->N;
            if (!d.sweep->m.empty()) s["m"] = d.sweep->m;
            if (!d.sweep->M.empty()) s["M"] = d.sweep->M;
            dj["sweep"] = s;
        }
        doc["diagnose"] = dj;
    }
    if (c.bench) {
        doc["bench"] = {{"sizes", c.bench->sizes},
                        {"repetitions", c.bench->repetitions},
                        {"methods", methods_json(c.bench->methods)}};
    }
    return doc;
}

ModelPtr build_model(const ModelConfig& m) {
    const json& p = m.params;
    if (m.family == "mixed_exp_frailty") return build_mixed_exp_frailty(frailty_spec(p));
    if (m.family == "edf_frailty") {
        EdfFrailtySpec spec;
        for (const auto& margin : p.at("margins")) {
            const double lambda = margin.at("lambda");
            const double phi = margin.at("phi");
            spec.margins.push_back(margin.at("type") == "gamma" ? gamma_edf_margin(lambda, phi)
                                                                : inverse_gaussian_edf_margin(lambda, phi));
        }
        spec.mixing = build_mixing(p.at("mixing"));
        return build_edf_frailty(spec);
    }
    if (m.family == "matrix_exponential" || m.family == "me_example") return build_matrix_exp(me_margins(m));
    if (m.family == "katz_compound") {
        KatzCompoundSpec spec;
        for (const auto& r : p.at("risks")) spec.risks.push_back({r.at("a"), r.at("b"), build_margin(r.at("severity"))});
        return build_katz_compound(spec);
    }
    if (m.family == "common_shock_cp") return build_common_shock_cp(cscp_spec(p));
    if (m.family == "lognormal") return build_lognormal_portfolio(lognormal_spec(p));
    throw ConfigError("unknown model family '" + m.family + "'");
}

ClosedFormOracle build_oracle(const ModelConfig& m) {
    const json& p = m.params;
    if (m.family == "mixed_exp_frailty") return mixed_exp_oracle(frailty_spec(p));
    if (m.family == "me_example") {
        const double lambda = p.at("lambda");
        const double mu = p.at("mu");
        if (std::abs(lambda - mu) < kTieTolerance * std::max(lambda, mu)) return me_equal_rates_oracle(lambda);
        return me_example_oracle(lambda, mu);
    }
    if (m.family == "common_shock_cp") return cscp_series_oracle(cscp_spec(p));
    throw ConfigError("no closed-form oracle for family '" + m.family + "'");
}

SamplerPtr build_sampler(const ModelConfig& m) {
    const json& p = m.params;
    if (m.family == "mixed_exp_frailty") return mixed_exp_sampler(frailty_spec(p));
    if (m.family == "common_shock_cp") return common_shock_sampler(cscp_spec(p));
    if (m.family == "lognormal") return lognormal_sampler(lognormal_spec(p));
    if (m.family == "matrix_exponential" || m.family == "me_example") return phase_type_sampler(me_margins(m));
    throw ConfigError("no Monte Carlo sampler for family '" + m.family + "'");
}

CommonShockCPSpec bench_cscp_spec(std::size_t n) {
    if (n == 0) throw ConfigError("bench size must be >= 1");
    static constexpr double kLambda[] = {0.8, 1.1, 0.6};
    static constexpr double kBeta[] = {1.4, 0.7, 1.9};
    static constexpr double kWeight[] = {0.2, 0.3, 0.5};
    CommonShockCPSpec spec;
    spec.lambda0 = 1.5;
    spec.beta0 = 0.9;
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        spec.lambdas.push_back(kLambda[i % 3] * 3.0 / static_cast<double>(n));
        spec.betas.push_back(kBeta[i % 3]);
        spec.weights.push_back(kWeight[i % 3]);
        wsum += kWeight[i % 3];
    }
    for (auto& w : spec.weights) w /= wsum;
    // Absorb rounding so the weights sum to 1 within the model's 1e-12 check.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) total += spec.weights[i];
    spec.weights.back() = 1.0 - total;
    return spec;
}

}  // namespace cmrs
