#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "cmrs/gs_weights.hpp"
#include "cmrs/inversion.hpp"
#include "cmrs/models.hpp"
#include "support.hpp"

using namespace cmrs;

namespace {

using boost::multiprecision::cpp_int;

cpp_int factorial(int n) {
    cpp_int f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

/// Stehfest coefficients in the classical V_k form (N = 2M terms):
/// V_k = (-1)^{k+M} sum_j j^M (2j)! / ((M-j)! j! (j-1)! (k-j)! (2j-k)!).
/// Test-side reimplementation with integer arithmetic, independent of the
/// library's binomial form.
std::vector<Rational> stehfest_reference(int M) {
    std::vector<Rational> v;
    for (int k = 1; k <= 2 * M; ++k) {
        Rational sum = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, M); ++j) {
            cpp_int num = boost::multiprecision::pow(cpp_int(j), static_cast<unsigned>(M)) * factorial(2 * j);
            cpp_int den = factorial(M - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k);
            sum += Rational(num, den);
        }
        v.push_back(((k + M) % 2 ? -1 : 1) * sum);
    }
    return v;
}

double euler_single(const std::function<Complex(Complex)>& f, double s, double theta = 0.0) {
    return euler_invert(f, s, EulerScheme{18.4, 25, 15, theta});
}

}  // namespace

TEST_CASE("GS weights: hand values and exact identities") {
    const auto& w1 = gs_weights_exact(1);
    REQUIRE(w1.size() == 2);
    CHECK(w1[0] == 2);
    CHECK(w1[1] == -2);
    for (int M = 1; M <= kMaxGsOrder; ++M) {
        const auto& z = gs_weights_exact(M);
        REQUIRE(z.size() == static_cast<std::size_t>(2 * M));
        Rational sum = 0;
        Rational sum_k = 0;
        for (std::size_t k = 1; k <= z.size(); ++k) {
            sum += z[k - 1];
            sum_k += z[k - 1] / Rational(static_cast<long long>(k));
        }
        CHECK(sum == 0);
        CHECK(sum_k == 1);
    }
    for (int M : {2, 5, 8, 12, 16}) CHECK(gs_weights_exact(M) == stehfest_reference(M));
    CHECK_THROWS_AS((void)gs_weights_exact(0), DomainError);
    CHECK_THROWS_AS((void)gs_weights_exact(25), DomainError);
}

TEST_CASE("gs_invert fixtures") {
    // Roundoff in the materialized weights grows with M; 1e-10 holds up to M = 5.
    for (int M = 1; M <= 6; ++M) {
        const double tol = M <= 5 ? 1e-10 : 1e-9;
        for (double s : {0.3, 1.0, 7.0}) {
            CHECK(std::abs(gs_invert([](double t) { return 1.0 / t; }, s, GsScheme(M)) - 1.0) <= tol);
        }
    }
    CHECK(std::abs(gs_invert([](double t) { return 1.0 / (1.0 + t); }, 1.0, GsScheme(8)) - std::exp(-1.0)) <= 1e-6);
    CHECK(std::abs(gs_invert([](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }, 2.0, GsScheme(10)) -
                   2.0 * std::exp(-2.0)) <= 1e-6);
    CHECK_THROWS_AS((void)gs_invert([](double) { return std::nan(""); }, 1.0, GsScheme(8)), InversionError);
}

TEST_CASE("gs_invert: error improves from M = 4 to M = 8") {
    const auto f = [](double t) { return 1.0 / (1.0 + t); };
    const double e4 = std::abs(gs_invert(f, 1.0, GsScheme(4)) - std::exp(-1.0));
    const double e8 = std::abs(gs_invert(f, 1.0, GsScheme(8)) - std::exp(-1.0));
    CHECK(e8 < e4);
}

TEST_CASE("euler_invert fixtures") {
    const auto f = [](Complex z) { return 1.0 / (1.0 + z); };
    CHECK(std::abs(euler_single(f, 1.0) - std::exp(-1.0)) <= 1e-7);
    CHECK(std::abs(euler_single(f, 1.0, 0.5) - euler_single(f, 1.0)) <= 1e-7);
    CHECK(std::abs(euler_single([](Complex z) { return 1.0 / (z * z); }, 3.0) - 3.0) <= 3e-7);
    CHECK_THROWS_AS((void)euler_single([](Complex) { return Complex(std::nan(""), 0.0); }, 1.0), InversionError);
}

TEST_CASE("contour rule: nodes must lie right of the abscissa") {
    CHECK_THROWS_AS((void)make_nodes(EulerScheme{18.4, 25, 15, 0.0}, 100.0, 0.5), ContourError);
    const auto nodes = make_nodes(EulerScheme{18.4, 25, 15, 0.2}, 2.0, 0.2);
    REQUIRE(nodes.z.size() == 41);
    CHECK(nodes.z[0].real() == doctest::Approx(18.4 / 4.0 - 0.2));
    CHECK_THROWS_AS((void)make_nodes(GsScheme(8), -1.0), DomainError);
}

TEST_CASE("rational fixtures on [0.1, 10]") {
    const auto ex3 = cmrs::test::example3_model(2.0, 1.0);
    // f_S for Erlang(2, 2) + Exp(1): 4 e^{-s} (1 - e^{-s} (1 + s)) by convolution.
    const auto ex3_density = [](double s) { return 4.0 * std::exp(-s) * (1.0 - std::exp(-s) * (1.0 + s)); };
    const auto grid = cmrs::test::step_grid(0.1, 10.0, 0.1);
    for (double s : grid) {
        CHECK(std::abs(euler_single([](Complex z) { return 1.0 / (1.0 + z); }, s) - std::exp(-s)) <= 1e-6);
        CHECK(std::abs(euler_single([](Complex z) { return 1.0 / ((1.0 + z) * (1.0 + z)); }, s) - s * std::exp(-s)) <=
              1e-6);
        CHECK(std::abs(euler_single([&](Complex z) { return ex3->aggregate(z); }, s) - ex3_density(s)) <= 1e-6);
    }
    // GS(M=8) reaches 1e-6 on the single-pole fixtures only for s <= 1; its
    // truncation error (present in exact arithmetic too) is otherwise of order
    // 1e-6..1e-4.
    const GsScheme gs(8);
    for (double s : grid) {
        const double tol = s <= 1.0 ? 1e-6 : 3e-4;
        CHECK(std::abs(gs_invert([](double t) { return 1.0 / (1.0 + t); }, s, gs) - std::exp(-s)) <= tol);
        CHECK(std::abs(gs_invert([](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }, s, gs) - s * std::exp(-s)) <=
              tol);
        CHECK(std::abs(gs_invert([&](double t) { return eval_aggregate(*ex3, t); }, s, gs) - ex3_density(s)) <= 3e-4);
    }
}

TEST_CASE("gs_invert matches the rule evaluated in 50-digit arithmetic") {
    using Big = boost::multiprecision::cpp_bin_float_50;
    for (int M : {6, 8, 10}) {
        const auto ref = stehfest_reference(M);
        for (double s : {0.5, 2.0, 7.0}) {
            const Big ln2 = boost::multiprecision::log(Big(2));
            Big acc = 0;
            for (std::size_t k = 1; k <= ref.size(); ++k) {
                const Big t = Big(static_cast<int>(k)) * ln2 / Big(s);
                acc += Big(ref[k - 1]) / (Big(1) + t);
            }
            const double exact_rule = static_cast<double>(acc * ln2 / Big(s));
            const double got = gs_invert([](double t) { return 1.0 / (1.0 + t); }, s, GsScheme(M));
            // Double-precision roundoff of the weighted sum only.
            CHECK(std::abs(got - exact_rule) <= (M <= 8 ? 1e-6 : 1e-4));
        }
    }
}

TEST_CASE("tilt invariance of Euler inversion on the body grid") {
    const auto ex3 = cmrs::test::example3_model(2.0, 1.0);
    const std::vector<std::function<Complex(Complex)>> fixtures{
        [](Complex z) { return 1.0 / (1.0 + z); },
        [](Complex z) { return 1.0 / ((1.0 + z) * (1.0 + z)); },
        [&](Complex z) { return ex3->aggregate(z); },
        [&](Complex z) { return ex3->allocation(0, z); },
    };
    for (const auto& f : fixtures) {
        for (double s : cmrs::test::step_grid(0.1, 10.0, 0.3)) {
            const double base = euler_single(f, s);
            for (double theta : {0.1, 0.2, 0.5}) CHECK(std::abs(euler_single(f, s, theta) - base) <= 1e-6);
        }
    }
}

TEST_CASE("invert_batch") {
    const auto m = build_independent({exponential_marginal(1.0), exponential_marginal(2.0)});
    const std::vector<double> grid{0.5, 1.0, 2.0};
    const VectorTransform vt = [&](Complex z, std::span<Complex> out) {
        out[0] = m->evaluate(z, out.subspan(1));
    };
    for (const InversionScheme& scheme : {InversionScheme(GsScheme(10)), InversionScheme(EulerScheme{})}) {
        const auto mat = invert_batch(vt, 3, grid, scheme);
        REQUIRE(mat.rows == 3);
        const double tol = std::holds_alternative<EulerScheme>(scheme) ? 1e-6 : 1e-4;
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(std::abs(mat.at(r, 1) + mat.at(r, 2) - grid[r] * mat.at(r, 0)) <= tol);
        }
        const auto serial = invert_batch_serial(vt, 3, grid, scheme);
        CHECK(serial.values == mat.values);
    }

    const std::function<Complex(Complex)> f = [](Complex z) { return 1.0 / (2.0 + z); };
    const auto single = invert_batch(std::vector{f}, grid, EulerScheme{});
    for (std::size_t r = 0; r < grid.size(); ++r) CHECK(single.at(r, 0) == euler_invert(f, grid[r], EulerScheme{}));
    const std::function<double(double)> fr = [](double t) { return 1.0 / (2.0 + t); };
    const auto gs_single = invert_batch(std::vector{f}, grid, GsScheme(8));
    for (std::size_t r = 0; r < grid.size(); ++r) CHECK(gs_single.at(r, 0) == gs_invert(fr, grid[r], GsScheme(8)));

    const auto empty = invert_batch(std::vector{f}, std::span<const double>{}, EulerScheme{});
    CHECK(empty.rows == 0);
    CHECK(empty.values.empty());

    // A node outside the domain marks the row instead of aborting the batch.
    const auto bad = invert_batch(vt, 3, std::vector<double>{1.0, 200.0}, EulerScheme{}, 0.5);
    CHECK(bad.status_at(0, 0) == CellStatus::ok);
    CHECK(bad.status_at(1, 0) == CellStatus::contour_violation);
    CHECK(std::isnan(bad.at(1, 0)));
}

TEST_CASE("scheme labels") {
    CHECK(scheme_label(GsScheme(10)) == "gs(M=10)");
    CHECK(scheme_tilt(EulerScheme{18.4, 25, 15, 0.2}) == 0.2);
    CHECK(scheme_tilt(GsScheme(8)) == 0.0);
}
