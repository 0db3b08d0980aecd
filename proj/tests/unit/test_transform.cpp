#include <doctest.h>

#include <cmath>

#include "cmrs/allocation.hpp"
#include "cmrs/inversion.hpp"
#include "cmrs/models.hpp"
#include "cmrs/transform.hpp"
#include "invariants.hpp"

using namespace cmrs;
using cmrs::test::reference_cscp;

namespace {

double cscp_exponent(const CommonShockCPSpec& p, double t) {
    double e = p.lambda0 * (p.beta0 / (p.beta0 + t) - 1.0);
    for (std::size_t i = 0; i < p.lambdas.size(); ++i) e += p.lambdas[i] * (p.betas[i] / (p.betas[i] + t) - 1.0);
    return e;
}

}  // namespace

TEST_CASE("eval_aggregate: single exponential and the origin") {
    const auto m = build_independent({exponential_marginal(1.0)});
    CHECK(eval_aggregate(*m, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (const auto& model : {m, cmrs::test::example3_model(2.0, 1.0), build_common_shock_cp(reference_cscp())}) {
        CHECK(std::abs(eval_aggregate(*model, 1e-8) - 1.0) <= 1e-6);
    }
}

TEST_CASE("eval_aggregate: common-shock model matches its explicit exponential form") {
    const auto p = reference_cscp();
    const auto m = build_common_shock_cp(p);
    for (double t : {0.3, 1.0, 4.0}) {
        CHECK(eval_aggregate(*m, t) == doctest::Approx(std::exp(cscp_exponent(p, t))).epsilon(1e-13));
        for (std::size_t i = 0; i < 3; ++i) {
            const double d = p.lambda0 * p.weights[i] * p.beta0 / std::pow(p.beta0 + t, 2) +
                             p.lambdas[i] * p.betas[i] / std::pow(p.betas[i] + t, 2);
            CHECK(eval_allocation(*m, i, t) == doctest::Approx(d * std::exp(cscp_exponent(p, t))).epsilon(1e-13));
        }
    }
}

TEST_CASE("eval_allocation: hand-derived values") {
    const auto one = build_independent({exponential_marginal(1.0)});
    CHECK(eval_allocation(*one, 0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));

    const auto two = build_independent({exponential_marginal(1.0), exponential_marginal(2.0)});
    CHECK(eval_allocation(*two, 0, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

    const auto with_zero = build_independent({exponential_marginal(1.0), point_mass_marginal(0.0)});
    for (double t : {0.1, 1.0, 10.0}) CHECK(eval_allocation(*with_zero, 1, t) == 0.0);
}

TEST_CASE("eval_allocation: index and domain errors") {
    const auto m = build_independent({exponential_marginal(1.0)});
    CHECK_THROWS_AS((void)eval_allocation(*m, 3, 1.0), IndexError);
    CHECK_THROWS_AS((void)eval_aggregate(*m, Complex(-0.5, 0.0)), DomainError);
    CHECK_THROWS_AS((void)eval_aggregate(*m, Complex(std::nan(""), 0.0)), DomainError);
}

TEST_CASE("tilt_view: identity at zero, shift by hand, GS rejects positive tilt") {
    const auto m = build_independent({exponential_marginal(1.0)});
    const auto same = tilt_view(m, 0.0);
    for (const Complex z : {Complex(0.5, 0.0), Complex(1.0, 2.0), Complex(3.0, -1.0)}) {
        CHECK(same->aggregate(z) == m->aggregate(z));
        CHECK(same->allocation(0, z) == m->allocation(0, z));
    }
    const auto tilted = tilt_view(m, 0.2);
    CHECK(tilted->aggregate(Complex(1.0, 0.0)).real() == doctest::Approx(1.0 / 1.8).epsilon(1e-15));
    CHECK(tilted->abscissa() == doctest::Approx(0.2));
    CHECK_THROWS_AS((void)make_nodes(GsScheme(10), 1.0, tilted->abscissa()), TiltIncompatibleError);
    try {
        (void)make_nodes(GsScheme(10), 1.0, 0.2);
    } catch (const TiltIncompatibleError& e) {
        CHECK(std::string(e.what()).find("cannot be combined with positive tilting") != std::string::npos);
    }
}

TEST_CASE("tilt_view: atoms are rescaled by e^{theta s_j}") {
    const auto m = build_independent({point_mass_marginal(2.0), point_mass_marginal(1.0)});
    const auto tilted = tilt_view(m, 0.5);
    REQUIRE(tilted->atoms().size() == 1);
    const auto& a = tilted->atoms().entries().front();
    CHECK(a.location == doctest::Approx(3.0));
    CHECK(a.mass == doctest::Approx(std::exp(1.5)));
    CHECK(a.allocation[0] == doctest::Approx(2.0 * std::exp(1.5)));
}

TEST_CASE("numerical_aggregate_derivative") {
    const auto m = build_independent({exponential_marginal(1.0)});
    CHECK(std::abs(numerical_aggregate_derivative(*m, 1.0, 1e-5) + 0.25) <= 1e-8);

    const auto c = build_independent({point_mass_marginal(1.5)});
    for (double t : {0.2, 1.0, 3.0}) {
        CHECK(numerical_aggregate_derivative(*c, t, 1e-6) == doctest::Approx(-1.5 * std::exp(-1.5 * t)).epsilon(1e-8));
    }

    const auto cscp = build_common_shock_cp(reference_cscp());
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) sum += eval_allocation(*cscp, i, 1.0);
    CHECK(std::abs(numerical_aggregate_derivative(*cscp, 1.0, 1e-6) + sum) <= 1e-6 * sum);
}

TEST_CASE("diagonal_diagnostic: closed forms pass, injected fault is flagged") {
    const std::vector<double> t{0.1, 1.0, 10.0};
    for (const auto& model : {cmrs::test::example3_model(2.0, 1.0), build_common_shock_cp(reference_cscp()),
                              build_mixed_exp_frailty({{1.0, 2.0}, gamma_mixing(2.0)})}) {
        for (const auto& c : diagonal_diagnostic(*model, t, 1e-6)) CHECK(c.residual <= 1e-6);
    }
    const auto one = build_independent({exponential_marginal(1.0)});
    const std::vector<double> t2{2.0};
    CHECK(diagonal_diagnostic(*one, t2, 1e-8).front().residual <= 1e-8);

    const auto broken = std::make_shared<cmrs::test::ScaledAllocationModel>(cmrs::test::example3_model(2.0, 1.0), 1, 1.01);
    for (const auto& c : diagonal_diagnostic(*broken, t, 1e-5)) {
        CHECK_FALSE(c.passed);
        CHECK(c.residual > 1e-5);
    }
}

TEST_CASE("invariant battery: closed-form families") {
    cmrs::test::check_transform_invariants(cmrs::test::example3_model(2.0, 1.0));
    cmrs::test::check_transform_invariants(build_common_shock_cp(reference_cscp()));
    cmrs::test::check_transform_invariants(build_independent({exponential_marginal(0.5), exponential_marginal(3.0)}));
}

TEST_CASE("AtomSet rejects unbalanced atoms") {
    CHECK_THROWS_AS(AtomSet({{1.0, 0.5, {0.1, 0.1}}}, 2), DomainError);
    const AtomSet ok({{1.0, 0.5, {0.2, 0.3}}}, 2);
    CHECK(ok.total_mass() == doctest::Approx(0.5));
    CHECK(ok.aggregate_part(Complex(1.0, 0.0)).real() == doctest::Approx(0.5 * std::exp(-1.0)));
}
