#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "steinkit/errors.hpp"
#include "steinkit/operators.hpp"

#include "test_helpers.hpp"

#include <cmath>

using namespace steinkit;
using namespace steinkit::testing;

TEST_CASE("canonical operator has zero mean over the class bank") {
    for (auto& [name, sp] : builtin_pairs()) {
        CAPTURE(name);
        SteinPair p = sp;
        for (auto& f : class_bank(p.density)) {
            const double r =
                expect(p.density, [&](double x) { return canonical_apply(p, f, x); });
            CHECK(std::fabs(r) < 1e-8);
        }
    }
}

TEST_CASE("inverse operator is a right inverse on centered data") {
    for (auto& [name, sp] : builtin_pairs()) {
        CAPTURE(name);
        SteinPair p = sp;
        RealFn h = [](double x) { return std::sin(x) + 0.3 * x; };
        const double eh = expect(p.density, h);
        RealFn prod = inverse_operator(p, h, true);
        for (int i = 1; i <= 9; ++i) {
            const double x = p.density.quantile(i / 10.0);
            CHECK(canonical_apply(p, prod, x) ==
                  doctest::Approx(h(x) - eh).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("inverse rejects uncentered data unless asked to center") {
    SteinPair g = make_stein_pair(make_gaussian(0.0, 1.0));
    CHECK_THROWS_AS(inverse_apply(g, [](double) { return 1.0; }, 0.5),
                    IncompatibilityError);
    CHECK(inverse_apply(g, [](double) { return 1.0; }, 0.5, true) ==
          doctest::Approx(0.0));
}

TEST_CASE("score functions match closed forms") {
    SteinPair g = make_stein_pair(make_gaussian(1.0, 2.0));
    ScoreResult sg = score(g);
    for (double x : {-1.0, 0.0, 2.5})
        CHECK(sg.u(x) == doctest::Approx(-(x - 1.0) / 2.0).epsilon(1e-8));
    CHECK(sg.const_in_class);

    SteinPair t = make_stein_pair(make_student(5.0));
    ScoreResult st = score(t);
    for (double x : {-2.0, 0.5, 3.0})
        CHECK(st.u(x) == doctest::Approx(-6.0 * x / (5.0 + x * x)).epsilon(1e-8));

    // exponential: constant f = 1 is not in the class (boundary mass)
    SteinPair e = make_stein_pair(make_exponential(1.0));
    CHECK_FALSE(score(e).const_in_class);
}

TEST_CASE("kernels match closed forms on probe grids") {
    auto probe = [](const SteinPair& sp, const RealFn& closed, double tol) {
        RealFn tau = stein_kernel(sp);
        for (int i = 1; i <= 19; ++i) {
            const double x = sp.density.quantile(i / 20.0);
            CHECK(tau(x) == doctest::Approx(closed(x)).epsilon(tol));
        }
    };
    probe(make_stein_pair(make_gaussian(0.0, 2.0)),
          [](double) { return 2.0; }, 1e-8);
    probe(make_stein_pair(make_beta(2.0, 3.0)),
          [](double x) { return x * (1.0 - x) / 5.0; }, 1e-8);
    probe(make_stein_pair(make_student(5.0)),
          [](double x) { return (x * x + 5.0) / 4.0; }, 1e-8);
    probe(make_stein_pair(make_gamma(2.5, 1.5)),
          [](double x) { return 1.5 * x; }, 1e-8);
    probe(make_stein_pair(make_poisson(3.0)), [](double x) { return x; },
          1e-10);
    probe(make_stein_pair(make_binomial(10, 0.3)),
          [](double x) { return 0.7 * x; }, 1e-10);
}

TEST_CASE("kernel defining identity and moments") {
    for (auto& [name, sp] : builtin_pairs()) {
        CAPTURE(name);
        SteinPair p = sp;
        const double m = p.density.mean();
        const double var = p.density.variance();
        RealFn tau = stein_kernel(p);
        CHECK(expect(p.density, tau) == doctest::Approx(var).epsilon(1e-8));
        RealFn g = [](double x) { return std::sin(x) + x / (1.0 + x * x); };
        const double lhs =
            expect(p.density, [&](double x) { return (x - m) * g(x); });
        const double rhs = expect(
            p.density, [&](double x) { return tau(x) * pair_diff(p, g, x); });
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7).scale(1.0));
        for (int i = 1; i <= 19; ++i)
            CHECK(tau(p.density.quantile(i / 20.0)) >= -1e-10);
    }
}

TEST_CASE("product rule residual vanishes for every operator kind") {
    RealFn f = [](double x) { return std::sin(x); };
    RealFn df = [](double x) { return std::cos(x); };
    RealFn g = [](double x) { return x * x; };
    RealFn dg = [](double x) { return 2.0 * x; };
    for (OperatorSpec op :
         {OperatorSpec{OpKind::Derivative, 1.0, false},
          OperatorSpec{OpKind::ForwardDifference, 1.0, false},
          OperatorSpec{OpKind::ForwardDifference, 0.5, true},
          OperatorSpec{OpKind::BackwardDifference, 1.0, false},
          OperatorSpec{OpKind::SpanDifference, 2.0, false}}) {
        for (double x : {-1.5, 0.25, 2.0})
            CHECK(std::fabs(product_rule_residual(op, f, df, g, dg, x)) <
                  1e-10);
    }
}

TEST_CASE("standardized one-function operators have zero mean") {
    SteinPair g = make_stein_pair(make_gaussian(0.0, 1.0));
    auto A = standardize_fixed_f(g, [](double) { return 1.0; });
    RealFn gfun = [](double x) { return std::sin(2.0 * x); };
    CHECK(std::fabs(expect(g.density, A(gfun))) < 1e-9);

    // with f = identity on the Poisson lattice, A g(x) = lambda g(x+1) - x g(x)
    SteinPair p = make_stein_pair(make_poisson(2.5));
    auto Ap = standardize_fixed_f(p, [](double x) { return x; });
    RealFn gg = [](double x) { return 1.0 / (1.0 + x); };
    RealFn applied = Ap(gg);
    for (double x : {0.0, 1.0, 4.0})
        CHECK(applied(x) ==
              doctest::Approx(2.5 * gg(x + 1.0) - x * gg(x)).epsilon(1e-10));
    CHECK(std::fabs(expect(p.density, applied)) < 1e-9);
}

TEST_CASE("quadratic kernel detection") {
    auto gauss = pearson_kernel_check(make_gaussian(0.0, 2.0));
    REQUIRE(gauss.has_value());
    CHECK((*gauss)[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::fabs((*gauss)[1]) < 1e-6);
    CHECK(std::fabs((*gauss)[2]) < 1e-6);

    auto beta = pearson_kernel_check(make_beta(2.0, 3.0));
    REQUIRE(beta.has_value());
    CHECK((*beta)[1] == doctest::Approx(0.2).epsilon(1e-6));
    CHECK((*beta)[2] == doctest::Approx(-0.2).epsilon(1e-6));

    // Gumbel's kernel is not a quadratic
    CHECK_FALSE(pearson_kernel_check(make_gumbel()).has_value());
}

TEST_CASE("birth-death operator on exponential-family weights") {
    GibbsOperator go = gibbs_operator([](double) { return 0.0; }, 2.5,
                                      kInfIndex);
    // flat potential: the chain is Poisson(2.5) and the kernel is constant
    for (double x : {0.0, 1.0, 3.0, 7.0})
        CHECK(go.kernel(x) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(go.birth_rate(2.0) == doctest::Approx(2.5));
    RealFn g = [](double x) { return std::cos(x); };
    CHECK(std::fabs(expect(go.pair.density, go.apply(g))) < 1e-9);
}

TEST_CASE("diffusion standardization recovers the classical operator") {
    DensityModel g = make_gaussian(0.0, 1.0);
    auto A = diffusion_operator(g, [](double x) { return -x; });
    RealFn gg = [](double x) { return std::sin(x); };
    RealFn applied = A(gg);
    for (double x : {-1.0, 0.5, 2.0})
        CHECK(applied(x) ==
              doctest::Approx(std::cos(x) - x * std::sin(x)).epsilon(1e-5));
    CHECK(std::fabs(expect(g, applied)) < 1e-8);
    // gamma must be centered
    CHECK_THROWS_AS(diffusion_operator(g, [](double x) { return x + 1.0; }),
                    IncompatibilityError);
}

TEST_CASE("zero-bias transform") {
    // centered two-point law -> uniform density on (-1, 1)
    DensityModel r = make_rademacher();
    DensityModel rb = zero_bias_density(r);
    CHECK(rb.kind() == DensityKind::Continuous);
    CHECK(rb.pdf(0.3) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rb.pdf(-0.9) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rb.pdf(1.5) == 0.0);

    // the Gaussian is its own zero-bias law
    DensityModel g = make_gaussian(0.0, 2.0);
    DensityModel gb = zero_bias_density(g);
    for (double x : {-2.0, 0.0, 1.0})
        CHECK(gb.pdf(x) == doctest::Approx(g.pdf(x)).epsilon(1e-8));

    CHECK_THROWS_AS(zero_bias_density(make_exponential(1.0)),
                    IncompatibilityError); // not centered
}

TEST_CASE("class membership verdicts") {
    SteinPair g = make_stein_pair(make_gaussian(0.0, 1.0));
    CHECK(check_in_class(g, [](double) { return 1.0; }).in_class);
    CHECK(check_in_class(g, [](double x) { return x * x; }).in_class);
    // f p does not vanish: e^{x^2/2} * p is constant
    CHECK_FALSE(
        check_in_class(g, [](double x) { return std::exp(x * x / 2.0); })
            .in_class);

    SteinPair e = make_stein_pair(make_exponential(1.0));
    CHECK_FALSE(check_in_class(e, [](double) { return 1.0; }).in_class);
    CHECK(check_in_class(e, [](double x) { return x; }).in_class);
}
