// Acceptance gate: ten end-to-end criteria, one PASS/FAIL line each.
#include "steinkit/casestudies.hpp"
#include "steinkit/compare.hpp"
#include "steinkit/errors.hpp"
#include "steinkit/oracle.hpp"
#include "steinkit/solve.hpp"

#include "test_helpers.hpp"

#include <cmath>
#include <cstdio>
#include <string>

using namespace steinkit;
using namespace steinkit::testing;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
    std::printf("%s %2d: %-38s %s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                detail.c_str());
    if (!ok) ++failures;
}

std::string num(double v) {
    char b[64];
    std::snprintf(b, sizeof(b), "%.10g", v);
    return b;
}

// 1. uniform-maximum bound values at eps = 0, 1, 0.138 (+-2e-6)
void criterion1() {
    const double want[3] = {0.00497143, 0.00852033, 0.00488718};
    const double eps[3] = {0.0, 1.0, 0.138};
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double b =
            exp_max_uniform_study(100, 0.5, eps[i]).points[0].report.bound;
        worst = std::max(worst, std::fabs(b - want[i]));
        ok = ok && std::fabs(b - want[i]) < 2e-6;
    }
    report(1, "uniform-max reference values", ok, "max dev " + num(worst));
}

// 2. scaled Pareto maxima: closed form within 1e-9, oracle below the bound
void criterion2() {
    bool ok = true;
    double worst = 0.0;
    for (std::int64_t n : {5, 10, 50, 100}) {
        for (double a : {1.0, 2.0}) {
            StudyResult r = frechet_study(n, a);
            const double nn = double(n);
            const double closed =
                2.0 * std::pow(1.0 - 1.0 / nn, nn - 1.0) / nn;
            const double dev = std::fabs(
                r.points[0].report.components.at("abs_expectation") - closed);
            worst = std::max(worst, dev);
            ok = ok && dev < 1e-9;
            ok = ok && *r.points[0].report.oracle <=
                           2.0 * std::exp(-1.0) / (nn - 1.0);
        }
    }
    report(2, "extreme-value maxima study", ok, "max dev " + num(worst));
}

// 3. exponential maxima vs Gumbel
void criterion3() {
    bool ok = true;
    double worst = 0.0;
    for (std::int64_t n : {2, 10, 100}) {
        StudyResult r = gumbel_study(n);
        ok = ok && *r.points[0].report.oracle <= 1.0 / double(n + 1);
        const double mdev =
            std::fabs(r.reference_values.at("exp_moment") - 1.0);
        ok = ok && mdev < 1e-9;
        const double ires = r.reference_values.at("inverse_residual");
        ok = ok && ires < 1e-7;
        worst = std::max(worst, std::max(mdev, ires));
    }
    report(3, "Gumbel approximation study", ok, "max residual " + num(worst));
}

// 4. Student-t vs Gaussian
void criterion4() {
    bool ok = true;
    double worst = 0.0;
    for (double nu : {3.0, 5.0, 10.0, 50.0}) {
        DensityModel t = make_student(nu);
        const double gap = expect(t, [nu](double x) {
            return std::fabs((x * x + nu) / (nu - 1.0) - 1.0);
        });
        const double dev = std::fabs(gap - 2.0 / (nu - 2.0));
        worst = std::max(worst, dev);
        ok = ok && dev < 1e-8;
        const double tv = tv_distance(make_gaussian(0.0, 1.0), t).value;
        ok = ok && tv <= 4.0 / (nu - 2.0);
    }
    report(4, "Student-t comparison", ok, "max dev " + num(worst));
}

// 5. Gaussian-Gaussian sweep: soundness + sharper-bound criterion
void criterion5() {
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double s1 = 0.5 + 2.5 * i / 9.0;
            const double s2 = 0.5 + 2.5 * j / 9.0;
            StudyResult r = gauss_gauss_study(s1, s2);
            const StudyPoint& pt = r.points[0];
            const double slack = *pt.report.oracle - pt.report.bound;
            worst = std::max(worst, slack);
            ok = ok && slack <= 1e-8;
            if (i != j) {
                const bool score_sharper =
                    pt.report.components.at("score_sharper") == 1.0;
                const bool ratio_below_2 =
                    std::max(s1, s2) / std::min(s1, s2) < 2.0;
                ok = ok && (score_sharper == ratio_below_2);
            }
        }
    }
    report(5, "Gaussian-Gaussian sweep", ok, "worst oracle-bound " + num(worst));
}

// 6. standardized two-point CLT
void criterion6() {
    bool ok = true;
    double worst = 0.0;
    for (std::int64_t n : {4, 8, 16, 32, 64}) {
        StudyResult r = rademacher_clt_study(n);
        const double a = 1.0 / std::sqrt(double(n));
        const double s = r.reference_values.at("kernel_sd");
        ok = ok && std::fabs(s - 0.5 * a) < 1e-12;
        ok = ok && s <= 0.5 * a + 1e-12;
        ok = ok && *r.points[0].report.oracle <= r.points[0].report.bound;
        ok = ok && r.points[0].report.bound <= 3.0 * a + 1e-12;
        worst = std::max(worst, std::fabs(s - 0.5 * a));
    }
    report(6, "two-point CLT study", ok, "max kernel-sd dev " + num(worst));
}

// 7. Bernoulli sums vs binomial, 20 random vectors
void criterion7() {
    Lcg rng(20240818);
    bool ok = true;
    double worst = -1.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.next() % 9; // 2..10
        std::vector<double> ps(n);
        for (double& p : ps) p = rng.uniform(0.05, 0.95);
        StudyResult r = poisson_binomial_study(ps);
        const double tv = *r.points[0].report.oracle;
        const double e1 =
            r.points[0].report.components.at("bound_difference_form");
        const double e2 =
            r.points[0].report.components.at("bound_supnorm_form");
        ok = ok && tv <= e1 + 1e-12 && tv <= e2 + 1e-12;
        worst = std::max(worst, tv - std::min(e1, e2));
    }
    report(7, "Bernoulli-sum sweep", ok, "worst oracle-bound " + num(worst));
}

// 8. operator invariant property suite
void criterion8() {
    bool ok = true;
    double worst = 0.0;
    for (auto& [name, sp] : builtin_pairs()) {
        SteinPair p = sp;
        for (auto& f : class_bank(p.density)) {
            const double r = std::fabs(expect(
                p.density, [&](double x) { return canonical_apply(p, f, x); }));
            worst = std::max(worst, r);
            ok = ok && r < 1e-8;
        }
        const double m = p.density.mean();
        const double var = p.density.variance();
        RealFn tau = stein_kernel(p);
        const double mres = std::fabs(expect(p.density, tau) - var);
        ok = ok && mres < 1e-8 * (1.0 + var);
        worst = std::max(worst, mres);
        RealFn g = [](double x) { return std::sin(x) + x / (1.0 + x * x); };
        const double lhs =
            expect(p.density, [&](double x) { return (x - m) * g(x); });
        const double rhs = expect(
            p.density, [&](double x) { return tau(x) * pair_diff(p, g, x); });
        const double ires = std::fabs(lhs - rhs);
        ok = ok && ires < 1e-8;
        worst = std::max(worst, ires);
        for (int i = 1; i <= 19; ++i)
            ok = ok && tau(p.density.quantile(i / 20.0)) >= -1e-10;
    }
    RealFn f = [](double x) { return std::sin(x); };
    RealFn df = [](double x) { return std::cos(x); };
    RealFn g2 = [](double x) { return x * x; };
    RealFn dg2 = [](double x) { return 2.0 * x; };
    for (OperatorSpec op :
         {OperatorSpec{OpKind::Derivative, 1.0, false},
          OperatorSpec{OpKind::ForwardDifference, 1.0, true},
          OperatorSpec{OpKind::BackwardDifference, 0.5, true},
          OperatorSpec{OpKind::SpanDifference, 2.0, false}}) {
        for (double x : {-1.5, 0.25, 2.0}) {
            const double r =
                std::fabs(product_rule_residual(op, f, df, g2, dg2, x));
            ok = ok && r < 1e-10;
            worst = std::max(worst, r);
        }
    }
    report(8, "operator invariants", ok, "worst residual " + num(worst));
}

// 9. kernel table vs closed forms (the Gamma convention is logged)
void criterion9() {
    struct Row {
        SteinPair sp;
        RealFn closed;
    };
    const double nu = 7.0;
    std::vector<Row> rows;
    rows.push_back({make_stein_pair(make_gaussian(0.0, 2.0)),
                    [](double) { return 2.0; }});
    rows.push_back({make_stein_pair(make_beta(2.0, 3.0)),
                    [](double x) { return x * (1.0 - x) / 5.0; }});
    rows.push_back({make_stein_pair(make_student(nu)),
                    [nu](double x) { return (x * x + nu) / (nu - 1.0); }});
    rows.push_back(
        {make_stein_pair(make_poisson(3.0)), [](double x) { return x; }});
    rows.push_back({make_stein_pair(make_binomial(10, 0.3)),
                    [](double x) { return 0.7 * x; }});
    bool ok = true;
    double worst = 0.0;
    for (Row& r : rows) {
        RealFn tau = stein_kernel(r.sp);
        for (int i = 1; i <= 19; ++i) {
            const double x = r.sp.density.quantile(i / 20.0);
            const double dev = std::fabs(tau(x) - r.closed(x));
            worst = std::max(worst, dev / (1.0 + std::fabs(r.closed(x))));
            ok = ok && dev < 1e-8 * (1.0 + std::fabs(r.closed(x)));
        }
    }
    // Gamma(alpha, scale beta): the defining identity selects beta * x
    SteinPair ga = make_stein_pair(make_gamma(2.5, 1.5));
    RealFn gt = stein_kernel(ga);
    double gdev = 0.0, alt = 0.0;
    for (int i = 1; i <= 19; ++i) {
        const double x = ga.density.quantile(i / 20.0);
        gdev = std::max(gdev, std::fabs(gt(x) - 1.5 * x));
        alt = std::max(alt, std::fabs(gt(x) - x / 1.5));
    }
    ok = ok && gdev < 1e-8 * 10.0;
    std::printf("  note: Gamma(2.5, scale 1.5) kernel is beta*x "
                "(max dev %.3g); the reciprocal convention x/beta deviates "
                "by %.3g and fails the defining identity - logged, not "
                "asserted\n",
                gdev, alt);
    report(9, "kernel reference table", ok, "worst rel dev " + num(worst));
}

// 10. characterization positive-definiteness
void criterion10() {
    Lcg rng(987654321);
    bool ok = true;
    double at_truth = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 3 + int(rng.next() % 7);
        std::vector<double> pmf(m);
        double z = 0.0;
        for (double& p : pmf) { p = 0.05 + rng.uniform(); z += p; }
        for (double& p : pmf) p /= z;
        DensityModel target = make_table(0.0, 1.0, pmf);
        SteinPair sp = make_stein_pair(target);

        const bool perturb = trial % 2 == 1;
        std::vector<double> q = pmf;
        if (perturb) {
            const int i = int(rng.next() % m);
            int j = int(rng.next() % m);
            if (j == i) j = (i + 1) % m;
            const double eps = 0.02 * (0.5 + rng.uniform());
            if (q[j] - eps <= 0.0) continue;
            q[i] += eps;
            q[j] -= eps;
        }
        const double r = characterization_check(sp, make_table(0.0, 1.0, q));
        if (perturb) ok = ok && r > 1e-10;
        else {
            ok = ok && r < 1e-10;
            at_truth = std::max(at_truth, r);
        }
    }
    report(10, "characterization check", ok,
           "residual at truth " + num(at_truth));
}

} // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7();
        criterion8();
        criterion9();
        criterion10();
    } catch (const SteinkitError& e) {
        std::printf("FAIL: unexpected error: %s\n", e.what());
        return 1;
    }
    if (failures) {
        std::printf("%d criteria FAILED\n", failures);
        return 1;
    }
    std::printf("all 10 acceptance criteria passed\n");
    return 0;
}
