// steinkit command-line front end: density specs in, CSV tables and JSON
// reports out. Exit codes: 0 ok, 2 parse error, 3 incompatible inputs,
// 4 budget exceeded, 5 internal soundness failure.
#include "CLI11.hpp"
#include "json.hpp"

#include "steinkit/casestudies.hpp"
#include "steinkit/compare.hpp"
#include "steinkit/errors.hpp"
#include "steinkit/oracle.hpp"
#include "steinkit/solve.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using nlohmann::json;
using namespace steinkit;

namespace {

constexpr int kSchemaVersion = 1;

double default_tol() {
    if (const char* env = std::getenv("STEINKIT_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || v <= 0.0)
            throw ParseError("STEINKIT_TOL must be a positive number");
        return v;
    }
    return 1e-8;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("bad number in list: '" + item + "'");
        }
    }
    if (out.empty()) throw ParseError("empty list");
    return out;
}

// "name", "name:k=v,k=v", "@file.json", or inline JSON
DensityModel parse_density_spec(const std::string& spec,
                                const std::vector<std::string>& extra_params) {
    if (!spec.empty() && spec[0] == '@') {
        std::ifstream in(spec.substr(1));
        if (!in) throw ParseError("cannot open density file: " + spec.substr(1));
        std::stringstream ss;
        ss << in.rdbuf();
        return density_from_json(ss.str());
    }
    if (!spec.empty() && spec[0] == '{') return density_from_json(spec);

    std::string name = spec;
    json params = json::object();
    const std::size_t colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        std::stringstream ss(spec.substr(colon + 1));
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            const std::size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected k=v in density spec: '" + kv + "'");
            params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
    }
    for (const std::string& kv : extra_params) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected k=v in --param: '" + kv + "'");
        params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    json j = {{"family", name}, {"params", params}};
    return density_from_json(j.dump());
}

OperatorSpec parse_op(const std::string& op, double spacing, bool scaled,
                      const DensityModel& d) {
    OperatorSpec s;
    s.spacing = spacing;
    s.scale_by_spacing = scaled;
    if (op == "auto") {
        s.kind = d.kind() == DensityKind::Lattice ? OpKind::ForwardDifference
                                                  : OpKind::Derivative;
        if (d.kind() == DensityKind::Lattice) s.spacing = d.lattice().spacing;
    } else if (op == "derivative") {
        s.kind = OpKind::Derivative;
    } else if (op == "forward") {
        s.kind = OpKind::ForwardDifference;
    } else if (op == "backward") {
        s.kind = OpKind::BackwardDifference;
    } else if (op == "span") {
        s.kind = OpKind::SpanDifference;
    } else {
        throw ParseError("unknown operator kind: " + op);
    }
    return s;
}

std::vector<double> make_grid(const std::string& grid, const DensityModel& d) {
    if (!grid.empty()) {
        // "a:b:step"
        std::vector<double> parts;
        std::stringstream ss(grid);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
        if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0])
            throw ParseError("grid must be a:b:step with step > 0");
        std::vector<double> xs;
        for (double x = parts[0]; x <= parts[1] + 1e-12 * parts[2];
             x += parts[2])
            xs.push_back(x);
        return xs;
    }
    std::vector<double> xs;
    if (d.kind() == DensityKind::Lattice) {
        const LatticeSpec& ls = d.lattice();
        double mass = 0.0;
        for (std::int64_t k = ls.k_lo;; ++k) {
            if (!ls.infinite() && k > ls.k_hi) break;
            xs.push_back(ls.point(k));
            mass += d.pmf_by_index(k);
            if (ls.infinite() && mass > 1.0 - 1e-10) break;
        }
    } else {
        for (int i = 1; i <= 99; ++i) xs.push_back(d.quantile(i / 100.0));
    }
    return xs;
}

json report_json(const BoundReport& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["bound"] = r.bound;
    j["metric"] = r.metric;
    j["method"] = r.method;
    j["components"] = r.components;
    if (r.oracle) j["oracle_distance"] = *r.oracle;
    if (r.slack) j["slack"] = *r.slack;
    return j;
}

// ---- verify suites ---------------------------------------------------------

struct SuiteOutcome {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    void absorb(double residual, double tol) {
        worst = std::max(worst, residual);
        if (residual > tol) pass = false;
    }
};

std::vector<std::pair<std::string, SteinPair>> builtin_pairs() {
    std::vector<std::pair<std::string, SteinPair>> v;
    v.emplace_back("gaussian(0,1)", make_stein_pair(make_gaussian(0.0, 1.0)));
    v.emplace_back("gaussian(1,2)", make_stein_pair(make_gaussian(1.0, 2.0)));
    v.emplace_back("exponential(1)", make_stein_pair(make_exponential(1.0)));
    v.emplace_back("gamma(2.5,1.5)", make_stein_pair(make_gamma(2.5, 1.5)));
    v.emplace_back("beta(2,3)", make_stein_pair(make_beta(2.0, 3.0)));
    v.emplace_back("student(5)", make_stein_pair(make_student(5.0)));
    v.emplace_back("gumbel", make_stein_pair(make_gumbel()));
    v.emplace_back("poisson(3)", make_stein_pair(make_poisson(3.0)));
    v.emplace_back("binomial(10,0.3)",
                   make_stein_pair(make_binomial(10, 0.3)));
    v.emplace_back("rademacher",
                   make_stein_pair(make_rademacher(),
                                   {OpKind::ForwardDifference, 2.0, true}));
    return v;
}

// 20 functions in the Stein class of d: boundary factors force f p -> 0 at
// finite endpoints, Gaussian/exponential weights handle infinite tails.
std::vector<RealFn> class_bank(const DensityModel& d) {
    std::vector<RealFn> base = {
        [](double x) { return 1.0; },
        [](double x) { return x; },
        [](double x) { return x * x; },
        [](double x) { return std::sin(x); },
        [](double x) { return std::cos(x); },
        [](double x) { return std::sin(2.0 * x); },
        [](double x) { return std::cos(3.0 * x); },
        [](double x) { return 1.0 / (1.0 + x * x); },
        [](double x) { return x / (1.0 + x * x); },
        [](double x) { return std::tanh(x); },
        [](double x) { return std::exp(-std::fabs(x)); },
        [](double x) { return std::exp(-x * x); },
        [](double x) { return std::sin(x) * std::cos(x); },
        [](double x) { return 1.0 / (2.0 + std::sin(x)); },
        [](double x) { return x * std::exp(-x * x / 8.0); },
        [](double x) { return std::cos(x / 2.0); },
        [](double x) { return 1.0 / (1.0 + std::fabs(x)); },
        [](double x) { return std::sin(x * x / (1.0 + std::fabs(x))); },
        [](double x) { return 0.5 + std::atan(x) / 3.14159265358979323846; },
        [](double x) { return std::exp(-x * x / 2.0) * (1.0 + x); },
    };
    const double a = d.support().lower, b = d.support().upper;
    RealFn weight;
    if (d.kind() == DensityKind::Lattice) {
        const double lo = d.lattice().point(d.lattice().k_lo);
        weight = [lo](double x) { return (x - lo) / (1.0 + (x - lo)); };
    } else if (std::isfinite(a) && std::isfinite(b)) {
        weight = [a, b](double x) { return (x - a) * (b - x); };
    } else if (std::isfinite(a)) {
        weight = [a](double x) { return (x - a) * std::exp(-(x - a)); };
    } else if (std::isfinite(b)) {
        weight = [b](double x) { return (b - x) * std::exp(-(b - x)); };
    } else {
        weight = [](double x) { return std::exp(-x * x / 4.0); };
    }
    std::vector<RealFn> out;
    for (auto& f : base)
        out.push_back([f, weight](double x) { return f(x) * weight(x); });
    return out;
}

SuiteOutcome suite_operators(double tol) {
    SuiteOutcome s{"operators"};
    for (auto& [name, sp] : builtin_pairs()) {
        SteinPair p = sp;
        for (auto& f : class_bank(p.density)) {
            const double r = std::fabs(
                expect(p.density, [&](double x) { return canonical_apply(p, f, x); }));
            s.absorb(r, tol);
        }
    }
    return s;
}

SuiteOutcome suite_kernels(double tol) {
    SuiteOutcome s{"kernels"};
    for (auto& [name, sp] : builtin_pairs()) {
        SteinPair p = sp;
        const double m = p.density.mean();
        const double var = p.density.variance();
        RealFn tau = stein_kernel(p);
        s.absorb(std::fabs(expect(p.density, tau) - var), tol * (1.0 + var));
        int gi = 0;
        for (auto& g : class_bank(p.density)) {
            if (++gi > 8) break;
            const double lhs =
                expect(p.density, [&](double x) { return (x - m) * g(x); });
            const double rhs = expect(p.density, [&](double x) {
                return tau(x) * pair_diff(p, g, x);
            });
            const double scale =
                p.density.kind() == DensityKind::Lattice ? tol : 1e-6;
            s.absorb(std::fabs(lhs - rhs), std::max(tol, scale));
        }
        // tau >= 0 on a probe grid
        for (int i = 1; i <= 19; ++i)
            s.absorb(std::max(0.0, -tau(p.density.quantile(i / 20.0))), tol);
    }
    return s;
}

SuiteOutcome suite_solutions(double tol) {
    SuiteOutcome s{"solutions"};
    const double t = std::max(tol, 1e-6);
    for (auto& [name, sp] : builtin_pairs()) {
        SteinPair p = sp;
        const double z = p.density.quantile(0.35);
        RealFn prod = [p, z](double x) {
            return inverse_interval_indicator(p, -kInf, z, x);
        };
        const double eh = cdf_of(p.density, z);
        for (int i = 1; i <= 9; ++i) {
            const double x = p.density.quantile(i / 10.0);
            if (p.density.kind() == DensityKind::Continuous &&
                std::fabs(x - z) < 1e-3)
                continue; // numeric differentiation straddles the kink
            const double applied = canonical_apply(p, prod, x);
            const double want = (x <= z ? 1.0 : 0.0) - eh;
            s.absorb(std::fabs(applied - want), t);
        }
    }
    return s;
}

SuiteOutcome suite_bounds(double tol) {
    SuiteOutcome s{"bounds"};
    auto check = [&](const StudyResult& r) {
        for (const StudyPoint& pt : r.points)
            s.absorb(std::max(0.0, *pt.report.oracle - pt.report.bound), tol);
    };
    for (double s1 : {0.5, 1.0, 1.75, 3.0})
        for (double s2 : {0.5, 1.0, 1.75, 3.0})
            if (s1 != s2) check(gauss_gauss_study(s1, s2));
    for (double nu : {3.0, 5.0, 10.0, 50.0}) check(student_gauss_study(nu));
    for (std::int64_t n : {2, 10, 100}) check(gumbel_study(n));
    for (std::int64_t n : {5, 10, 50, 100})
        for (double a : {1.0, 2.0}) check(frechet_study(n, a));
    for (std::int64_t n : {4, 16, 64}) check(rademacher_clt_study(n));
    check(poisson_binomial_study({0.1, 0.2, 0.3}));
    check(poisson_binomial_study({0.4, 0.4, 0.5, 0.6, 0.25}));
    check(exp_max_uniform_study(100, 0.5, 0.138));
    return s;
}

SuiteOutcome suite_oracles(double tol) {
    SuiteOutcome s{"oracles"};
    using Fn = DistanceResult (*)(const DensityModel&, const DensityModel&);
    const Fn metrics[] = {tv_distance, kolmogorov_distance,
                          wasserstein_distance};
    std::vector<DensityModel> cont = {make_gaussian(0.0, 1.0),
                                      make_gaussian(0.0, 4.0),
                                      make_gaussian(1.0, 1.0)};
    std::vector<DensityModel> latt = {make_binomial(6, 0.3),
                                      make_binomial(6, 0.5),
                                      make_poisson(2.0)};
    for (const auto& tri : {cont, latt}) {
        for (Fn m : metrics) {
            for (const DensityModel& d : tri)
                s.absorb(m(d, d).value, tol);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = i + 1; j < 3; ++j) {
                    DistanceResult ab = m(tri[i], tri[j]);
                    DistanceResult ba = m(tri[j], tri[i]);
                    s.absorb(std::fabs(ab.value - ba.value),
                             tol + ab.error_estimate + ba.error_estimate);
                }
            DistanceResult ab = m(tri[0], tri[1]);
            DistanceResult bc = m(tri[1], tri[2]);
            DistanceResult ac = m(tri[0], tri[2]);
            const double err = 2.0 * (ab.error_estimate + bc.error_estimate +
                                      ac.error_estimate);
            s.absorb(std::max(0.0, ac.value - ab.value - bc.value - err), tol);
        }
    }
    return s;
}

// ---- subcommand bodies ------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"Stein operator toolkit"};
    app.require_subcommand(1);

    // shared density flags
    std::string dist, grid, op_kind = "auto";
    std::vector<std::string> params;
    std::string pmf, h_expr, fixed_f_expr, fixed_g_expr;
    double origin = 0.0, spacing = 1.0;
    bool scaled = false;

    auto add_density_flags = [&](CLI::App* c) {
        c->add_option("--dist", dist, "density spec: name[:k=v,...], @file, or JSON")
            ->required();
        c->add_option("--param", params, "extra k=v density parameters");
        c->add_option("--grid", grid, "evaluation grid a:b:step");
        c->add_option("--op", op_kind,
                      "operator: auto|derivative|forward|backward|span");
        c->add_option("--spacing", spacing, "difference spacing");
        c->add_flag("--scaled", scaled, "divide differences by the spacing");
        c->add_option("--pmf", pmf, "table pmf, comma separated");
        c->add_option("--origin", origin, "table lattice origin");
    };

    auto build_density = [&]() {
        if (dist == "table") {
            if (pmf.empty()) throw ParseError("table density needs --pmf");
            return make_table(origin, spacing, parse_list(pmf));
        }
        return parse_density_spec(dist, params);
    };

    CLI::App* kernel_cmd = app.add_subcommand("kernel", "Stein kernel table");
    add_density_flags(kernel_cmd);

    CLI::App* score_cmd = app.add_subcommand("score", "score function table");
    add_density_flags(score_cmd);

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "Stein equation solution table");
    add_density_flags(solve_cmd);
    double z1 = -std::numeric_limits<double>::infinity();
    double z2 = std::numeric_limits<double>::infinity();
    bool has_z2 = false;
    solve_cmd->add_option("--datum", h_expr, "datum h(x) as an expression");
    solve_cmd->add_option("--z1", z1, "interval indicator lower edge");
    solve_cmd->add_option("--z2", z2, "interval indicator upper edge")
        ->each([&](const std::string&) { has_z2 = true; });
    solve_cmd->add_option("--fixed-f", fixed_f_expr, "fix f(x), solve for g");
    solve_cmd->add_option("--fixed-g", fixed_g_expr, "fix g(x), solve for f");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "bound a distance between two laws");
    std::string spec_a, spec_b, method = "kernel", metric = "tv", omega_expr;
    compare_cmd->add_option("--a", spec_a, "first density spec")->required();
    compare_cmd->add_option("--b", spec_b, "second density spec")->required();
    compare_cmd->add_option("--method", method, "score | kernel");
    compare_cmd->add_option("--metric", metric, "tv | kolmogorov | wasserstein");
    compare_cmd->add_option("--omega", omega_expr,
                            "comparison datum (kernel method)");

    CLI::App* case_cmd = app.add_subcommand("case", "run a worked case study");
    std::string study, ns = "10", ts = "0.5", epss = "0", alphas = "2",
                sigma1s = "1", sigma2s = "2", nus = "10",
                pvec = "0.1,0.2,0.3", format = "csv";
    int jobs = 1;
    case_cmd->add_option("study", study,
                         "frechet | exp-max-uniform | gumbel | gauss-gauss | "
                         "student-gauss | poisson-binomial | rademacher")
        ->required();
    case_cmd->add_option("--n", ns, "n values, comma separated");
    case_cmd->add_option("--t", ts, "t values (exp-max-uniform)");
    case_cmd->add_option("--eps", epss, "eps values (exp-max-uniform)");
    case_cmd->add_option("--alpha", alphas, "alpha values (frechet)");
    case_cmd->add_option("--sigma1", sigma1s, "sigma1 values (gauss-gauss)");
    case_cmd->add_option("--sigma2", sigma2s, "sigma2 values (gauss-gauss)");
    case_cmd->add_option("--nu", nus, "nu values (student-gauss)");
    case_cmd->add_option("--p", pvec, "success probabilities (poisson-binomial)");
    case_cmd->add_option("--format", format, "csv | json");
    case_cmd->add_option("--jobs", jobs, "worker threads for the sweep");

    CLI::App* verify_cmd = app.add_subcommand("verify", "run invariant suites");
    std::string suite = "all";
    double tol = -1.0; // resolved lazily; STEINKIT_TOL only consulted when used
    verify_cmd->add_option("--suite", suite,
                           "operators | kernels | solutions | bounds | "
                           "oracles | all");
    verify_cmd->add_option("--tol", tol, "residual tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << e.what() << "\n";
        return 2;
    }

    if (*kernel_cmd || *score_cmd) {
        DensityModel d = build_density();
        SteinPair sp = make_stein_pair(d, parse_op(op_kind, spacing, scaled, d));
        ScoreResult sc = score(sp);
        if (*kernel_cmd) {
            RealFn tau = stein_kernel(sp);
            std::cout << "x,tau,score\n";
            for (double x : make_grid(grid, d))
                std::cout << fmt17(x) << ',' << fmt17(tau(x)) << ','
                          << fmt17(sc.u(x)) << '\n';
        } else {
            std::cout << "x,score\n";
            for (double x : make_grid(grid, d))
                std::cout << fmt17(x) << ',' << fmt17(sc.u(x)) << '\n';
        }
        return 0;
    }

    if (*solve_cmd) {
        DensityModel d = build_density();
        SteinPair sp = make_stein_pair(d, parse_op(op_kind, spacing, scaled, d));
        SolveSplit split;
        if (!fixed_f_expr.empty()) {
            ExpressionAst ast = ExpressionAst::parse(fixed_f_expr);
            split.fixed_f = [ast](double x) { return ast.eval(x); };
        }
        if (!fixed_g_expr.empty()) {
            ExpressionAst ast = ExpressionAst::parse(fixed_g_expr);
            split.fixed_g = [ast](double x) { return ast.eval(x); };
        }
        if (!split.fixed_f && !split.fixed_g)
            split.fixed_f = [](double) { return 1.0; };
        SolutionPair sol;
        if (!h_expr.empty()) {
            ExpressionAst ast = ExpressionAst::parse(h_expr);
            sol = solve(sp, [ast](double x) { return ast.eval(x); }, split);
        } else if (has_z2 || std::isfinite(z1)) {
            sol = solve_interval_indicator(sp, z1, z2, split);
        } else {
            throw ParseError("solve needs --h or --z1/--z2");
        }
        std::cout << "x,h,f,g,product\n";
        for (double x : make_grid(grid, d))
            std::cout << fmt17(x) << ',' << fmt17(sol.h(x)) << ','
                      << fmt17(sol.f(x)) << ',' << fmt17(sol.g(x)) << ','
                      << fmt17(sol.product(x)) << '\n';
        return 0;
    }

    if (*compare_cmd) {
        DensityModel da = parse_density_spec(spec_a, {});
        DensityModel db = parse_density_spec(spec_b, {});
        SteinPair sa = make_stein_pair(da);
        SteinPair sb = make_stein_pair(db);
        TestClass cls;
        DistanceResult dist;
        if (metric == "tv") {
            cls.kind = TestKind::TV;
            dist = tv_distance(da, db);
        } else if (metric == "kolmogorov") {
            cls.kind = TestKind::Kolmogorov;
            dist = kolmogorov_distance(da, db);
        } else if (metric == "wasserstein") {
            cls.kind = TestKind::Lipschitz;
            dist = wasserstein_distance(da, db);
        } else {
            throw ParseError("unknown metric: " + metric);
        }
        BoundReport r;
        if (method == "score") {
            r = score_bound(sa, sb, cls);
        } else if (method == "kernel") {
            RealFn omega;
            if (!omega_expr.empty()) {
                ExpressionAst ast = ExpressionAst::parse(omega_expr);
                omega = [ast](double x) { return ast.eval(x); };
            }
            r = kernel_bound(sa, sb, cls, omega);
        } else {
            throw ParseError("unknown method: " + method);
        }
        r.oracle = dist.value;
        r.slack = r.bound - dist.value;
        if (dist.value > r.bound + std::max(default_tol(), dist.error_estimate))
            throw SoundnessError("reference distance " +
                                 std::to_string(dist.value) +
                                 " exceeds the computed bound " +
                                 std::to_string(r.bound));
        std::cout << report_json(r).dump(2) << '\n';
        return 0;
    }

    if (*case_cmd) {
        std::vector<std::function<StudyResult()>> tasks;
        if (study == "frechet") {
            for (double n : parse_list(ns))
                for (double a : parse_list(alphas))
                    tasks.push_back([n, a] {
                        return frechet_study(std::int64_t(n), a);
                    });
        } else if (study == "exp-max-uniform") {
            for (double n : parse_list(ns))
                for (double t : parse_list(ts))
                    for (double e : parse_list(epss))
                        tasks.push_back([n, t, e] {
                            return exp_max_uniform_study(std::int64_t(n), t, e);
                        });
        } else if (study == "gumbel") {
            for (double n : parse_list(ns))
                tasks.push_back([n] { return gumbel_study(std::int64_t(n)); });
        } else if (study == "gauss-gauss") {
            for (double s1 : parse_list(sigma1s))
                for (double s2 : parse_list(sigma2s))
                    tasks.push_back([s1, s2] {
                        return gauss_gauss_study(s1, s2);
                    });
        } else if (study == "student-gauss") {
            for (double nu : parse_list(nus))
                tasks.push_back([nu] { return student_gauss_study(nu); });
        } else if (study == "poisson-binomial") {
            std::vector<double> p = parse_list(pvec);
            tasks.push_back([p] { return poisson_binomial_study(p); });
        } else if (study == "rademacher") {
            for (double n : parse_list(ns))
                tasks.push_back(
                    [n] { return rademacher_clt_study(std::int64_t(n)); });
        } else {
            throw ParseError("unknown study: " + study);
        }

        std::vector<StudyResult> results(tasks.size());
        std::exception_ptr fail;
        std::mutex fail_mx;
        const int nw = std::max(1, jobs);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    results[i] = tasks[i]();
                } catch (...) {
                    std::lock_guard<std::mutex> lk(fail_mx);
                    if (!fail) fail = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
        if (fail) std::rethrow_exception(fail);

        if (format == "json") {
            json out;
            out["schema_version"] = kSchemaVersion;
            out["study"] = study;
            out["results"] = json::array();
            for (const StudyResult& r : results) {
                json jr;
                jr["study"] = r.study;
                jr["reference_values"] = r.reference_values;
                jr["points"] = json::array();
                for (const StudyPoint& pt : r.points) {
                    json jp = report_json(pt.report);
                    jp.erase("schema_version");
                    jp["params"] = pt.params;
                    jr["points"].push_back(jp);
                }
                out["results"].push_back(jr);
            }
            std::cout << out.dump(2) << '\n';
        } else if (format == "csv") {
            // union of parameter names, in first-seen order
            std::vector<std::string> keys;
            for (const StudyResult& r : results)
                for (const StudyPoint& pt : r.points)
                    for (const auto& [k, v] : pt.params)
                        if (std::find(keys.begin(), keys.end(), k) == keys.end())
                            keys.push_back(k);
            std::cout << "study";
            for (const std::string& k : keys) std::cout << ',' << k;
            std::cout << ",metric,bound,oracle,slack\n";
            for (const StudyResult& r : results)
                for (const StudyPoint& pt : r.points) {
                    std::cout << r.study;
                    for (const std::string& k : keys) {
                        auto it = pt.params.find(k);
                        std::cout << ','
                                  << (it == pt.params.end() ? ""
                                                            : fmt17(it->second));
                    }
                    std::cout << ',' << pt.report.metric << ','
                              << fmt17(pt.report.bound) << ','
                              << fmt17(pt.report.oracle.value_or(0.0)) << ','
                              << fmt17(pt.report.slack.value_or(0.0)) << '\n';
                }
        } else {
            throw ParseError("unknown format: " + format);
        }
        return 0;
    }

    if (*verify_cmd) {
        if (tol <= 0.0) tol = default_tol();
        std::vector<SuiteOutcome> outcomes;
        auto want = [&](const char* s) { return suite == "all" || suite == s; };
        if (want("operators")) outcomes.push_back(suite_operators(tol));
        if (want("kernels")) outcomes.push_back(suite_kernels(tol));
        if (want("solutions")) outcomes.push_back(suite_solutions(tol));
        if (want("bounds")) outcomes.push_back(suite_bounds(tol));
        if (want("oracles")) outcomes.push_back(suite_oracles(tol));
        if (outcomes.empty()) throw ParseError("unknown suite: " + suite);
        bool ok = true;
        for (const SuiteOutcome& o : outcomes) {
            std::cout << (o.pass ? "PASS " : "FAIL ") << o.name
                      << " worst_residual=" << fmt17(o.worst) << '\n';
            ok = ok && o.pass;
        }
        return ok ? 0 : 5;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const IncompatibilityError& e) {
        std::cerr << "incompatible inputs: " << e.what() << '\n';
        return 3;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 4;
    } catch (const SoundnessError& e) {
        std::cerr << "soundness failure: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    }
}
