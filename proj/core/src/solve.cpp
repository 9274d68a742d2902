#include "steinkit/solve.hpp"
#include "steinkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace steinkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::optional<double> constant_value(const DensityModel& d, const RealFn& f) {
    double c = 0.0;
    bool first = true;
    for (double q : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
        const double v = f(d.quantile(q));
        if (first) { c = v; first = false; }
        else if (std::fabs(v - c) > 1e-12 * (1.0 + std::fabs(c)))
            return std::nullopt;
    }
    return c;
}

void require_nonzero_on_interior(const DensityModel& d, const RealFn& f,
                                 const char* what) {
    for (int i = 1; i <= 17; ++i) {
        const double x = d.quantile(double(i) / 18.0);
        if (f(x) == 0.0)
            throw IncompatibilityError(std::string(what) +
                                       " vanishes at interior point x = " +
                                       std::to_string(x));
    }
}

} // namespace

double inverse_interval_indicator(const SteinPair& sp, double z1, double z2,
                                  double x) {
    const DensityModel& d = sp.density;
    if (d.kind() == DensityKind::Lattice) {
        auto h = [z1, z2](double y) { return (y > z1 && y <= z2) ? 1.0 : 0.0; };
        return inverse_apply(sp, h, x, true);
    }
    const double px = d.pdf(x);
    if (px == 0.0) return 0.0;
    const double F1 = std::isinf(z1) ? 0.0 : cdf_of(d, z1);
    const double F2 = cdf_of(d, z2);
    const double m = F2 - F1;
    const double Fx = cdf_of(d, x);
    const double lower_piece = std::max(0.0, std::min(Fx, F2) - F1);
    return (lower_piece - m * Fx) / px;
}

SolutionPair solve(const SteinPair& sp, const RealFn& h, const SolveSplit& split) {
    const bool have_f = static_cast<bool>(split.fixed_f);
    const bool have_g = static_cast<bool>(split.fixed_g);
    if (have_f == have_g)
        throw IncompatibilityError("solve needs exactly one of fixed_f / fixed_g");

    RealFn product = inverse_operator(sp, h, true);
    const double l = sp.op.shift_l();

    SolutionPair out;
    out.h = h;
    out.product = product;
    if (have_f) {
        require_nonzero_on_interior(sp.density, split.fixed_f, "fixed f");
        RealFn f = split.fixed_f;
        out.f = f;
        out.g = [product, f, l](double y) {
            return product(y - l) / f(y - l);
        };
    } else {
        require_nonzero_on_interior(sp.density, split.fixed_g, "fixed g");
        RealFn g = split.fixed_g;
        out.g = g;
        out.f = [product, g, l](double x) { return product(x) / g(x + l); };
    }
    return out;
}

SolutionPair solve_interval_indicator(const SteinPair& sp, double z1, double z2,
                                      const SolveSplit& split) {
    const bool have_f = static_cast<bool>(split.fixed_f);
    const bool have_g = static_cast<bool>(split.fixed_g);
    if (have_f == have_g)
        throw IncompatibilityError("solve needs exactly one of fixed_f / fixed_g");

    SteinPair spc = sp;
    RealFn product = [spc, z1, z2](double x) {
        return inverse_interval_indicator(spc, z1, z2, x);
    };
    const double l = sp.op.shift_l();

    SolutionPair out;
    out.h = [z1, z2](double y) { return (y > z1 && y <= z2) ? 1.0 : 0.0; };
    out.product = product;
    if (std::isfinite(z1)) out.kinks.push_back(z1);
    if (std::isfinite(z2)) out.kinks.push_back(z2);
    if (have_f) {
        require_nonzero_on_interior(sp.density, split.fixed_f, "fixed f");
        RealFn f = split.fixed_f;
        out.f = f;
        out.g = [product, f, l](double y) { return product(y - l) / f(y - l); };
    } else {
        require_nonzero_on_interior(sp.density, split.fixed_g, "fixed g");
        RealFn g = split.fixed_g;
        out.g = g;
        out.f = [product, g, l](double x) { return product(x) / g(x + l); };
    }
    return out;
}

namespace {

// Closed-form factor constants, available for a handful of reference targets
// when the fixed function is a constant c (the solution just rescales by 1/c).
std::optional<SteinFactors> analytic_factors(const SteinPair& sp,
                                             const TestClass& cls, double c) {
    if (sp.op.kind != OpKind::Derivative) return std::nullopt;
    const double ac = std::fabs(c);
    if (ac == 0.0) return std::nullopt;
    const std::string& fam = sp.density.family();
    SteinFactors out;
    out.method = FactorMethod::Analytic;

    if (fam == "gaussian") {
        const double sd = std::sqrt(sp.density.params().at("sigma2"));
        switch (cls.kind) {
        case TestKind::TV:
            out.sup_g = sd * std::sqrt(kPi / 2.0) / ac;
            out.sup_dg = 2.0 / ac;
            return out;
        case TestKind::Kolmogorov:
            out.sup_g = sd * std::sqrt(2.0 * kPi) / 4.0 / ac;
            out.sup_dg = 1.0 / ac;
            return out;
        case TestKind::Lipschitz:
            out.sup_dg = sd / ac;
            out.sup_d2g = 2.0 / ac;
            return out;
        }
    }
    if (fam == "gumbel" && cls.kind == TestKind::Kolmogorov) {
        out.sup_g = 1.0 / ac;
        out.sup_dg = 1.0 / ac;
        return out;
    }
    if (fam == "exponential" &&
        (cls.kind == TestKind::TV || cls.kind == TestKind::Kolmogorov)) {
        const double lambda = sp.density.params().at("lambda");
        out.sup_g = 1.0 / (lambda * ac);
        out.sup_dg = 2.0 / ac;
        return out;
    }
    return std::nullopt;
}

struct Grid {
    std::vector<double> x, F, p, Tf, fval;
};

Grid build_grid(const SteinPair& sp, const RealFn& fixed_f, std::size_t n) {
    const DensityModel& d = sp.density;
    Grid g;
    const double xlo = d.quantile(1e-4);
    const double xhi = d.quantile(1.0 - 1e-4);
    g.x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.x[i] = xlo + (xhi - xlo) * (double(i) + 0.5) / double(n);
    g.F.resize(n);
    g.p.resize(n);
    g.Tf.resize(n);
    g.fval.resize(n);
    if (d.has_closed_cdf()) {
        for (std::size_t i = 0; i < n; ++i) g.F[i] = cdf_of(d, g.x[i]);
    } else {
        // cumulative panel integration along the grid (one pass)
        double acc = cdf_of(d, xlo);
        double prev = xlo;
        for (std::size_t i = 0; i < n; ++i) {
            acc += integrate([&](double t) { return d.pdf(t); }, prev, g.x[i])
                       .value;
            g.F[i] = std::min(acc, 1.0);
            prev = g.x[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.p[i] = d.pdf(g.x[i]);
        g.fval[i] = fixed_f(g.x[i]);
        g.Tf[i] = canonical_apply(sp, fixed_f, g.x[i]);
    }
    return g;
}

// Factors over indicator test functions with jump levels taken in CDF scale:
// h = indicator(m1 < F(x) <= m2) - (m2 - m1). The solution and its derivative
// are expressible through (F, p) only.
void scan_indicator(const Grid& g, double m1, double m2, double& sup_g,
                    double& sup_dg) {
    const double m = m2 - m1;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        if (g.p[i] <= 0.0 || g.fval[i] == 0.0) continue;
        const double lower = std::max(0.0, std::min(g.F[i], m2) - m1);
        const double prod = (lower - m * g.F[i]) / g.p[i];
        const double gi = prod / g.fval[i];
        const double hc = ((g.F[i] > m1 && g.F[i] <= m2) ? 1.0 : 0.0) - m;
        // From the equation f g' + g T f = h - E h:
        const double dgi = (hc - gi * g.Tf[i]) / g.fval[i];
        sup_g = std::max(sup_g, std::fabs(gi));
        sup_dg = std::max(sup_dg, std::fabs(dgi));
    }
}

SteinFactors grid_factors_continuous(const SteinPair& sp, const TestClass& cls,
                                     const RealFn& fixed_f) {
    const std::size_t n = 10'000;
    Grid g = build_grid(sp, fixed_f, n);
    SteinFactors out;
    out.method = FactorMethod::Grid;
    double sup_g = 0.0, sup_dg = 0.0;

    if (cls.kind == TestKind::Kolmogorov) {
        for (int k = 1; k <= 999; ++k)
            scan_indicator(g, 0.0, double(k) / 1000.0, sup_g, sup_dg);
    } else if (cls.kind == TestKind::TV) {
        std::vector<double> levels{0.001};
        for (int k = 1; k <= 49; ++k) levels.push_back(0.02 * k);
        levels.push_back(0.999);
        for (std::size_t a = 0; a < levels.size(); ++a)
            for (std::size_t b = a + 1; b < levels.size(); ++b)
                scan_indicator(g, levels[a], levels[b], sup_g, sup_dg);
        // half-lines are TV test functions too
        for (int k = 1; k <= 99; ++k)
            scan_indicator(g, 0.0, double(k) / 100.0, sup_g, sup_dg);
    } else {
        // hinge functions h_t(x) = max(x - t, 0), 1-Lipschitz
        const DensityModel& d = sp.density;
        for (int k = 1; k <= 25; ++k) {
            const double t = d.quantile(double(k) / 26.0);
            const double m =
                expect(d, [t](double y) { return std::max(y - t, 0.0); });
            // cumulative trapezoid of (h - m) p along the grid
            double acc = -m * g.F[0];
            double prev_x = g.x[0];
            double prev_v = (std::max(g.x[0] - t, 0.0) - m) * g.p[0];
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double v = (std::max(g.x[i] - t, 0.0) - m) * g.p[i];
                if (i > 0) acc += 0.5 * (v + prev_v) * (g.x[i] - prev_x);
                prev_x = g.x[i];
                prev_v = v;
                if (g.p[i] <= 0.0 || g.fval[i] == 0.0) continue;
                const double gi = acc / g.p[i] / g.fval[i];
                const double hc = std::max(g.x[i] - t, 0.0) - m;
                const double dgi = (hc - gi * g.Tf[i]) / g.fval[i];
                sup_g = std::max(sup_g, std::fabs(gi));
                sup_dg = std::max(sup_dg, std::fabs(dgi));
            }
        }
    }
    out.sup_g = sup_g;
    out.sup_dg = sup_dg;
    return out;
}

SteinFactors grid_factors_lattice(const SteinPair& sp, const TestClass& cls,
                                  const RealFn& fixed_f) {
    const DensityModel& d = sp.density;
    const LatticeSpec& ls = d.lattice();
    std::vector<double> pts, pk;
    for (std::int64_t k = ls.k_lo;; ++k) {
        if (!ls.infinite() && k > ls.k_hi) break;
        pts.push_back(ls.point(k));
        pk.push_back(d.pmf_by_index(k));
        if (ls.infinite() && cdf_of(d, ls.point(k)) > 1.0 - 1e-12) break;
        if (pts.size() > 100'000)
            throw BudgetError("lattice factor grid exceeded budget");
    }
    const std::size_t n = pts.size();
    const double nu_scale = 1.0 / sp.op.scale();
    const double sc = sp.op.scale();

    SteinFactors out;
    out.method = FactorMethod::Grid;
    double sup_g = 0.0, sup_dg = 0.0;

    auto scan = [&](const RealFn& h) {
        double eh = 0.0;
        for (std::size_t i = 0; i < n; ++i) eh += h(pts[i]) * pk[i];
        std::vector<double> gv(n, 0.0);
        double pre = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pk[i] > 0.0) {
                const double prod = nu_scale * pre / pk[i];
                const double fv = fixed_f(pts[i]);
                gv[i] = fv == 0.0 ? 0.0 : prod / fv;
            }
            pre += (h(pts[i]) - eh) * pk[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            sup_g = std::max(sup_g, std::fabs(gv[i]));
            if (i + 1 < n)
                sup_dg = std::max(sup_dg, std::fabs(sc * (gv[i + 1] - gv[i])));
        }
    };

    const std::size_t stride = std::max<std::size_t>(1, n / 128);
    if (cls.kind == TestKind::Kolmogorov) {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = pts[i];
            scan([z](double y) { return y <= z ? 1.0 : 0.0; });
        }
    } else if (cls.kind == TestKind::TV) {
        for (std::size_t a = 0; a < n; a += stride)
            for (std::size_t b = a; b < n; b += stride) {
                const double z1 = pts[a] - 0.5 * ls.spacing;
                const double z2 = pts[b];
                scan([z1, z2](double y) {
                    return (y > z1 && y <= z2) ? 1.0 : 0.0;
                });
            }
    } else {
        for (std::size_t i = 0; i < n; i += stride) {
            const double t = pts[i];
            scan([t](double y) { return std::max(y - t, 0.0); });
        }
    }
    out.sup_g = sup_g;
    out.sup_dg = sup_dg;
    return out;
}

} // namespace

SteinFactors stein_factors(const SteinPair& sp, const TestClass& cls,
                           const RealFn& fixed_f, bool force_grid) {
    if (!force_grid) {
        if (auto c = constant_value(sp.density, fixed_f)) {
            if (auto a = analytic_factors(sp, cls, *c)) return *a;
        }
    }
    if (sp.density.kind() == DensityKind::Lattice)
        return grid_factors_lattice(sp, cls, fixed_f);
    return grid_factors_continuous(sp, cls, fixed_f);
}

RealFn frechet_solution(double alpha, double z) {
    if (alpha <= 0.0 || z <= 0.0)
        throw IncompatibilityError("frechet solution needs alpha > 0, z > 0");
    return [alpha, z](double x) {
        if (x <= 0.0) return 0.0;
        auto Phi = [alpha](double t) { return std::exp(-std::pow(t, -alpha)); };
        return (Phi(std::min(x, z)) / Phi(x) - Phi(z)) / alpha;
    };
}

} // namespace steinkit
