#include "steinkit/operators.hpp"
#include "steinkit/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

namespace steinkit {

namespace {

double fd_step(double x) { return 1e-6 * std::max(1.0, std::fabs(x)); }

double central_diff(const RealFn& f, double x) {
    const double h = fd_step(x);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double density_at(const DensityModel& d, double x) { return d.pdf(x); }

double interior_pdf(const SteinPair& sp, double x) {
    const double p = sp.density.pdf(x);
    if (p <= 0.0)
        throw IncompatibilityError(
            "density vanishes at an interior point x = " + std::to_string(x));
    return p;
}

} // namespace

SteinPair make_stein_pair(DensityModel d) {
    OperatorSpec op;
    if (d.kind() == DensityKind::Lattice) {
        op.kind = OpKind::ForwardDifference;
        op.spacing = d.lattice().spacing;
    }
    return {std::move(d), op};
}

SteinPair make_stein_pair(DensityModel d, OperatorSpec op) {
    return {std::move(d), op};
}

double canonical_apply(const SteinPair& sp, const RealFn& f, double x) {
    const DensityModel& d = sp.density;
    if (d.pdf(x) == 0.0) return 0.0; // convention: T f = 0 outside the support

    if (sp.op.kind == OpKind::Derivative) {
        if (d.kind() != DensityKind::Continuous)
            throw IncompatibilityError(
                "derivative operator over a lattice density");
        const double fp = central_diff(f, x);
        if (auto u = d.log_pdf_derivative(x)) return fp + f(x) * *u;
        const double h = fd_step(x);
        const double num = f(x + h) * d.pdf(x + h) - f(x - h) * d.pdf(x - h);
        return num / (2.0 * h * interior_pdf(sp, x));
    }

    const double px = interior_pdf(sp, x);
    const double delta = sp.op.spacing;
    const double sc = sp.op.scale();
    auto fp_at = [&](double y) {
        const double p = density_at(d, y);
        return p == 0.0 ? 0.0 : f(y) * p;
    };
    switch (sp.op.kind) {
    case OpKind::ForwardDifference:
        return sc * (fp_at(x + delta) - fp_at(x)) / px;
    case OpKind::BackwardDifference:
        return sc * (fp_at(x) - fp_at(x - delta)) / px;
    case OpKind::SpanDifference: {
        const double s = 0.5 * delta;
        return (fp_at(x + s) - fp_at(x - s)) / px;
    }
    default: return 0.0;
    }
}

RealFn canonical_operator(const SteinPair& sp, const RealFn& f) {
    return [sp, f](double x) { return canonical_apply(sp, f, x); };
}

namespace {

double lattice_lower_sum(const SteinPair& sp, const RealFn& g, double x) {
    // sum of g(y) p(y) over lattice points strictly below x
    const LatticeSpec& ls = sp.density.lattice();
    const std::int64_t hi = std::min(ls.index_below(x),
                                     ls.infinite() ? kInfIndex - 1 : ls.k_hi);
    double acc = 0.0;
    for (std::int64_t k = ls.k_lo; k <= hi; ++k) {
        const double p = sp.density.pmf_by_index(k);
        if (p != 0.0) acc += g(ls.point(k)) * p;
    }
    return acc;
}

} // namespace

namespace {

// Inverse operator for an already-centered integrand.
double inverse_centered(const SteinPair& sp, const RealFn& hc, double x) {
    const DensityModel& d = sp.density;
    if (d.pdf(x) == 0.0) return 0.0;
    if (d.kind() == DensityKind::Lattice) {
        const double inv_scale = 1.0 / sp.op.scale();
        return inv_scale * lattice_lower_sum(sp, hc, x) / interior_pdf(sp, x);
    }
    const SupportInterval& si = d.support();
    const double px = interior_pdf(sp, x);
    auto integrand = [&](double y) {
        const double p = d.pdf(y);
        return p == 0.0 ? 0.0 : hc(y) * p;
    };
    // Both tails agree because h is centered; use the lighter one.
    if (cdf_of(d, x) <= 0.5)
        return integrate_or_throw(integrand, si.lower, x) / px;
    return -integrate_or_throw(integrand, x, si.upper) / px;
}

double centering_constant(const DensityModel& d, const RealFn& h,
                          bool auto_center) {
    const double eh = expect(d, h);
    if (!auto_center && std::fabs(eh) > 1e-9)
        throw IncompatibilityError(
            "inverse operator input is not centered (E h = " +
            std::to_string(eh) + "); pass auto_center to subtract the mean");
    return eh;
}

} // namespace

double inverse_apply(const SteinPair& sp, const RealFn& h, double x,
                     bool auto_center) {
    const double eh = centering_constant(sp.density, h, auto_center);
    return inverse_centered(sp, [&](double y) { return h(y) - eh; }, x);
}

RealFn inverse_operator(const SteinPair& sp, const RealFn& h, bool auto_center) {
    const double eh = centering_constant(sp.density, h, auto_center);
    SteinPair spc = sp;
    RealFn hf = h;
    return [spc, hf, eh](double x) {
        return inverse_centered(spc, [&](double y) { return hf(y) - eh; }, x);
    };
}

ScoreResult score(const SteinPair& sp) {
    const DensityModel& d = sp.density;
    RealFn u;
    if (sp.op.kind == OpKind::Derivative) {
        // Exact log-derivative when the family ships one, otherwise a
        // central difference of log p with relative step 1e-6.
        u = [d](double x) {
            if (auto v = d.log_pdf_derivative(x)) return *v;
            const double h = fd_step(x);
            const double pl = d.pdf(x - h), pr = d.pdf(x + h);
            if (pl <= 0.0 || pr <= 0.0) return 0.0;
            return (std::log(pr) - std::log(pl)) / (2.0 * h);
        };
    } else {
        SteinPair spc = sp;
        u = [spc](double x) {
            return canonical_apply(spc, [](double) { return 1.0; }, x);
        };
    }
    ClassMembership cm = check_in_class(sp, [](double) { return 1.0; });
    return {std::move(u), cm.in_class};
}

namespace {

// Incremental cache of the strictly-below partial sums used by lattice kernels.
struct KernelCache {
    std::mutex mu;
    std::vector<double> partial; // partial[i] = sum_{k<=k_lo+i} (mean - y_k) p_k
};

} // namespace

RealFn stein_kernel(const SteinPair& sp) {
    const DensityModel& d = sp.density;
    const double nu = d.mean();
    if (!std::isfinite(nu))
        throw IncompatibilityError("Stein kernel needs a finite mean");

    if (d.kind() == DensityKind::Lattice) {
        auto cache = std::make_shared<KernelCache>();
        const double inv_scale = 1.0 / sp.op.scale();
        SteinPair spc = sp;
        return [spc, nu, cache, inv_scale](double x) {
            const double px = spc.density.pdf(x);
            if (px == 0.0) return 0.0;
            const LatticeSpec& ls = spc.density.lattice();
            const std::int64_t below = ls.index_below(x);
            if (below < ls.k_lo) return 0.0;
            const auto need = std::size_t(below - ls.k_lo) + 1;
            std::lock_guard lk(cache->mu);
            auto& ps = cache->partial;
            while (ps.size() < need) {
                const auto k = ls.k_lo + std::int64_t(ps.size());
                const double term =
                    (nu - ls.point(k)) * spc.density.pmf_by_index(k);
                ps.push_back((ps.empty() ? 0.0 : ps.back()) + term);
            }
            return inv_scale * ps[need - 1] / px;
        };
    }

    DensityModel dc = d;
    return [dc, nu](double x) {
        const double px = dc.pdf(x);
        if (px == 0.0) return 0.0;
        const SupportInterval& si = dc.support();
        auto upper = [&](double y) {
            const double p = dc.pdf(y);
            return p == 0.0 ? 0.0 : (y - nu) * p;
        };
        auto lower = [&](double y) {
            const double p = dc.pdf(y);
            return p == 0.0 ? 0.0 : (nu - y) * p;
        };
        if (cdf_of(dc, x) <= 0.5)
            return integrate_or_throw(lower, si.lower, x) / px;
        return integrate_or_throw(upper, x, si.upper) / px;
    };
}

double pair_diff(const SteinPair& sp, const RealFn& g, double x) {
    const double delta = sp.op.spacing;
    const double sc = sp.op.scale();
    switch (sp.op.kind) {
    case OpKind::Derivative: return central_diff(g, x);
    case OpKind::ForwardDifference: return sc * (g(x) - g(x - delta));
    case OpKind::BackwardDifference: return sc * (g(x + delta) - g(x));
    case OpKind::SpanDifference: return g(x) - g(x - delta);
    }
    return 0.0;
}

ClassMembership check_in_class(const SteinPair& sp, const RealFn& f) {
    const DensityModel& d = sp.density;
    ClassMembership cm;

    // Integrability of D(fp): E |T f| must converge.
    try {
        (void)expect(d, [&](double x) {
            return std::fabs(canonical_apply(sp, f, x));
        }, 1e-8);
        cm.integrable = true;
    } catch (const BudgetError&) {
        cm.integrable = false;
    }

    auto fp = [&](double x) { return std::fabs(f(x) * d.pdf(x)); };

    if (d.kind() == DensityKind::Lattice) {
        const LatticeSpec& ls = d.lattice();
        // Forward difference: the telescoping sum leaves -f(a)p(a) plus the
        // upper-tail limit of f p. Backward is the mirror image; the span
        // difference leaves both endpoint terms.
        auto upper_tail = [&] {
            if (!ls.infinite()) {
                return sp.op.kind == OpKind::ForwardDifference
                           ? 0.0 // the shifted sum exits the support
                           : fp(ls.point(ls.k_hi));
            }
            std::int64_t k = ls.k_lo;
            double mass = 0.0;
            while (1.0 - mass > 1e-10) mass += d.pmf_by_index(k++);
            return fp(ls.point(k + 50));
        };
        switch (sp.op.kind) {
        case OpKind::ForwardDifference:
            cm.lower_residual = fp(ls.point(ls.k_lo));
            cm.upper_residual = upper_tail();
            break;
        case OpKind::BackwardDifference:
            cm.lower_residual = 0.0;
            cm.upper_residual = upper_tail();
            break;
        default:
            cm.lower_residual = fp(ls.point(ls.k_lo));
            cm.upper_residual = upper_tail();
            break;
        }
        double scale = 0.0;
        for (std::int64_t k = ls.k_lo;
             k <= (ls.infinite() ? ls.k_lo + 200 : ls.k_hi); ++k)
            scale = std::max(scale, fp(ls.point(k)));
        const double tol = 1e-9 * std::max(scale, 1e-300);
        cm.in_class = cm.integrable && cm.lower_residual <= tol &&
                      cm.upper_residual <= tol;
        return cm;
    }

    const SupportInterval& si = d.support();
    double scale = 0.0;
    for (int i = 1; i <= 9; ++i)
        scale = std::max(scale, fp(d.quantile(0.1 * i)));
    const double tol = 1e-9 * std::max(scale, 1e-300);

    // Geometric probe toward an endpoint: declare the boundary limit zero
    // when the last 5 probes sit below tolerance and do not increase.
    auto probe_limit = [&](bool lower) {
        std::array<double, 40> vals{};
        if ((lower && std::isinf(si.lower)) || (!lower && std::isinf(si.upper))) {
            const double x0 =
                std::max(1.0, std::fabs(d.quantile(lower ? 0.01 : 0.99)));
            for (int j = 0; j < 40; ++j) {
                const double x = x0 * std::pow(1.5, j + 1);
                vals[std::size_t(j)] = fp(lower ? -x : x);
            }
        } else {
            const double e = lower ? si.lower : si.upper;
            const double w = si.width();
            double dist = std::isfinite(w) ? 0.25 * w : 1.0;
            for (int j = 0; j < 40; ++j) {
                dist *= 0.5;
                vals[std::size_t(j)] = fp(lower ? e + dist : e - dist);
            }
        }
        bool ok = true;
        for (int j = 35; j < 40; ++j) {
            if (vals[std::size_t(j)] > tol) ok = false;
            if (j > 35 && vals[std::size_t(j)] > vals[std::size_t(j - 1)] + tol)
                ok = false;
        }
        return std::pair{vals[39], ok};
    };

    auto [lo_res, lo_ok] = probe_limit(true);
    auto [hi_res, hi_ok] = probe_limit(false);
    cm.lower_residual = lo_res;
    cm.upper_residual = hi_res;
    cm.in_class = cm.integrable && lo_ok && hi_ok;
    return cm;
}

double product_rule_residual(const OperatorSpec& op, const RealFn& f,
                             const RealFn& df, const RealFn& g,
                             const RealFn& dg, double x) {
    const double delta = op.spacing;
    const double sc = op.scale();
    switch (op.kind) {
    case OpKind::Derivative: {
        const double lhs = df(x) * g(x) + f(x) * dg(x); // (fg)'
        const double rhs = g(x) * df(x) + f(x) * dg(x);
        return lhs - rhs;
    }
    case OpKind::ForwardDifference: {
        const double lhs = sc * (f(x + delta) * g(x) - f(x) * g(x - delta));
        const double rhs = g(x) * sc * (f(x + delta) - f(x)) +
                           f(x) * sc * (g(x) - g(x - delta));
        return lhs - rhs;
    }
    case OpKind::BackwardDifference: {
        const double lhs = sc * (f(x) * g(x + delta) - f(x - delta) * g(x));
        const double rhs = g(x) * sc * (f(x) - f(x - delta)) +
                           f(x) * sc * (g(x + delta) - g(x));
        return lhs - rhs;
    }
    case OpKind::SpanDifference: {
        const double s = 0.5 * delta;
        const double lhs = f(x + s) * g(x) - f(x - s) * g(x - delta);
        const double rhs = g(x) * (f(x + s) - f(x - s)) +
                           f(x - s) * (g(x) - g(x - delta));
        return lhs - rhs;
    }
    }
    return 0.0;
}

std::function<RealFn(const RealFn&)> standardize_fixed_f(const SteinPair& sp,
                                                         const RealFn& f) {
    ClassMembership cm = check_in_class(sp, f);
    if (!cm.in_class)
        throw IncompatibilityError(
            "fixed function fails class membership for this density");
    SteinPair spc = sp;
    RealFn Tf = canonical_operator(sp, f);
    return [spc, f, Tf](const RealFn& g) -> RealFn {
        return [spc, f, Tf, g](double x) {
            const double delta = spc.op.spacing;
            const double sc = spc.op.scale();
            switch (spc.op.kind) {
            case OpKind::Derivative:
                return f(x) * central_diff(g, x) + g(x) * Tf(x);
            case OpKind::ForwardDifference:
                return f(x) * sc * (g(x + delta) - g(x)) +
                       g(x + delta) * Tf(x);
            case OpKind::BackwardDifference:
                return f(x) * sc * (g(x) - g(x - delta)) +
                       g(x - delta) * Tf(x);
            case OpKind::SpanDifference: {
                const double s = 0.5 * delta;
                return f(x) * (g(x + s) - g(x - s)) + g(x + s) * Tf(x);
            }
            }
            return 0.0;
        };
    };
}

std::function<RealFn(const RealFn&)> standardize_fixed_g(const SteinPair& sp,
                                                         const RealFn& g) {
    SteinPair spc = sp;
    return [spc, g](const RealFn& f) -> RealFn {
        auto op = standardize_fixed_f(spc, f);
        return op(g);
    };
}

std::optional<std::array<double, 3>> pearson_kernel_check(const DensityModel& d) {
    SteinPair sp = make_stein_pair(d);
    RealFn tau = stein_kernel(sp);

    std::vector<double> xs, ys;
    if (d.kind() == DensityKind::Lattice) {
        const LatticeSpec& ls = d.lattice();
        for (std::int64_t k = ls.k_lo;; ++k) {
            if (!ls.infinite() && k > ls.k_hi) break;
            const double x = ls.point(k);
            if (ls.infinite() && cdf_of(d, x) > 1.0 - 1e-10) break;
            if (d.pmf_by_index(k) <= 0.0) continue;
            xs.push_back(x);
            ys.push_back(tau(x));
        }
    } else {
        for (int i = 1; i <= 49; ++i) {
            const double x = d.quantile(0.02 * i);
            xs.push_back(x);
            ys.push_back(tau(x));
        }
    }

    // Normal equations for least squares against (1, x, x^2).
    double A[3][3] = {{0}}, b[3] = {0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double phi[3] = {1.0, xs[i], xs[i] * xs[i]};
        for (int r = 0; r < 3; ++r) {
            b[r] += phi[r] * ys[i];
            for (int c = 0; c < 3; ++c) A[r][c] += phi[r] * phi[c];
        }
    }
    // Gaussian elimination with partial pivoting.
    double M[3][4];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) M[r][c] = A[r][c];
        M[r][3] = b[r];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(M[r][col]) > std::fabs(M[piv][col])) piv = r;
        std::swap(M[piv], M[col]);
        if (std::fabs(M[col][col]) < 1e-14) return std::nullopt;
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double fac = M[r][col] / M[col][col];
            for (int c = col; c < 4; ++c) M[r][c] -= fac * M[col][c];
        }
    }
    std::array<double, 3> coef{M[0][3] / M[0][0], M[1][3] / M[1][1],
                               M[2][3] / M[2][2]};
    double max_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fit = coef[0] + coef[1] * xs[i] + coef[2] * xs[i] * xs[i];
        max_res = std::max(max_res, std::fabs(fit - ys[i]));
    }
    if (max_res >= 1e-6) return std::nullopt;
    return coef;
}

GibbsOperator gibbs_operator(const RealFn& V, double omega, std::int64_t N) {
    if (omega <= 0.0) throw IncompatibilityError("gibbs needs omega > 0");
    // Log-weights log mu(k) ~ V(k) + k log(omega) - log k!
    std::vector<double> lw;
    double best = -kInf;
    const std::int64_t hard_cap = 1'000'000;
    for (std::int64_t k = 0;; ++k) {
        if (N != kInfIndex && k > N) break;
        const double w = V(double(k)) + double(k) * std::log(omega) -
                         std::lgamma(double(k + 1));
        if (!std::isfinite(w) && w > 0)
            throw IncompatibilityError("gibbs weights are not normalizable");
        lw.push_back(w);
        best = std::max(best, w);
        if (N == kInfIndex && k > 10 && w < best - 60.0) break;
        if (k >= hard_cap)
            throw BudgetError("gibbs support truncation exceeded budget");
    }
    double Z = 0.0;
    for (double w : lw) Z += std::exp(w - best);
    std::vector<double> pmf(lw.size());
    for (std::size_t i = 0; i < lw.size(); ++i)
        pmf[i] = std::exp(lw[i] - best) / Z;

    DensityModel mu = make_table(0.0, 1.0, pmf);
    SteinPair pair = make_stein_pair(mu);
    const double nu = mu.mean();

    GibbsOperator out;
    out.pair = pair;
    out.birth_rate = [V, omega](double x) {
        return omega * std::exp(V(x + 1.0) - V(x));
    };
    auto birth = out.birth_rate;
    out.apply = [birth](const RealFn& f) -> RealFn {
        return [birth, f](double x) {
            return birth(x) * f(x + 1.0) - x * f(x);
        };
    };
    // Inclusive lower-tail kernel: (1/mu(x)) sum_{y<=x} (nu - y) mu(y).
    std::vector<double> incl(pmf.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        acc += (nu - double(k)) * pmf[k];
        incl[k] = acc;
    }
    out.kernel = [incl, pmf](double x) {
        const auto k = std::int64_t(std::llround(x));
        if (k < 0 || k >= std::int64_t(pmf.size()) ||
            std::fabs(x - double(k)) > 1e-9)
            return 0.0;
        return incl[std::size_t(k)] / pmf[std::size_t(k)];
    };
    return out;
}

std::function<RealFn(const RealFn&)> diffusion_operator(const DensityModel& d,
                                                        const RealFn& gamma) {
    const double eg = expect(d, gamma);
    if (std::fabs(eg) > 1e-8)
        throw IncompatibilityError("diffusion coefficient gamma is not centered");
    // one sign change, gamma * p bounded (numeric probe)
    int flips = 0;
    double prev = 0.0;
    double interior_max = 0.0;
    for (int i = 1; i <= 200; ++i) {
        const double x = d.quantile(double(i) / 201.0);
        const double gx = gamma(x);
        if (gx != 0.0) {
            if (prev != 0.0 && std::signbit(gx) != std::signbit(prev)) ++flips;
            prev = gx;
        }
        interior_max = std::max(interior_max, std::fabs(gx * d.pdf(x)));
    }
    if (flips != 1)
        throw IncompatibilityError(
            "diffusion coefficient gamma must change sign exactly once (saw " +
            std::to_string(flips) + " changes)");
    for (double q : {1e-6, 1.0 - 1e-6}) {
        const double x = d.quantile(q);
        if (std::fabs(gamma(x) * d.pdf(x)) > 1e3 * std::max(interior_max, 1e-12))
            throw IncompatibilityError("gamma * p appears unbounded");
    }

    SteinPair sp = make_stein_pair(d);
    RealFn beta_half = inverse_operator(sp, gamma, true); // = beta / 2
    return [beta_half, gamma](const RealFn& g) -> RealFn {
        return [beta_half, gamma, g](double x) {
            return beta_half(x) * central_diff(g, x) + gamma(x) * g(x);
        };
    };
}

DensityModel zero_bias_density(const DensityModel& d) {
    if (std::fabs(d.mean()) > 1e-9)
        throw IncompatibilityError("zero-bias transform needs a centered input");
    const double var = d.variance();
    if (!(var > 0.0) || !std::isfinite(var))
        throw IncompatibilityError("zero-bias transform needs 0 < Var < inf");

    CustomContinuous spec;
    spec.name = "zero-bias(" + d.family() + ")";

    if (d.kind() == DensityKind::Lattice) {
        const LatticeSpec& ls = d.lattice();
        if (ls.infinite())
            throw IncompatibilityError(
                "zero-bias of an unbounded lattice is not supported");
        std::vector<double> pts, upper; // upper[k] = sum_{y > pts[k]} y p(y)
        for (std::int64_t k = ls.k_lo; k <= ls.k_hi; ++k)
            pts.push_back(ls.point(k));
        DensityModel dc = d;
        spec.support = {pts.front(), pts.back(), false, false};
        spec.pdf = [dc, var](double x) {
            const LatticeSpec& l2 = dc.lattice();
            double s = 0.0;
            for (std::int64_t k = l2.k_lo; k <= l2.k_hi; ++k)
                if (l2.point(k) > x) s += l2.point(k) * dc.pmf_by_index(k);
            return s / var;
        };
        return make_custom_continuous(std::move(spec));
    }

    DensityModel dc = d;
    spec.support = d.support();
    spec.pdf = [dc, var](double x) {
        auto integrand = [&](double y) {
            const double p = dc.pdf(y);
            return p == 0.0 ? 0.0 : y * p;
        };
        return integrate_or_throw(integrand, x, dc.support().upper) / var;
    };
    return make_custom_continuous(std::move(spec));
}

} // namespace steinkit
