#include "steinkit/oracle.hpp"
#include "steinkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace steinkit {

namespace {

std::vector<double> lattice_points(const DensityModel& d) {
    const LatticeSpec& ls = d.lattice();
    std::vector<double> pts;
    double mass = 0.0;
    for (std::int64_t k = ls.k_lo;; ++k) {
        if (!ls.infinite() && k > ls.k_hi) break;
        pts.push_back(ls.point(k));
        mass += d.pmf_by_index(k);
        if (ls.infinite() && mass > 1.0 - 1e-13) break;
        if (pts.size() > 200'000)
            throw BudgetError("lattice enumeration exceeded budget");
    }
    return pts;
}

std::vector<double> merged_points(const DensityModel& d1,
                                  const DensityModel& d2) {
    std::vector<double> pts = lattice_points(d1);
    std::vector<double> p2 = lattice_points(d2);
    pts.insert(pts.end(), p2.begin(), p2.end());
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double x : pts)
        if (out.empty() || x - out.back() > 1e-9 * (1.0 + std::fabs(x)))
            out.push_back(x);
    return out;
}

// Sign changes of fn over the probe points, refined by bisection.
std::vector<double> sign_crossings(const RealFn& fn,
                                   const std::vector<double>& probes) {
    std::vector<double> out;
    for (std::size_t i = 1; i < probes.size(); ++i) {
        double lo = probes[i - 1], hi = probes[i];
        double flo = fn(lo), fhi = fn(hi);
        if ((flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0)) {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = fn(mid);
                if ((flo < 0.0) == (fm < 0.0)) { lo = mid; flo = fm; }
                else hi = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
    }
    return out;
}

std::vector<double> quantile_probes(const DensityModel& d1,
                                    const DensityModel& d2, int n) {
    std::vector<double> probes;
    for (int i = 1; i < n; ++i) {
        probes.push_back(d1.quantile(double(i) / n));
        probes.push_back(d2.quantile(double(i) / n));
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    return probes;
}

} // namespace

DistanceResult tv_distance(const DensityModel& d1, const DensityModel& d2) {
    DistanceResult r;
    r.metric = "tv";
    const bool l1 = d1.kind() == DensityKind::Lattice;
    const bool l2 = d2.kind() == DensityKind::Lattice;
    if (l1 != l2) {
        r.value = 1.0;
        r.method = "closed-form";
        r.note = "mutually singular (lattice vs continuous); TV is 1";
        return r;
    }
    if (l1) {
        double s = 0.0;
        for (double x : merged_points(d1, d2))
            s += std::fabs(d1.pdf(x) - d2.pdf(x));
        r.value = 0.5 * s;
        r.method = "enumeration";
        return r;
    }
    RealFn diff = [&d1, &d2](double x) { return d1.pdf(x) - d2.pdf(x); };
    std::vector<double> breaks = sign_crossings(diff, quantile_probes(d1, d2, 512));
    // also cut at support edges so the integrand stays piecewise smooth
    for (const SupportInterval* s : {&d1.support(), &d2.support()}) {
        if (std::isfinite(s->lower)) breaks.push_back(s->lower);
        if (std::isfinite(s->upper)) breaks.push_back(s->upper);
    }
    const double lo = std::min(d1.support().lower, d2.support().lower);
    const double hi = std::max(d1.support().upper, d2.support().upper);
    QuadOptions opts;
    opts.breakpoints = breaks;
    QuadResult q = integrate([&](double x) { return std::fabs(diff(x)); }, lo,
                             hi, opts);
    r.value = 0.5 * q.value;
    r.method = "quadrature";
    r.error_estimate = 0.5 * q.abs_error;
    return r;
}

DistanceResult kolmogorov_distance(const DensityModel& d1,
                                   const DensityModel& d2) {
    DistanceResult r;
    r.metric = "kolmogorov";
    const bool l1 = d1.kind() == DensityKind::Lattice;
    const bool l2 = d2.kind() == DensityKind::Lattice;

    auto gap = [&](double x) {
        return std::fabs(cdf_of(d1, x) - cdf_of(d2, x));
    };

    if (l1 || l2) {
        // CDFs are piecewise constant/monotone between lattice points; the
        // sup is attained at a point or at its left limit.
        std::vector<double> pts =
            l1 && l2 ? merged_points(d1, d2)
                     : lattice_points(l1 ? d1 : d2);
        double best = 0.0;
        double prev = -kInf;
        for (double x : pts) {
            best = std::max(best, gap(x));
            // left limit: lattice CDF takes its previous value, continuous
            // CDF is evaluated at x itself
            const double f1l = l1 ? cdf_of(d1, prev) : cdf_of(d1, x);
            const double f2l = l2 ? cdf_of(d2, prev) : cdf_of(d2, x);
            best = std::max(best, std::fabs(f1l - f2l));
            prev = x;
        }
        r.value = best;
        r.method = "enumeration";
        return r;
    }

    std::vector<double> probes = quantile_probes(d1, d2, 5000);
    double best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double g = gap(probes[i]);
        if (g > best) { best = g; best_i = i; }
    }
    double a = probes[best_i > 0 ? best_i - 1 : 0];
    double b = probes[std::min(best_i + 1, probes.size() - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double g1 = gap(x1), g2 = gap(x2);
    for (int it = 0; it < 60; ++it) {
        if (g1 < g2) {
            a = x1; x1 = x2; g1 = g2;
            x2 = a + phi * (b - a); g2 = gap(x2);
        } else {
            b = x2; x2 = x1; g2 = g1;
            x1 = b - phi * (b - a); g1 = gap(x1);
        }
    }
    r.value = std::max(best, std::max(g1, g2));
    r.method = "quadrature";
    r.error_estimate = 1e-10;
    return r;
}

DistanceResult wasserstein_distance(const DensityModel& d1,
                                    const DensityModel& d2) {
    DistanceResult r;
    r.metric = "wasserstein";
    const bool l1 = d1.kind() == DensityKind::Lattice;
    const bool l2 = d2.kind() == DensityKind::Lattice;

    if (l1 && l2) {
        std::vector<double> pts = merged_points(d1, d2);
        double v = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            v += std::fabs(cdf_of(d1, pts[i]) - cdf_of(d2, pts[i])) *
                 (pts[i + 1] - pts[i]);
        r.value = v;
        r.method = "enumeration";
        return r;
    }

    if (!l1 && !l2) {
        RealFn diff = [&d1, &d2](double x) {
            return cdf_of(d1, x) - cdf_of(d2, x);
        };
        std::vector<double> breaks =
            sign_crossings(diff, quantile_probes(d1, d2, 512));
        const double lo =
            std::min(d1.quantile(5e-11), d2.quantile(5e-11));
        const double hi =
            std::max(d1.quantile(1.0 - 5e-11), d2.quantile(1.0 - 5e-11));
        QuadOptions opts;
        opts.breakpoints = breaks;
        QuadResult q = integrate(
            [&](double x) { return std::fabs(diff(x)); }, lo, hi, opts);
        r.value = q.value;
        r.method = "quadrature";
        r.error_estimate = q.abs_error + 1e-10;
        return r;
    }

    // mixed: integrate exactly on each lattice cell where the lattice CDF is
    // constant, plus the two tails of the continuous law
    const DensityModel& dl = l1 ? d1 : d2;
    const DensityModel& dc = l1 ? d2 : d1;
    std::vector<double> pts = lattice_points(dl);
    double v = 0.0;
    // lower tail: lattice CDF is 0 below the first point
    v += expect(dc, [&pts](double x) { return std::max(pts.front() - x, 0.0); });
    // upper tail: lattice CDF is 1 from the last point on
    v += expect(dc, [&pts](double x) { return std::max(x - pts.back(), 0.0); });
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double c = cdf_of(dl, pts[i]);
        const double a = pts[i], b = pts[i + 1];
        RealFn f = [&dc, c](double x) { return cdf_of(dc, x) - c; };
        QuadOptions opts;
        const double fa = f(a), fb = f(b);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if ((flo < 0.0) == (fm < 0.0)) { lo = mid; flo = fm; }
                else hi = mid;
            }
            opts.breakpoints = {0.5 * (lo + hi)};
        }
        QuadResult q =
            integrate([&f](double x) { return std::fabs(f(x)); }, a, b, opts);
        v += q.value;
        err += q.abs_error;
    }
    r.value = v;
    r.method = "quadrature";
    r.error_estimate = err + 1e-10;
    return r;
}

double characterization_check(const SteinPair& sp, const DensityModel& q) {
    const DensityModel& p = sp.density;
    if (p.kind() != DensityKind::Lattice || q.kind() != DensityKind::Lattice)
        throw IncompatibilityError("characterization check needs lattice models");
    const LatticeSpec& lp = p.lattice();
    const LatticeSpec& lq = q.lattice();
    if (lp.infinite() || lq.infinite())
        throw IncompatibilityError("characterization check needs finite support");
    const std::int64_t m = lp.k_hi - lp.k_lo + 1;
    if (m > 64)
        throw BudgetError("characterization support exceeds 64 points");
    if (lq.k_hi - lq.k_lo + 1 != m ||
        std::fabs(lp.point(lp.k_lo) - lq.point(lq.k_lo)) >
            1e-9 * (1.0 + std::fabs(lp.point(lp.k_lo))) ||
        std::fabs(lp.spacing - lq.spacing) > 1e-12 * (1.0 + lp.spacing))
        throw IncompatibilityError("characterization support mismatch");

    double worst = 0.0;
    SteinPair spc = sp;
    // basis: indicators of single support points, skipping the lower endpoint
    // so f vanishes there (class boundary condition)
    for (std::int64_t j = 1; j < m; ++j) {
        const double xj = lp.point(lp.k_lo + j);
        RealFn f = [xj](double x) {
            return std::fabs(x - xj) <= 1e-9 * (1.0 + std::fabs(xj)) ? 1.0 : 0.0;
        };
        double e = 0.0;
        for (std::int64_t k = 0; k < m; ++k) {
            const double x = lq.point(lq.k_lo + k);
            const double qk = q.pmf_by_index(lq.k_lo + k);
            if (qk > 0.0 && p.pdf(x) > 0.0)
                e += canonical_apply(spc, f, x) * qk;
        }
        worst = std::max(worst, std::fabs(e));
    }
    return worst;
}

} // namespace steinkit
