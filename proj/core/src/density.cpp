#include "steinkit/density.hpp"
#include "steinkit/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace steinkit {

std::int64_t LatticeSpec::index_below(double x) const {
    // Largest k with point(k) < x; a point equal to x (up to rounding) is
    // excluded, matching the strictly-below kernel summation convention.
    double raw = (x - origin) / spacing;
    auto k = static_cast<std::int64_t>(std::ceil(raw)) - 1;
    if (std::fabs(point(k + 1) - x) <= 1e-9 * (1.0 + std::fabs(x)))
        return k; // x sits on the lattice
    // x between points: floor
    k = static_cast<std::int64_t>(std::floor(raw));
    if (std::fabs(point(k) - x) <= 1e-9 * (1.0 + std::fabs(x))) return k - 1;
    return k;
}

struct DensityModel::Impl {
    DensityKind kind = DensityKind::Continuous;
    SupportInterval support;
    std::optional<LatticeSpec> lattice;
    RealFn pdf;                                   // continuous
    std::function<double(std::int64_t)> pmf;      // lattice, by index
    RealFn cdf_closed;                            // optional
    RealFn logd;                                  // optional d/dx log p
    std::string family = "custom";
    std::map<std::string, double> params;
    std::optional<double> mean_closed, var_closed;

    mutable std::mutex cache_mu;
    mutable std::optional<double> mean_cache, var_cache;
};

namespace {

using Impl = DensityModel::Impl;

DensityModel finish(std::shared_ptr<Impl> impl) {
    return DensityModel(std::shared_ptr<const Impl>(std::move(impl)));
}

constexpr double kLatticeTailMass = 1e-12;
constexpr std::int64_t kLatticeIterBudget = 10'000'000;

double lattice_sum(const Impl& im, const std::function<double(std::int64_t, double, double)>& term) {
    // term(k, x_k, p_k); accumulates until tail mass < kLatticeTailMass.
    const LatticeSpec& ls = *im.lattice;
    double acc = 0.0, mass = 0.0;
    std::int64_t budget = kLatticeIterBudget;
    for (std::int64_t k = ls.k_lo;; ++k) {
        if (!ls.infinite() && k > ls.k_hi) break;
        const double p = im.pmf(k);
        acc += term(k, ls.point(k), p);
        mass += p;
        if (ls.infinite() && 1.0 - mass < kLatticeTailMass && p < kLatticeTailMass)
            break;
        if (--budget == 0)
            throw BudgetError("lattice summation exceeded the iteration budget");
    }
    return acc;
}

} // namespace

DensityKind DensityModel::kind() const { return impl_->kind; }
const SupportInterval& DensityModel::support() const { return impl_->support; }
const std::string& DensityModel::family() const { return impl_->family; }
const std::map<std::string, double>& DensityModel::params() const {
    return impl_->params;
}
bool DensityModel::has_closed_cdf() const {
    return static_cast<bool>(impl_->cdf_closed);
}

const LatticeSpec& DensityModel::lattice() const {
    if (!impl_->lattice)
        throw IncompatibilityError("density '" + impl_->family +
                                   "' is not lattice-supported");
    return *impl_->lattice;
}

double DensityModel::pmf_by_index(std::int64_t k) const {
    const LatticeSpec& ls = lattice();
    if (k < ls.k_lo || (!ls.infinite() && k > ls.k_hi)) return 0.0;
    return impl_->pmf(k);
}

double DensityModel::pdf(double x) const {
    const Impl& im = *impl_;
    if (im.kind == DensityKind::Continuous) {
        if (!im.support.contains(x)) return 0.0;
        return im.pdf(x);
    }
    const LatticeSpec& ls = *im.lattice;
    const double raw = (x - ls.origin) / ls.spacing;
    const auto k = static_cast<std::int64_t>(std::llround(raw));
    if (std::fabs(ls.point(k) - x) > 1e-9 * (1.0 + std::fabs(x))) return 0.0;
    return pmf_by_index(k);
}

double DensityModel::cdf(double x) const { return cdf_of(*this, x); }

std::optional<double> DensityModel::log_pdf_derivative(double x) const {
    if (!impl_->logd) return std::nullopt;
    return impl_->logd(x);
}

double DensityModel::mean() const {
    const Impl& im = *impl_;
    if (im.mean_closed) return *im.mean_closed;
    {
        std::lock_guard lk(im.cache_mu);
        if (im.mean_cache) return *im.mean_cache;
    }
    double m = expect(*this, [](double x) { return x; });
    std::lock_guard lk(im.cache_mu);
    im.mean_cache = m;
    return m;
}

double DensityModel::variance() const {
    const Impl& im = *impl_;
    if (im.var_closed) return *im.var_closed;
    {
        std::lock_guard lk(im.cache_mu);
        if (im.var_cache) return *im.var_cache;
    }
    const double m = mean();
    double v = expect(*this, [m](double x) { return (x - m) * (x - m); });
    std::lock_guard lk(im.cache_mu);
    im.var_cache = v;
    return v;
}

double DensityModel::quantile(double q) const {
    if (q < 0.0 || q > 1.0)
        throw IncompatibilityError("quantile level outside [0,1]");
    const Impl& im = *impl_;
    if (im.kind == DensityKind::Lattice) {
        const LatticeSpec& ls = *im.lattice;
        double mass = 0.0;
        std::int64_t budget = kLatticeIterBudget;
        for (std::int64_t k = ls.k_lo;; ++k) {
            mass += im.pmf(k);
            if (mass >= q - 1e-15) return ls.point(k);
            if (!ls.infinite() && k >= ls.k_hi) return ls.point(ls.k_hi);
            if (--budget == 0)
                throw BudgetError("lattice quantile walk exceeded budget");
        }
    }
    double lo = im.support.lower, hi = im.support.upper;
    if (std::isinf(lo)) {
        lo = std::isinf(hi) ? -1.0 : hi - 1.0;
        while (cdf(lo) > q && lo > -1e12) lo = lo * 2.0 - 1.0;
    }
    if (std::isinf(hi)) {
        hi = std::max(lo + 1.0, 1.0);
        while (cdf(hi) < q && hi < 1e12) hi = hi * 2.0 + 1.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::fabs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double expect(const DensityModel& d, const RealFn& h, double rel_tol,
              const std::vector<double>& breakpoints) {
    const Impl& im = d.impl();
    if (im.kind == DensityKind::Lattice) {
        return lattice_sum(im, [&](std::int64_t, double x, double p) {
            return p == 0.0 ? 0.0 : h(x) * p;
        });
    }
    QuadOptions opts;
    opts.rel_tol = rel_tol;
    opts.breakpoints = breakpoints;
    auto f = [&](double x) {
        const double p = d.pdf(x);
        return p == 0.0 ? 0.0 : h(x) * p;
    };
    return integrate_or_throw(f, im.support.lower, im.support.upper, opts);
}

double cdf_of(const DensityModel& d, double x) {
    const Impl& im = d.impl();
    if (im.kind == DensityKind::Lattice) {
        const LatticeSpec& ls = *im.lattice;
        if (x < ls.point(ls.k_lo)) return 0.0;
        double mass = 0.0;
        std::int64_t budget = kLatticeIterBudget;
        for (std::int64_t k = ls.k_lo;; ++k) {
            if (ls.point(k) > x + 1e-9 * (1.0 + std::fabs(x))) break;
            mass += im.pmf(k);
            if (!ls.infinite() && k >= ls.k_hi) break;
            if (ls.infinite() && 1.0 - mass < kLatticeTailMass) break;
            if (--budget == 0)
                throw BudgetError("lattice cdf walk exceeded budget");
        }
        return std::min(mass, 1.0);
    }
    if (x <= im.support.lower) return im.support.contains(x) ? 0.0 : (x < im.support.lower ? 0.0 : 0.0);
    if (x >= im.support.upper) return 1.0;
    if (im.cdf_closed) return std::clamp(im.cdf_closed(x), 0.0, 1.0);
    // Cumulative quadrature; use whichever tail is likely smaller.
    QuadOptions opts;
    auto f = [&](double t) { return d.pdf(t); };
    const double lo = im.support.lower, hi = im.support.upper;
    double mid;
    if (std::isfinite(lo) && std::isfinite(hi)) mid = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) mid = lo + 1.0;
    else if (std::isfinite(hi)) mid = hi - 1.0;
    else mid = 0.0;
    if (x <= mid) return std::clamp(integrate_or_throw(f, lo, x, opts), 0.0, 1.0);
    return std::clamp(1.0 - integrate_or_throw(f, x, hi, opts), 0.0, 1.0);
}

// --- continuous families ---------------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.5772156649015328606;

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace

DensityModel make_gaussian(double mu, double sigma2) {
    if (sigma2 <= 0.0) throw IncompatibilityError("gaussian needs sigma2 > 0");
    auto im = std::make_shared<Impl>();
    const double sd = std::sqrt(sigma2);
    im->family = "gaussian";
    im->params = {{"mu", mu}, {"sigma2", sigma2}};
    im->support = {-kInf, kInf, false, false};
    im->pdf = [mu, sigma2, sd](double x) {
        const double z = (x - mu) / sd;
        return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
    };
    im->cdf_closed = [mu, sd](double x) { return norm_cdf((x - mu) / sd); };
    im->logd = [mu, sigma2](double x) { return -(x - mu) / sigma2; };
    im->mean_closed = mu;
    im->var_closed = sigma2;
    return finish(im);
}

DensityModel make_exponential(double lambda) {
    if (lambda <= 0.0) throw IncompatibilityError("exponential needs lambda > 0");
    auto im = std::make_shared<Impl>();
    im->family = "exponential";
    im->params = {{"lambda", lambda}};
    im->support = {0.0, kInf, true, false};
    im->pdf = [lambda](double x) { return lambda * std::exp(-lambda * x); };
    im->cdf_closed = [lambda](double x) {
        return x <= 0.0 ? 0.0 : 1.0 - std::exp(-lambda * x);
    };
    im->logd = [lambda](double) { return -lambda; };
    im->mean_closed = 1.0 / lambda;
    im->var_closed = 1.0 / (lambda * lambda);
    return finish(im);
}

DensityModel make_gamma(double alpha, double beta_scale) {
    if (alpha <= 0.0 || beta_scale <= 0.0)
        throw IncompatibilityError("gamma needs alpha, beta > 0");
    auto im = std::make_shared<Impl>();
    im->family = "gamma";
    im->params = {{"alpha", alpha}, {"beta", beta_scale}};
    im->support = {0.0, kInf, false, false};
    const double logc = -std::lgamma(alpha) - alpha * std::log(beta_scale);
    im->pdf = [alpha, beta_scale, logc](double x) {
        return std::exp(logc + (alpha - 1.0) * std::log(x) - x / beta_scale);
    };
    im->logd = [alpha, beta_scale](double x) {
        return (alpha - 1.0) / x - 1.0 / beta_scale;
    };
    im->mean_closed = alpha * beta_scale;
    im->var_closed = alpha * beta_scale * beta_scale;
    return finish(im);
}

DensityModel make_beta(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw IncompatibilityError("beta needs a, b > 0");
    auto im = std::make_shared<Impl>();
    im->family = "beta";
    im->params = {{"alpha", a}, {"beta", b}};
    im->support = {0.0, 1.0, false, false};
    const double logc = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    im->pdf = [a, b, logc](double x) {
        return std::exp(logc + (a - 1.0) * std::log(x) +
                        (b - 1.0) * std::log1p(-x));
    };
    im->logd = [a, b](double x) {
        return (a - 1.0) / x - (b - 1.0) / (1.0 - x);
    };
    im->mean_closed = a / (a + b);
    im->var_closed = a * b / ((a + b) * (a + b) * (a + b + 1.0));
    return finish(im);
}

DensityModel make_student(double nu) {
    if (nu <= 0.0) throw IncompatibilityError("student needs nu > 0");
    auto im = std::make_shared<Impl>();
    im->family = "student";
    im->params = {{"nu", nu}};
    im->support = {-kInf, kInf, false, false};
    const double logc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                        0.5 * std::log(nu * kPi);
    im->pdf = [nu, logc](double x) {
        return std::exp(logc - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
    };
    im->logd = [nu](double x) { return -(nu + 1.0) * x / (nu + x * x); };
    if (nu > 1.0) im->mean_closed = 0.0;
    if (nu > 2.0) im->var_closed = nu / (nu - 2.0);
    return finish(im);
}

DensityModel make_frechet(double alpha) {
    if (alpha <= 0.0) throw IncompatibilityError("frechet needs alpha > 0");
    auto im = std::make_shared<Impl>();
    im->family = "frechet";
    im->params = {{"alpha", alpha}};
    im->support = {0.0, kInf, false, false};
    im->pdf = [alpha](double x) {
        return alpha * std::pow(x, -alpha - 1.0) * std::exp(-std::pow(x, -alpha));
    };
    im->cdf_closed = [alpha](double x) {
        return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -alpha));
    };
    im->logd = [alpha](double x) {
        return -(alpha + 1.0) / x + alpha * std::pow(x, -alpha - 1.0);
    };
    if (alpha > 1.0) im->mean_closed = std::tgamma(1.0 - 1.0 / alpha);
    if (alpha > 2.0) {
        const double m1 = std::tgamma(1.0 - 1.0 / alpha);
        im->var_closed = std::tgamma(1.0 - 2.0 / alpha) - m1 * m1;
    }
    return finish(im);
}

DensityModel make_gumbel() {
    auto im = std::make_shared<Impl>();
    im->family = "gumbel";
    im->support = {-kInf, kInf, false, false};
    im->pdf = [](double x) { return std::exp(-x - std::exp(-x)); };
    im->cdf_closed = [](double x) { return std::exp(-std::exp(-x)); };
    im->logd = [](double x) { return std::exp(-x) - 1.0; };
    im->mean_closed = kEulerGamma;
    im->var_closed = kPi * kPi / 6.0;
    return finish(im);
}

DensityModel make_pareto(double alpha) {
    if (alpha <= 0.0) throw IncompatibilityError("pareto needs alpha > 0");
    auto im = std::make_shared<Impl>();
    im->family = "pareto";
    im->params = {{"alpha", alpha}};
    im->support = {1.0, kInf, true, false};
    im->pdf = [alpha](double x) { return alpha * std::pow(x, -alpha - 1.0); };
    im->cdf_closed = [alpha](double x) {
        return x <= 1.0 ? 0.0 : 1.0 - std::pow(x, -alpha);
    };
    im->logd = [alpha](double x) { return -(alpha + 1.0) / x; };
    if (alpha > 1.0) im->mean_closed = alpha / (alpha - 1.0);
    if (alpha > 2.0)
        im->var_closed =
            alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
    return finish(im);
}

DensityModel make_uniform01() {
    auto im = std::make_shared<Impl>();
    im->family = "uniform";
    im->support = {0.0, 1.0, true, true};
    im->pdf = [](double) { return 1.0; };
    im->cdf_closed = [](double x) { return std::clamp(x, 0.0, 1.0); };
    im->logd = [](double) { return 0.0; };
    im->mean_closed = 0.5;
    im->var_closed = 1.0 / 12.0;
    return finish(im);
}

DensityModel make_custom_continuous(CustomContinuous spec) {
    auto im = std::make_shared<Impl>();
    im->family = spec.name;
    im->support = spec.support;
    im->pdf = std::move(spec.pdf);
    im->cdf_closed = std::move(spec.cdf);
    im->logd = std::move(spec.log_pdf_deriv);
    im->mean_closed = spec.mean;
    im->var_closed = spec.variance;
    return finish(im);
}

// --- lattice families ------------------------------------------------------

namespace {

std::shared_ptr<Impl> lattice_base(std::string family, double origin,
                                   double spacing, std::int64_t k_lo,
                                   std::int64_t k_hi) {
    if (spacing <= 0.0) throw IncompatibilityError("lattice spacing must be > 0");
    auto im = std::make_shared<Impl>();
    im->kind = DensityKind::Lattice;
    im->family = std::move(family);
    im->lattice = LatticeSpec{origin, spacing, k_lo, k_hi};
    const double hi = k_hi == kInfIndex ? kInf : origin + spacing * double(k_hi);
    im->support = {origin + spacing * double(k_lo), hi, true,
                   k_hi != kInfIndex};
    return im;
}

std::vector<double> poisson_binomial_pmf(const std::vector<double>& ps) {
    std::vector<double> pmf{1.0};
    for (double p : ps) {
        if (p <= 0.0 || p >= 1.0)
            throw IncompatibilityError("poisson-binomial needs p_i in (0,1)");
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            next[k] += pmf[k] * (1.0 - p);
            next[k + 1] += pmf[k] * p;
        }
        pmf = std::move(next);
    }
    return pmf;
}

} // namespace

DensityModel make_bernoulli(double p) {
    if (p <= 0.0 || p >= 1.0) throw IncompatibilityError("bernoulli needs p in (0,1)");
    auto im = lattice_base("bernoulli", 0.0, 1.0, 0, 1);
    im->params = {{"p", p}};
    im->pmf = [p](std::int64_t k) { return k == 0 ? 1.0 - p : p; };
    im->mean_closed = p;
    im->var_closed = p * (1.0 - p);
    return finish(im);
}

DensityModel make_binomial(std::int64_t n, double p) {
    if (n < 1 || p <= 0.0 || p >= 1.0)
        throw IncompatibilityError("binomial needs n >= 1 and p in (0,1)");
    auto im = lattice_base("binomial", 0.0, 1.0, 0, n);
    im->params = {{"n", double(n)}, {"p", p}};
    im->pmf = [n, p](std::int64_t k) {
        if (k < 0 || k > n) return 0.0;
        const double logc = std::lgamma(double(n + 1)) -
                            std::lgamma(double(k + 1)) -
                            std::lgamma(double(n - k + 1));
        return std::exp(logc + double(k) * std::log(p) +
                        double(n - k) * std::log1p(-p));
    };
    im->mean_closed = double(n) * p;
    im->var_closed = double(n) * p * (1.0 - p);
    return finish(im);
}

DensityModel make_poisson(double lambda) {
    if (lambda <= 0.0) throw IncompatibilityError("poisson needs lambda > 0");
    auto im = lattice_base("poisson", 0.0, 1.0, 0, kInfIndex);
    im->params = {{"lambda", lambda}};
    im->pmf = [lambda](std::int64_t k) {
        if (k < 0) return 0.0;
        return std::exp(-lambda + double(k) * std::log(lambda) -
                        std::lgamma(double(k + 1)));
    };
    im->mean_closed = lambda;
    im->var_closed = lambda;
    return finish(im);
}

DensityModel make_poisson_binomial(const std::vector<double>& ps) {
    if (ps.empty()) throw IncompatibilityError("poisson-binomial needs >= 1 component");
    auto pmf = poisson_binomial_pmf(ps);
    auto im = lattice_base("poisson-binomial", 0.0, 1.0, 0,
                           std::int64_t(pmf.size()) - 1);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        im->params["p" + std::to_string(i)] = ps[i];
        mean += ps[i];
        var += ps[i] * (1.0 - ps[i]);
    }
    im->pmf = [pmf](std::int64_t k) {
        return (k < 0 || k >= std::int64_t(pmf.size())) ? 0.0 : pmf[std::size_t(k)];
    };
    im->mean_closed = mean;
    im->var_closed = var;
    return finish(im);
}

DensityModel make_rademacher() {
    auto im = lattice_base("rademacher", -1.0, 2.0, 0, 1);
    im->pmf = [](std::int64_t) { return 0.5; };
    im->mean_closed = 0.0;
    im->var_closed = 1.0;
    return finish(im);
}

DensityModel make_table(double origin, double spacing,
                        const std::vector<double>& pmf_in) {
    if (pmf_in.empty()) throw IncompatibilityError("table pmf is empty");
    double sum = 0.0;
    for (double p : pmf_in) {
        if (p < 0.0) throw IncompatibilityError("table pmf has a negative entry");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
        throw IncompatibilityError("table pmf mass " + std::to_string(sum) +
                                   " is not 1");
    std::vector<double> pmf = pmf_in;
    for (double& p : pmf) p /= sum;
    auto im = lattice_base("table", origin, spacing, 0,
                           std::int64_t(pmf.size()) - 1);
    im->pmf = [pmf](std::int64_t k) {
        return (k < 0 || k >= std::int64_t(pmf.size())) ? 0.0 : pmf[std::size_t(k)];
    };
    return finish(im);
}

// --- expressions & JSON ----------------------------------------------------

ExpressionAst parse_density_expression(const std::string& text,
                                       const SupportInterval& support) {
    ExpressionAst ast = ExpressionAst::parse(text);
    // Probe the formula on an interior grid: evaluation must be total there.
    double lo = std::isinf(support.lower) ? -20.0 : support.lower;
    double hi = std::isinf(support.upper) ? 20.0 : support.upper;
    for (int i = 1; i < 128; ++i) {
        const double x = lo + (hi - lo) * double(i) / 128.0;
        if (!support.contains(x)) continue;
        const double v = ast.eval(x);
        if (!std::isfinite(v) || v < 0.0)
            throw IncompatibilityError(
                "density formula is negative or non-finite at x = " +
                std::to_string(x));
    }
    return ast;
}

DensityModel make_expression_density(const std::string& formula,
                                     const SupportInterval& support) {
    ExpressionAst ast = parse_density_expression(formula, support);
    auto raw = [ast](double x) { return ast.eval(x); };
    QuadResult z = integrate(raw, support.lower, support.upper);
    if (!z.converged || !std::isfinite(z.value) || z.value <= 0.0)
        throw IncompatibilityError(
            "density formula is not normalizable on its support");
    const double norm = z.value;
    auto im = std::make_shared<Impl>();
    im->family = "expr";
    im->support = support;
    im->pdf = [ast, norm](double x) { return ast.eval(x) / norm; };
    im->params = {{"normalizer", norm}};
    return finish(im);
}

DensityModel density_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad density JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("family"))
        throw ParseError("density JSON must be an object with a 'family' key");
    const std::string family = j["family"].get<std::string>();

    auto param = [&](const std::string& key, std::optional<double> dflt =
                                                 std::nullopt) -> double {
        if (j.contains("params") && j["params"].contains(key))
            return j["params"][key].get<double>();
        if (dflt) return *dflt;
        throw ParseError("family '" + family + "' needs parameter '" + key + "'");
    };

    if (family == "gaussian") return make_gaussian(param("mu", 0.0), param("sigma2", 1.0));
    if (family == "exponential") return make_exponential(param("lambda", 1.0));
    if (family == "gamma") return make_gamma(param("alpha"), param("beta", 1.0));
    if (family == "beta") return make_beta(param("alpha"), param("beta"));
    if (family == "student") return make_student(param("nu"));
    if (family == "frechet") return make_frechet(param("alpha"));
    if (family == "gumbel") return make_gumbel();
    if (family == "pareto") return make_pareto(param("alpha"));
    if (family == "uniform") return make_uniform01();
    if (family == "bernoulli") return make_bernoulli(param("p"));
    if (family == "binomial")
        return make_binomial(std::int64_t(param("n")), param("p"));
    if (family == "poisson") return make_poisson(param("lambda"));
    if (family == "rademacher") return make_rademacher();
    if (family == "poisson-binomial") {
        if (!j.contains("p") || !j["p"].is_array())
            throw ParseError("poisson-binomial needs a 'p' array");
        return make_poisson_binomial(j["p"].get<std::vector<double>>());
    }
    if (family == "table") {
        if (!j.contains("lattice") || !j.contains("pmf"))
            throw ParseError("table needs 'lattice' and 'pmf'");
        return make_table(j["lattice"].value("origin", 0.0),
                          j["lattice"].value("spacing", 1.0),
                          j["pmf"].get<std::vector<double>>());
    }
    if (family == "expr") {
        if (!j.contains("formula") || !j.contains("support"))
            throw ParseError("expr needs 'formula' and 'support'");
        auto sup = j["support"];
        if (!sup.is_array() || sup.size() != 2)
            throw ParseError("expr support must be [a, b]");
        auto endpoint = [](const nlohmann::json& v, double inf_sign) {
            if (v.is_string()) {
                const std::string s = v.get<std::string>();
                if (s == "inf" || s == "+inf") return kInf;
                if (s == "-inf") return -kInf;
                throw ParseError("bad support endpoint '" + s + "'");
            }
            const double d = v.get<double>();
            return std::isfinite(d) ? d : inf_sign * kInf;
        };
        SupportInterval si{endpoint(sup[0], -1.0), endpoint(sup[1], 1.0),
                           false, false};
        return make_expression_density(j["formula"].get<std::string>(), si);
    }
    throw ParseError("unknown density family '" + family + "'");
}

} // namespace steinkit
