#include "ousc/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ousc/errors.hpp"
#include "ousc/ou_special.hpp"

namespace ousc {

void ModelParams::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError(std::string(key) + " must be positive and finite");
    };
    positive(theta, "model.theta");
    positive(eta, "model.eta");
    positive(rho, "model.rho");
    positive(cost_k, "model.K");
    if (!std::isfinite(mu)) throw DomainError("model.mu must be finite");
    if (!std::isfinite(b)) throw DomainError("model.b must be finite");
}

namespace {

struct Overloaded {
    const double x, r;
    CostValue operator()(const QuadraticCost& c) const {
        const double dx = x - c.x_tilde, dr = r - c.r_tilde;
        CostValue v;
        v.f = c.alpha * dx * dx + c.beta * dr * dr - 2.0 * c.gamma * dx * dr;
        v.fx = 2.0 * c.alpha * dx - 2.0 * c.gamma * dr;
        v.fr = 2.0 * c.beta * dr - 2.0 * c.gamma * dx;
        v.fxx = 2.0 * c.alpha;
        v.frr = 2.0 * c.beta;
        v.frx = -2.0 * c.gamma;
        return v;
    }
    CostValue operator()(const AsymmetricPowerCost& c) const {
        CostValue v;
        auto branch = [&](double coef, double pw, double a, double sgn) {
            // a = |x| >= 0, sgn = d|x|/dx
            if (c.x_cap > 0.0 && a > c.x_cap) {
                const double slope = coef * pw * std::pow(c.x_cap, pw - 1.0);
                v.f = coef * std::pow(c.x_cap, pw) + slope * (a - c.x_cap);
                v.fx = sgn * slope;
                v.fxx = 0.0;
            } else {
                v.f = coef * std::pow(a, pw);
                v.fx = sgn * coef * pw * std::pow(a, pw - 1.0);
                v.fxx = a > 0.0 ? coef * pw * (pw - 1.0) * std::pow(a, pw - 2.0)
                                : (pw == 2.0 ? 2.0 * coef : 0.0);
            }
        };
        if (x > 0.0) branch(c.alpha, c.p, x, 1.0);
        else branch(c.beta, c.q, -x, -1.0);
        const double dr = r - c.r_tilde;
        v.f += c.kappa * dr * dr;
        v.fr = 2.0 * c.kappa * dr;
        v.frr = 2.0 * c.kappa;
        return v;
    }
    CostValue operator()(const TabulatedCost& c) const { return c.eval(x, r); }
};

}  // namespace

CostValue cost_eval(const CostSpec& spec, double x, double r) {
    return std::visit(Overloaded{x, r}, spec);
}

void validate_cost(const CostSpec& spec) {
    auto nonneg = [](double v, const char* key) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError(std::string(key) + " must be nonnegative and finite");
    };
    if (auto* q = std::get_if<QuadraticCost>(&spec)) {
        nonneg(q->alpha, "cost.alpha");
        nonneg(q->beta, "cost.beta");
        nonneg(q->gamma, "cost.gamma");
        if (!std::isfinite(q->x_tilde)) throw DomainError("cost.x_tilde must be finite");
        if (!std::isfinite(q->r_tilde)) throw DomainError("cost.r_tilde must be finite");
        if (q->gamma * q->gamma > q->alpha * q->beta)
            throw DomainError("cost.gamma must satisfy gamma^2 <= alpha*beta (convexity)");
    } else if (auto* a = std::get_if<AsymmetricPowerCost>(&spec)) {
        nonneg(a->alpha, "cost.alpha");
        nonneg(a->beta, "cost.beta");
        nonneg(a->kappa, "cost.kappa");
        nonneg(a->x_cap, "cost.x_cap");
        if (!(a->p > 1.0)) throw DomainError("cost.p must exceed 1");
        if (!(a->q > 1.0)) throw DomainError("cost.q must exceed 1");
        if (!std::isfinite(a->r_tilde)) throw DomainError("cost.r_tilde must be finite");
    } else {
        if (!std::get<TabulatedCost>(spec).eval)
            throw DomainError("cost: tabulated cost without an evaluator");
    }
}

std::string cost_variant_name(const CostSpec& spec) {
    switch (spec.index()) {
        case 0: return "quadratic";
        case 1: return "asymmetric_power";
        default: return "tabulated";
    }
}

std::optional<double> cost_fx_bound(const CostSpec& spec) {
    if (auto* a = std::get_if<AsymmetricPowerCost>(&spec)) {
        if (a->x_cap > 0.0)
            return std::max(a->alpha * a->p * std::pow(a->x_cap, a->p - 1.0),
                            a->beta * a->q * std::pow(a->x_cap, a->q - 1.0));
    }
    return std::nullopt;
}

double v_hat_closed(const ModelParams& p, const CostSpec& spec, double x, double r,
                    VhatWhich which) {
    const auto* q = std::get_if<QuadraticCost>(&spec);
    if (!q) throw DomainError("v_hat_closed: closed form exists for the quadratic cost only");
    const double rho = p.rho, th = p.theta, b = p.b;
    const double m = mu_bar(p, r);
    const double d = x - m;           // deviation from the mean-reversion level
    const double e = m - q->x_tilde;  // level relative to the target
    const double dr = r - q->r_tilde;
    const double k0 = 1.0 / rho, k1 = 1.0 / (rho + th), k2 = 1.0 / (rho + 2.0 * th);
    const double al = q->alpha, be = q->beta, ga = q->gamma;
    switch (which) {
        case VhatWhich::value:
            return al * (e * e * k0 + 2.0 * e * d * k1 + d * d * k2 + p.eta * p.eta * k0 * k2) +
                   be * dr * dr * k0 - 2.0 * ga * dr * (e * k0 + d * k1);
        case VhatWhich::dx:
            return al * (2.0 * e * k1 + 2.0 * d * k2) - 2.0 * ga * dr * k1;
        case VhatWhich::dxx:
            return 2.0 * al * k2;
        case VhatWhich::dr:
            // d(d)/dr = b, d(e)/dr = -b
            return al * (-2.0 * b * e * k0 + 2.0 * k1 * (b * e - b * d) + 2.0 * b * d * k2) +
                   2.0 * be * dr * k0 - 2.0 * ga * (e * k0 + d * k1) -
                   2.0 * ga * dr * (-b * k0 + b * k1);
        case VhatWhich::drx:
            return al * (-2.0 * b * k1 + 2.0 * b * k2) - 2.0 * ga * k1;
    }
    return 0.0;
}

namespace {

std::vector<double> breakpoints(const CostSpec& spec) {
    if (auto* a = std::get_if<AsymmetricPowerCost>(&spec)) {
        std::vector<double> bp{0.0};
        if (a->x_cap > 0.0) {
            bp.push_back(-a->x_cap);
            bp.push_back(a->x_cap);
        }
        return bp;
    }
    return {};
}

double integrate_pieces(const std::function<double(double)>& fn, double lo, double hi,
                        std::vector<double> cuts) {
    if (!(hi > lo)) return 0.0;
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double c) { return c <= lo || c >= hi; }),
               cuts.end());
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0, a = lo;
    cuts.push_back(hi);
    for (double b : cuts) {
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, 15,
                                                                               1e-11, &err);
        a = b;
    }
    return total;
}

ResolventValue resolvent_impl(const ModelParams& p, const std::function<double(double)>& g,
                              double x, double r, const std::vector<double>& cuts) {
    const double m = mu_bar(p, r);
    const double s = x - m;
    const EigenEval ps = psi_eval(p, s, 1), ph = phi_eval(p, s, 1);
    const double lw = std::log(wronskian(p, r));
    const double sd = p.stat_sd();

    auto eval = [&](double half) {
        const double lo = std::min(x, m - half * sd), hi = std::max(x, m + half * sd);
        // pieces below x weighted by psi(y), above x by phi(y); the x-dependent
        // factor is folded into the exponent to stay in range
        auto lower = [&](double y, double lfac) {
            return g(y) * std::exp(psi_eval(p, y - m, 0).log_value +
                                   log_speed_density(p, y, r) + lfac - lw);
        };
        auto upper = [&](double y, double lfac) {
            return g(y) * std::exp(phi_eval(p, y - m, 0).log_value +
                                   log_speed_density(p, y, r) + lfac - lw);
        };
        ResolventValue out;
        const double i_lo =
            integrate_pieces([&](double y) { return lower(y, ph.log_value); }, lo, x, cuts);
        const double i_hi =
            integrate_pieces([&](double y) { return upper(y, ps.log_value); }, x, hi, cuts);
        out.value = i_lo + i_hi;
        // derivative: swap phi(s) -> phi'(s), psi(s) -> psi'(s)
        out.dx = -i_lo * std::exp(ph.log_abs_d1 - ph.log_value) +
                 i_hi * std::exp(ps.log_abs_d1 - ps.log_value);
        return out;
    };

    double half = 10.0;
    ResolventValue prev = eval(half);
    for (int k = 0; k < 4; ++k) {
        half *= 2.0;
        const ResolventValue cur = eval(half);
        const double scale = std::max(std::abs(cur.value), 1e-300);
        if (std::abs(cur.value - prev.value) <= 1e-8 * scale) return cur;
        prev = cur;
    }
    throw NumericError("resolvent: truncation did not settle", std::abs(prev.value));
}

}  // namespace

ResolventValue resolvent(const ModelParams& p, const std::function<double(double)>& g, double x,
                         double r) {
    return resolvent_impl(p, g, x, r, {});
}

double v_hat_green(const ModelParams& p, const CostSpec& spec, double x, double r,
                   VhatWhich which) {
    const auto cuts = breakpoints(spec);
    const auto f = [&](double y) { return cost_eval(spec, y, r).f; };
    if (which == VhatWhich::value) return resolvent_impl(p, f, x, r, cuts).value;
    if (which == VhatWhich::dx) return resolvent_impl(p, f, x, r, cuts).dx;
    const ResolventValue v = resolvent_impl(p, f, x, r, cuts);
    const CostValue c = cost_eval(spec, x, r);
    const double vxx =
        2.0 / (p.eta * p.eta) * (p.rho * v.value - p.theta * (mu_bar(p, r) - x) * v.dx - c.f);
    if (which == VhatWhich::dxx) return vxx;
    const auto src = [&](double y) {
        const CostValue cy = cost_eval(spec, y, r);
        return cy.fr - p.b * cy.fx;
    };
    const ResolventValue w = resolvent_impl(p, src, x, r, cuts);
    if (which == VhatWhich::dr) return p.b * v.dx + w.value;
    return p.b * vxx + w.dx;  // drx
}

double v_hat(const ModelParams& p, const CostSpec& spec, double x, double r, VhatWhich which) {
    if (std::holds_alternative<QuadraticCost>(spec)) return v_hat_closed(p, spec, x, r, which);
    return v_hat_green(p, spec, x, r, which);
}

}  // namespace ousc
