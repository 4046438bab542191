#include "ousc/ou_special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ousc/errors.hpp"

namespace ousc {

namespace {

constexpr double kDropLog = 46.0;  // e^-46 ~ 1e-20 relative to the peak

double log_integrand(double p, double a, double u) {
    const double t = std::exp(u);
    return p * u - 0.5 * t * t + a * t;
}

// Sum over the nodes u_A - j h, j >= 1, of t^p exp(a t - t^2/2), using the
// Taylor series of exp(a t - t^2/2) and the geometric sum for each power.
double left_tail_sum(double p, double a, double u_a, double h, double log_shift) {
    const double t_a = std::exp(u_a);
    double g_prev2 = 0.0, g_prev = 1.0;  // g_{n-2}, g_{n-1}
    double sum = 0.0;
    for (int n = 0; n < 200; ++n) {
        double g_n;
        if (n == 0) g_n = 1.0;
        else if (n == 1) g_n = a;
        else g_n = (a * g_prev - g_prev2) / n;
        if (n >= 1) { g_prev2 = g_prev; g_prev = g_n; }
        const double lam = p + n;
        const double q = std::exp(-lam * h);
        const double term = g_n * std::exp(lam * u_a - log_shift) * q / (1.0 - q);
        sum += term;
        // g_n t^n can vanish for odd n (a = 0): require two small terms in a row
        const double mag = std::abs(g_n) * std::pow(t_a, n) + std::abs(g_prev2) * std::pow(t_a, n - 1);
        if (n > 4 && mag < 1e-18) break;
    }
    return sum;
}

}  // namespace

double gamma_fn(double z) {
    if (!(z > 0.0)) throw DomainError("gamma_fn: argument must be positive");
    return std::tgamma(z);
}

double log_gamma_fn(double z) {
    if (!(z > 0.0)) throw DomainError("log_gamma_fn: argument must be positive");
    return std::lgamma(z);
}

double log_gauss_moment(double p, double a) {
    if (!(p > 0.0)) throw DomainError("log_gauss_moment: power must be positive");
    const double disc = std::sqrt(a * a + 4.0 * p);
    const double t_star = a >= 0.0 ? 0.5 * (a + disc) : 2.0 * p / (disc - a);
    const double u_star = std::log(t_star);
    const double f_star = log_integrand(p, a, u_star);
    const double sigma = 1.0 / std::sqrt(t_star * t_star + p);
    // below this t the Taylor tail converges fast
    const double t_low = 0.25 / (1.0 + std::abs(a));
    const double u_low = std::log(t_low);

    auto estimate = [&](double h) {
        double s = 1.0;  // j = 0
        for (int j = 1;; ++j) {
            const double f = log_integrand(p, a, u_star + j * h) - f_star;
            s += std::exp(f);
            if (f < -kDropLog) break;
        }
        int j = -1;
        bool tail = false;
        for (;; --j) {
            const double u = u_star + j * h;
            if (u <= u_low) { tail = true; break; }
            const double f = log_integrand(p, a, u) - f_star;
            s += std::exp(f);
            if (f < -kDropLog) break;
        }
        if (tail) s += left_tail_sum(p, a, u_star + (j + 1) * h, h, f_star);
        return h * s;
    };

    double h = std::min(0.2, 0.5 * sigma);
    double prev = estimate(h);
    for (int level = 0; level < 8; ++level) {
        h *= 0.5;
        const double cur = estimate(h);
        if (!(cur > 0.0) || !std::isfinite(cur))
            throw NumericError("log_gauss_moment: non-finite quadrature");
        if (std::abs(cur - prev) <= 1e-13 * cur) return f_star + std::log(cur);
        prev = cur;
    }
    throw NumericError("log_gauss_moment: trapezoid refinement did not settle",
                       std::abs(prev));
}

double log_cylinder_d(double beta, double x) {
    if (!(beta < 0.0)) throw DomainError("cylinder_d: order must be negative");
    return -0.25 * x * x - std::lgamma(-beta) + log_gauss_moment(-beta, -x);
}

double cylinder_d(double beta, double x) { return std::exp(log_cylinder_d(beta, x)); }

namespace {

EigenEval eigen_eval(const ModelParams& p, double s, double sign, int max_order) {
    const double nu = p.nu();
    const double c = p.c();
    const double lg = std::lgamma(nu);
    const double a = sign * c * s;
    const double l0 = log_gauss_moment(nu, a) - lg;
    EigenEval e;
    e.x = s;
    e.log_value = l0;
    e.value = std::exp(l0);
    if (max_order >= 1) {
        e.log_abs_d1 = log_gauss_moment(nu + 1.0, a) - lg + std::log(c);
        e.d1 = sign * std::exp(e.log_abs_d1);
    }
    if (max_order >= 2)
        e.d2 = std::exp(log_gauss_moment(nu + 2.0, a) - lg + 2.0 * std::log(c));
    return e;
}

}  // namespace

EigenEval psi_eval(const ModelParams& p, double s, int max_order) {
    return eigen_eval(p, s, +1.0, max_order);
}
EigenEval phi_eval(const ModelParams& p, double s, int max_order) {
    return eigen_eval(p, s, -1.0, max_order);
}

static double pick(const EigenEval& e, int order) {
    switch (order) {
        case 0: return e.value;
        case 1: return e.d1;
        case 2: return e.d2;
        default: throw DomainError("eigenfunction order must be 0, 1 or 2");
    }
}

double psi(const ModelParams& p, double s, int order) {
    return pick(psi_eval(p, s, order), order);
}
double phi(const ModelParams& p, double s, int order) {
    return pick(phi_eval(p, s, order), order);
}

double log_scale_density(const ModelParams& p, double x, double r) {
    const double d = x - mu_bar(p, r);
    return p.theta * d * d / (p.eta * p.eta);
}

double scale_density(const ModelParams& p, double x, double r) {
    return std::exp(log_scale_density(p, x, r));
}

double log_speed_density(const ModelParams& p, double x, double r) {
    return std::log(2.0 / (p.eta * p.eta)) - log_scale_density(p, x, r);
}

double speed_density(const ModelParams& p, double x, double r) {
    return std::exp(log_speed_density(p, x, r));
}

double wronskian_at(const ModelParams& p, double s) {
    const EigenEval a = psi_eval(p, s, 1);
    const EigenEval b = phi_eval(p, s, 1);
    const double log_ratio =
        std::log(std::exp(a.log_abs_d1 - a.log_value) + std::exp(b.log_abs_d1 - b.log_value));
    return std::exp(a.log_value + b.log_value + log_ratio - p.theta * s * s / (p.eta * p.eta));
}

double wronskian(const ModelParams& p, double /*r*/) { return wronskian_at(p, 0.0); }

double log_green(const ModelParams& p, double x, double y, double r) {
    const double m = mu_bar(p, r);
    const double lo = std::min(x, y) - m;
    const double hi = std::max(x, y) - m;
    return psi_eval(p, lo, 0).log_value + phi_eval(p, hi, 0).log_value - std::log(wronskian(p, r));
}

double green(const ModelParams& p, double x, double y, double r) {
    return std::exp(log_green(p, x, y, r));
}

CharacteristicsCache::CharacteristicsCache(const ModelParams& p, double r,
                                           std::vector<double> x_grid)
    : r_(r), x_(std::move(x_grid)) {
    p.validate();
    if (!std::is_sorted(x_.begin(), x_.end()))
        throw DomainError("CharacteristicsCache: x_grid must be sorted");
    w_ = ousc::wronskian(p, r);
    const double m = mu_bar(p, r);
    psi_.reserve(x_.size());
    phi_.reserve(x_.size());
    for (double x : x_) {
        const double s = x - m;
        psi_.push_back(psi_eval(p, s));
        phi_.push_back(phi_eval(p, s));
        scale_.push_back(ousc::scale_density(p, x, r));
        speed_.push_back(ousc::speed_density(p, x, r));
        const EigenEval& a = psi_.back();
        const EigenEval& b = phi_.back();
        const double lw = a.log_value + b.log_value +
                          std::log(std::exp(a.log_abs_d1 - a.log_value) +
                                   std::exp(b.log_abs_d1 - b.log_value)) -
                          log_scale_density(p, x, r);
        spread_ = std::max(spread_, std::abs(std::expm1(lw - std::log(w_))));
    }
    if (spread_ > 1e-8)
        throw NumericError("CharacteristicsCache: Wronskian not constant across grid", spread_);
}

}  // namespace ousc
