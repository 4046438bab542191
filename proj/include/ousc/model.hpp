#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "ousc/params.hpp"

namespace ousc {

struct CostValue {
    double f = 0, fx = 0, fr = 0;
    double fxx = 0, frr = 0, frx = 0;
};

// f = alpha (x - x~)^2 + beta (r - r~)^2 - 2 gamma (x - x~)(r - r~).
// gamma = 0 is the separable case; 0 <= gamma^2 <= alpha beta keeps f convex
// and nonnegative, gamma >= 0 keeps f_r nonincreasing in x.
struct QuadraticCost {
    double alpha = 1.0, x_tilde = 0.0, beta = 1.0, r_tilde = 0.0, gamma = 0.0;
    bool operator==(const QuadraticCost&) const = default;
};

// alpha x^p on x > 0, beta |x|^q on x <= 0, plus kappa (r - r~)^2.
// With x_cap > 0 the x-part continues linearly beyond |x| = x_cap, which
// bounds |f_x| by max(alpha p cap^(p-1), beta q cap^(q-1)).
struct AsymmetricPowerCost {
    double alpha = 1.0, p = 2.0, beta = 1.0, q = 2.0;
    double kappa = 0.0, r_tilde = 0.0, x_cap = 0.0;
    bool operator==(const AsymmetricPowerCost&) const = default;
};

// User-supplied cost; not checked against the convexity/monotonicity
// requirements of the control problem.
struct TabulatedCost {
    std::function<CostValue(double, double)> eval;
    bool operator==(const TabulatedCost&) const { return false; }
};

using CostSpec = std::variant<QuadraticCost, AsymmetricPowerCost, TabulatedCost>;

void validate_cost(const CostSpec& spec);
std::string cost_variant_name(const CostSpec& spec);

CostValue cost_eval(const CostSpec& spec, double x, double r);

// Bound on |f_x| when it exists (capped asymmetric power).
std::optional<double> cost_fx_bound(const CostSpec& spec);

enum class VhatWhich { value, dx, dr, drx, dxx };

// Expected discounted running cost of the uncontrolled state.
// Closed form: quadratic costs only (throws DomainError otherwise).
double v_hat_closed(const ModelParams& p, const CostSpec& spec, double x, double r, VhatWhich which);
// Green-function route: any cost.
double v_hat_green(const ModelParams& p, const CostSpec& spec, double x, double r, VhatWhich which);
// Closed form where available, Green route otherwise.
double v_hat(const ModelParams& p, const CostSpec& spec, double x, double r, VhatWhich which);

// R[g](x) = int G(x, y; r) g(y) m'(y; r) dy and its x-derivative, by adaptive
// Gauss-Kronrod on [mu_bar - L sd, mu_bar + L sd], L = 10 doubled until the
// estimate stops moving (relative 1e-8).
struct ResolventValue {
    double value = 0, dx = 0;
};
ResolventValue resolvent(const ModelParams& p, const std::function<double(double)>& g, double x,
                         double r);

}  // namespace ousc
