#pragma once

#include <vector>

#include "ousc/params.hpp"

namespace ousc {

// Gamma function on the positive axis.
double gamma_fn(double z);
double log_gamma_fn(double z);

// log of  int_0^inf t^(p-1) exp(-t^2/2 + a t) dt,  p > 0.
// Trapezoid rule in u = log t, centred on the integrand peak and halved until
// two successive estimates agree to 1e-13.
double log_gauss_moment(double p, double a);

// Parabolic cylinder function D_beta(x) for beta < 0.
double cylinder_d(double beta, double x);
double log_cylinder_d(double beta, double x);

struct EigenEval {
    double x = 0;          // shifted argument s = x - mu_bar(r)
    double value = 0;
    double d1 = 0;
    double d2 = 0;
    double log_value = 0;
    double log_abs_d1 = 0;
};

// psi (increasing) and phi (decreasing) fundamental solutions of
//   eta^2/2 u'' - theta s u' - rho u = 0
// in the shifted variable s.  psi^(k)(s) = c^k M_k(cs) / Gamma(nu) with
// M_k(a) = int t^(nu-1+k) exp(-t^2/2 + a t) dt, and phi(s) = psi(-s).
// Orders above max_order are left at zero.
EigenEval psi_eval(const ModelParams& p, double s, int max_order = 2);
EigenEval phi_eval(const ModelParams& p, double s, int max_order = 2);
double psi(const ModelParams& p, double s, int order = 0);
double phi(const ModelParams& p, double s, int order = 0);

// S'(x; r) with base point mu_bar(r), and m'(x; r) = 2 / (eta^2 S').
double scale_density(const ModelParams& p, double x, double r);
double log_scale_density(const ModelParams& p, double x, double r);
double speed_density(const ModelParams& p, double x, double r);
double log_speed_density(const ModelParams& p, double x, double r);

// (psi' phi - psi phi') / S' evaluated at s = 0.
double wronskian(const ModelParams& p, double r = 0.0);
// normalised Wronskian at an arbitrary shifted point, composed in log space
double wronskian_at(const ModelParams& p, double s);

double green(const ModelParams& p, double x, double y, double r);
double log_green(const ModelParams& p, double x, double y, double r);

// Immutable table of psi/phi and densities on an x-grid at fixed r.
class CharacteristicsCache {
public:
    CharacteristicsCache(const ModelParams& p, double r, std::vector<double> x_grid);

    double r() const { return r_; }
    const std::vector<double>& x_grid() const { return x_; }
    const std::vector<EigenEval>& psi() const { return psi_; }
    const std::vector<EigenEval>& phi() const { return phi_; }
    const std::vector<double>& scale_density() const { return scale_; }
    const std::vector<double>& speed_density() const { return speed_; }
    double wronskian() const { return w_; }
    // max relative deviation of the pointwise normalised Wronskian
    double wronskian_spread() const { return spread_; }

private:
    double r_;
    std::vector<double> x_;
    std::vector<EigenEval> psi_, phi_;
    std::vector<double> scale_, speed_;
    double w_ = 0, spread_ = 0;
};

}  // namespace ousc
