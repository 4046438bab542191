#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ousc/hjb_fd.hpp"
#include "ousc/model.hpp"

namespace ousc {

// Boundaries g1 > g2 and the coefficients of
//   V(x, r) = A(r) psi(x - mu_bar(r)) + B(r) phi(x - mu_bar(r)) + Vhat(x, r)
// on the inaction band, sampled on an r-grid.
struct BoundarySolution {
    std::vector<double> r, g1, g2, A, B, A_prime, B_prime;
    std::vector<double> res1, res2;  // scaled residuals of the two integral equations
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // max boundary update per outer pass

    struct Excluded {
        double r;
        std::string reason;
    };
    std::vector<Excluded> excluded;

    // linear interpolation in r (clamped to the end nodes)
    double interp(const std::vector<double>& field, double rr) const;
};

struct FbOptions {
    double tol = 1e-7;          // outer loop: max boundary update
    double newton_tol = 1e-12;  // per-node scaled residual
    double omega = 0.5;         // damping, halved when the update grows
    int max_outer = 200;
    int max_newton = 40;
    double step_max = 0.1;      // Newton step cap (x units)
    // Nodes whose uncontrolled mode grows by more than exp(growth_bound)
    // across the band are left out (see README).  Ignored when b = 0.
    double growth_bound = 5.0;
    // Variant of the coefficient ODE with 1 in place of b on the phi term;
    // off by default.
    bool unit_phi_coefficient = false;
    bool parallel = true;
};

// Starting point for solve_system: boundaries per node and the two anchor
// values A(r_hi), B(r_lo).
struct FbStart {
    std::vector<double> r, g1, g2;
    double a_top = 0, b_bottom = 0;
    std::vector<BoundarySolution::Excluded> excluded;
};

// H = -theta b V_x + f_r on the band, with V_x from the A/B representation.
double h_source(const ModelParams& p, const CostSpec& spec, const BoundarySolution& bsol, double x,
                double r);

struct FeResidual {
    double res1 = 0, res2 = 0;      // raw left-hand sides
    double scale1 = 0, scale2 = 0;  // K psi'/S' and K |phi'/S'| sums
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;  // d(res1,res2)/d(g1,g2)
    double scaled_max() const;
};

FeResidual integral_residuals(const ModelParams& p, const CostSpec& spec, double A, double B,
                              double r, double g1, double g2);
FeResidual integral_residuals(const ModelParams& p, const CostSpec& spec,
                              const BoundarySolution& bsol, double r, double g1, double g2);

struct Slope {
    double a = 0, b = 0;
};
Slope coefficient_slope(const ModelParams& p, const CostSpec& spec, double r, double g1, double g2,
                        double A, double B, bool unit_phi_coefficient = false);
Slope coefficient_slope(const ModelParams& p, const CostSpec& spec, const BoundarySolution& bsol,
                        double r, bool unit_phi_coefficient = false);

// zeta1 = smallest x with theta b V_x - f_r - rho K >= 0,
// zeta2 = largest x with theta b V_x - f_r + rho K <= 0, by bisection on
// [x_lo, x_hi]; +-inf when the map does not cross.
struct ZetaPair {
    double zeta1 = 0, zeta2 = 0;
};
ZetaPair zeta_bounds(const ModelParams& p, const CostSpec& spec,
                     const std::function<double(double)>& vx, double r, double x_lo, double x_hi);

// A, B at one FD r-row from two points two cells inside the band.
struct CoefficientFit {
    double A = 0, B = 0;
};
CoefficientFit fit_coefficients(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                                int j);

// Nodes of the FD grid where both boundaries sit well inside the x-range.
FbStart start_from_fd(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                      double growth_bound = FbOptions{}.growth_bound);
// Zeta curves from Vhat_x as the boundary guess and zero anchors.
FbStart start_from_zeta(const ModelParams& p, const CostSpec& spec, const std::vector<double>& r,
                        double x_lo, double x_hi,
                        double growth_bound = FbOptions{}.growth_bound);

BoundarySolution solve_system(const ModelParams& p, const CostSpec& spec, const FbStart& start,
                              const FbOptions& opts = {});

void write_boundary_csv(const BoundarySolution& s, std::ostream& os);
BoundarySolution read_boundary_csv(std::istream& is);

}  // namespace ousc
