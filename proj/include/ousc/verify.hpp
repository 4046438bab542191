#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ousc/dynkin.hpp"
#include "ousc/free_boundary.hpp"
#include "ousc/hjb_fd.hpp"
#include "ousc/reflect_sim.hpp"

namespace ousc {

// One row of the cross-oracle report: `value` compared against `limit`.
struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0, limit = 0;
    std::string detail;
};

struct VerifySettings {
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 20240601;
    FdOptions fd;
    FbOptions fb;
    SimOptions sim;
};

using Checks = std::vector<CheckResult>;

// psi/phi ODE residual on |s| <= 5, Wronskian constancy, resolvent of 1.
Checks check_special(const ModelParams& p);
// Closed form vs Green route at 20 random points (quadratic cost only) and
// the finite-difference residual of (L - rho) Vhat + f.
Checks check_vhat(const ModelParams& p, const CostSpec& spec, std::uint64_t seed);
// Gradient constraint, discrete convexity, sign of the mixed difference and
// PDE residual on the inaction set.
Checks check_fd(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                const FdOptions& opts);
// Three FD solves on one box: (n+1)/2, n and 2n-1 nodes per axis.
struct RefinementStudy {
    FdSolution coarse, mid, fine;
};
RefinementStudy refinement_study(const ModelParams& p, const CostSpec& spec, const Grid2D& base,
                                 const FdOptions& opts);
// Max-norm self-convergence order on the coarse nodes, 10% margin dropped.
Checks check_convergence(const RefinementStudy& st);
// Monotone b1, b2; g1 > g2; g2 <= zeta2 < zeta1 <= g1 (zeta from FD V_x).
Checks check_geometry(const ModelParams& p, const CostSpec& spec, const FdSolution& fd);
// max |v_rx| at the first I node and last D node of each row, on the mid
// and fine grids: ratio >= 1.5.
Checks check_smooth_fit(const RefinementStudy& st);
// Residuals and distance to the FD boundaries.
Checks check_free_boundary(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                           const BoundarySolution& bsol);
// b = 0 instance: one outer pass and agreement with fine 1D game slices.
Checks check_decoupled(const ModelParams& p, const CostSpec& spec, double cell);
Checks check_dynkin(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                    const BoundarySolution& bsol, const VerifySettings& s);
Checks check_optimality(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                        const VerifySettings& s);
// Reflected rate paths stay in the analytic bracket (capped-slope costs).
Checks check_boundedness(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                         const VerifySettings& s);

// The b = 0 instance used by check_decoupled: separable x-cost plus a
// cross term so that both boundaries are finite.
ModelParams decoupled_params(const ModelParams& p);
CostSpec decoupled_cost();
// Capped asymmetric power cost with kappa = 1 (bounded-rate regime).
CostSpec bounded_rate_cost();

// Everything one run of the suite needs.
struct SuiteInputs {
    ModelParams p;
    CostSpec spec;
    FdSolution fd;
    BoundarySolution bsol;
    VerifySettings s;
};

inline constexpr int kSuiteCriteria = 9;
// Checks for criterion k in 1..9 (determinism is a property of the CLI and
// checked outside).
Checks run_criterion(int k, const SuiteInputs& in);

std::string checks_json(const Checks& c);
bool all_passed(const Checks& c);

}  // namespace ousc
