#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ousc/free_boundary.hpp"
#include "ousc/model.hpp"

namespace ousc {

// Zero-sum stopping game at fixed r whose value is V_r(., r).  Player 1
// (minimiser) stops and pays +K, player 2 (maximiser) stops and receives -K,
// running payoff H = -theta b V_x + f_r.
struct GameSlice {
    double r = 0;
    std::vector<double> x, u, source;
    double stop_upper = 0;  // where u reaches +K (player 1 stops below it)
    double stop_lower = 0;  // where u reaches -K (player 2 stops above it)
    int iterations = 0;
};

struct GameOptions {
    int max_iter = 200;
};

// Double-obstacle problem -K <= u <= K, (rho - L^r) u = H off the obstacles,
// by policy iteration over {continue, u = K, u = -K} with the same drift
// discretisation as the 2D solver.  vx holds V_x on x_nodes.
GameSlice solve_game_slice(const ModelParams& p, const CostSpec& spec,
                           const std::vector<double>& x_nodes, const std::vector<double>& vx,
                           double r, const GameOptions& opts = {});

// Piecewise-linear running payoff on a uniform x-table, constant beyond it.
struct PayoffTable {
    double x_lo = 0, hx = 1;
    std::vector<double> h;
    double operator()(double x) const;
    double sup_abs() const;
};

PayoffTable payoff_from_boundary(const ModelParams& p, const CostSpec& spec,
                                 const BoundarySolution& bsol, double r, int n = 1001);
PayoffTable payoff_from_vx(const ModelParams& p, const CostSpec& spec,
                           const std::vector<double>& x_nodes, const std::vector<double>& vx,
                           double r);

struct SaddleOptions {
    double dt = 0;                 // 0: 0.01 / max(theta, rho)
    double discount_cutoff = 1e-10;
    bool bridge_correction = false;
    bool parallel = true;
};

// Stopping rules: player 1 stops once X <= sigma_level, player 2 once
// X >= tau_level.
struct StoppingRule {
    double sigma_level = 0, tau_level = 0;
};

struct SaddleEstimate {
    double estimate = 0, std_error = 0;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    double stopped_fraction = 1;
    double bias_bound = 0;
    std::string warning;
};

SaddleEstimate simulate_game(const ModelParams& p, const PayoffTable& h, const StoppingRule& rule,
                             double x, double r, std::int64_t n_paths, std::uint64_t seed,
                             const SaddleOptions& opts = {});

// Saddle pair read off the boundary solution: sigma* at g2(r), tau* at g1(r).
SaddleEstimate simulate_saddle(const ModelParams& p, const CostSpec& spec,
                               const BoundarySolution& bsol, double x, double r,
                               std::int64_t n_paths, std::uint64_t seed,
                               const SaddleOptions& opts = {});

void write_game_csv(const GameSlice& g, std::ostream& os);
std::string saddle_json(const SaddleEstimate& e);

}  // namespace ousc
