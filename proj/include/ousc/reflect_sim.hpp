#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ousc/free_boundary.hpp"
#include "ousc/hjb_fd.hpp"

namespace ousc {

// Action boundaries as functions of x: push R up to b1(x) when R < b1(x),
// down to b2(x) when R > b2(x).  Uniform x-table, constant beyond its ends;
// -inf / +inf entries mean no action region on that column.
struct ReflectionBoundary {
    double x_lo = 0, hx = 1;
    std::vector<double> b1, b2;

    double lower(double x) const;
    double upper(double x) const;

    static ReflectionBoundary from_fd(const FdSolution& fd);
    // Inverts strictly increasing g1, g2 on an n-point x-grid spanning their
    // ranges; throws DegenerateGeometry on a flat segment.
    static ReflectionBoundary from_boundary(const BoundarySolution& bsol, int n = 2001);
};

struct PathRecord {
    std::vector<double> t, x, r, xi_plus, xi_minus, discounted_cost;
};

struct SimOptions {
    double dt = 0;          // 0: 0.01 / max(theta, rho)
    double cutoff = 1e-8;   // stop once the discount factor drops below
    int record_paths = 0;   // keep full records of the first n paths
    bool parallel = true;
};

struct SimulationResult {
    double cost_mean = 0, cost_stderr = 0;
    double xi_plus_mean = 0, xi_minus_mean = 0;  // discounted intervention effort
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    double horizon_effective = 0;
    double bias_bound = 0;  // discounted tail beyond the horizon
    // per path, after the initial jump
    std::vector<double> r_min, r_max;
    // steps where both pushes were active (must stay zero)
    std::int64_t two_sided_steps = 0;
    std::vector<PathRecord> records;
};

SimulationResult simulate_reflected(const ModelParams& p, const CostSpec& spec,
                                    const ReflectionBoundary& bnd, double x0, double r0,
                                    std::int64_t n_paths, std::uint64_t seed,
                                    const SimOptions& opts = {});

struct DoNothing {};
struct JumpTo {
    double r = 0;
};
// Reflection at the lines r = lo + slope x and r = hi + slope x; slope 0
// gives constant levels.
struct Band {
    double lo = 0, hi = 0, slope = 0;
};
using ControlPolicy = std::variant<DoNothing, JumpTo, Band>;

SimulationResult simulate_control(const ModelParams& p, const CostSpec& spec,
                                  const ControlPolicy& policy, double x0, double r0,
                                  std::int64_t n_paths, std::uint64_t seed,
                                  const SimOptions& opts = {});

// Interest-rate bracket for capped-slope costs with f_r strictly increasing
// in r: [f_r^-1(rho K - theta b C'), f_r^-1(theta b C' - rho K)], C' =
// C / (rho + theta), C = sup |f_x|.
struct BoundednessReport {
    bool applicable = false;
    std::string reason;
    double lower = 0, upper = 0, margin = 0;
    std::int64_t checked = 0, violations = 0;
    double r_min = 0, r_max = 0;
};

BoundednessReport rate_bracket(const ModelParams& p, const CostSpec& spec);
BoundednessReport boundedness_check(const ModelParams& p, const CostSpec& spec,
                                    const SimulationResult& result, double margin);

std::string simulation_json(const SimulationResult& r);
std::string boundedness_json(const BoundednessReport& r);
void write_paths_csv(const SimulationResult& r, std::ostream& os);

}  // namespace ousc
