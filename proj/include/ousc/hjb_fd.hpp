#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "ousc/model.hpp"

namespace ousc {

struct Grid2D {
    double x_lo = -3.0, x_hi = 3.0;
    int nx = 201;
    double r_lo = -0.65, r_hi = 0.65;
    int nr = 201;

    void validate() const;
    double hx() const { return (x_hi - x_lo) / (nx - 1); }
    double hr() const { return (r_hi - r_lo) / (nr - 1); }
    double x(int i) const { return x_lo + i * hx(); }
    double r(int j) const { return r_lo + j * hr(); }
    bool operator==(const Grid2D&) const = default;
};

enum class Region : char { I = 'I', C = 'C', D = 'D' };

enum class FdMethod { howard, psor };

struct FdOptions {
    double tol = 1e-8;
    int max_iter = 200;           // policy iterations
    FdMethod method = FdMethod::howard;
    double omega = 1.2;           // PSOR relaxation
    long max_sweeps = 400000;     // PSOR sweeps
    bool parallel = true;
    // Rows next to r_lo (r_hi) must lie entirely in I (D); otherwise the
    // forced edge conditions are not consistent with the solution.
    bool require_edge_action = true;
};

inline constexpr double kAbsent = std::numeric_limits<double>::infinity();

struct BoundarySamples {
    std::vector<double> b1, b2;  // per x-node, r-values; +-inf when absent
    std::vector<double> g1, g2;  // per r-node, x-values; +-inf when absent
};

struct FdSolution {
    Grid2D grid;
    std::vector<double> v, v_x, v_r, v_rx;
    std::vector<Region> region;
    BoundarySamples bounds;
    double residual_norm = 0;
    double band = 0;
    int iterations = 0;
    double cost_k = 0;

    int idx(int i, int j) const { return i * grid.nr + j; }
    double at(int i, int j) const { return v[idx(i, j)]; }
};

// Discrete operator of the continuation region: per node
//   cd v_ij + cl v_{i-1,j} + cu v_{i+1,j} = rhs.
struct FdOperator {
    Grid2D grid;
    double k = 0;
    std::vector<double> cl, cd, cu, rhs;
    int idx(int i, int j) const { return i * grid.nr + j; }
};

FdOperator build_operator(const ModelParams& p, const CostSpec& spec, const Grid2D& g);

// |max{-v_r - K, v_r - K, (rho - L) v - f}| maximised over nodes, excluding
// the forced r-edge rows.  Serial reference and OpenMP variant.
double vi_residual_serial(const FdOperator& op, const std::vector<double>& v);
double vi_residual_parallel(const FdOperator& op, const std::vector<double>& v);

// One projected Gauss-Seidel sweep in red-black order; returns max |update|.
double psor_sweep_serial(const FdOperator& op, std::vector<double>& v, double omega);
double psor_sweep_parallel(const FdOperator& op, std::vector<double>& v, double omega);

FdSolution solve_vi(const ModelParams& p, const CostSpec& spec, const Grid2D& grid,
                    const FdOptions& opts = {});

BoundarySamples extract_boundaries(const FdSolution& sol);

// r-range over which the zeta curves of Vhat cross [x_lo, x_hi], plus 20% on
// each side.  The action regions lie outside the zeta band, so this is the
// smallest box that can contain the boundaries.
Grid2D auto_box(const ModelParams& p, const CostSpec& spec, double x_lo, double x_hi, int nx,
                int nr);

// Bilinear interpolation of a nodal field.
double interp_field(const FdSolution& sol, const std::vector<double>& field, double x, double r);

void write_fd_csv(const FdSolution& sol, std::ostream& os);
void write_boundaries_r_csv(const FdSolution& sol, std::ostream& os);
void write_boundaries_x_csv(const FdSolution& sol, std::ostream& os);
// Rebuilds a solution from its CSV export (grid inferred from the nodes).
FdSolution read_fd_csv(std::istream& is, double cost_k, double band);

}  // namespace ousc
