#pragma once

// Default instance shared by the module tests; each solve runs once per
// process.

#include "ousc/free_boundary.hpp"
#include "ousc/hjb_fd.hpp"

namespace fixture {

inline const ousc::ModelParams& params() {
    static const ousc::ModelParams p;
    return p;
}

inline const ousc::CostSpec& cost() {
    static const ousc::CostSpec c = ousc::QuadraticCost{};
    return c;
}

inline const ousc::FdSolution& fd() {
    static const ousc::FdSolution s = [] {
        const ousc::Grid2D g = ousc::auto_box(params(), cost(), -3, 3, 201, 201);
        return ousc::solve_vi(params(), cost(), g);
    }();
    return s;
}

inline const ousc::FbStart& fb_start() {
    static const ousc::FbStart s = ousc::start_from_fd(params(), cost(), fd());
    return s;
}

inline const ousc::BoundarySolution& bsol() {
    static const ousc::BoundarySolution s = ousc::solve_system(params(), cost(), fb_start());
    return s;
}

inline std::vector<double> row(const std::vector<double>& field, int j) {
    const ousc::FdSolution& s = fd();
    std::vector<double> out(s.grid.nx);
    for (int i = 0; i < s.grid.nx; ++i) out[i] = field[s.idx(i, j)];
    return out;
}

inline std::vector<double> x_nodes() {
    const ousc::Grid2D& g = fd().grid;
    std::vector<double> xs(g.nx);
    for (int i = 0; i < g.nx; ++i) xs[i] = g.x(i);
    return xs;
}

// FD row closest to r
inline int row_at(double r) {
    const ousc::Grid2D& g = fd().grid;
    return static_cast<int>(std::lround((r - g.r_lo) / g.hr()));
}

}  // namespace fixture
