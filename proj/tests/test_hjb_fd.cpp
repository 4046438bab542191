#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ousc/errors.hpp"
#include "ousc/hjb_fd.hpp"

using namespace ousc;
using doctest::Approx;

TEST_SUITE("hjb_fd") {

TEST_CASE("prohibitive intervention cost leaves Vhat") {
    ModelParams p;
    p.cost_k = 1e6;
    const Grid2D g{-3, 3, 241, -0.5, 0.5, 21};
    FdOptions o;
    o.require_edge_action = false;
    const FdSolution s = solve_vi(p, QuadraticCost{}, g, o);
    double err = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.nr - 1; ++j) {
            CHECK(s.region[s.idx(i, j)] == Region::C);
            err = std::max(err, std::abs(s.at(i, j) - v_hat(p, QuadraticCost{}, g.x(i), g.r(j),
                                                             VhatWhich::value)));
        }
    CHECK(err < 1e-3);
}

TEST_CASE("decoupled rate: thresholds at r~ -+ rho K / (2 beta)") {
    ModelParams p;
    p.b = 0;
    const Grid2D g{-3, 3, 61, -0.2, 0.2, 81};
    const FdSolution s = solve_vi(p, QuadraticCost{}, g);
    const double half = p.rho * p.cost_k / 2;  // 0.025
    for (int i = 5; i < g.nx - 5; ++i) {
        CHECK(std::abs(s.bounds.b1[i] + half) <= g.hr());
        CHECK(std::abs(s.bounds.b2[i] - half) <= g.hr());
        CHECK(s.bounds.b1[i] < 0.0);
        CHECK(s.bounds.b2[i] > 0.0);
    }
}

TEST_CASE("too narrow r-range is reported") {
    const Grid2D g{-3, 3, 61, -0.01, 0.01, 17};
    CHECK_THROWS_AS(solve_vi(ModelParams{}, QuadraticCost{}, g), DomainTooSmall);
}

TEST_CASE("default instance: residual, ordering and monotone boundaries") {
    const FdSolution& s = fixture::fd();
    const Grid2D& g = s.grid;
    CHECK(s.residual_norm < 1e-7);
    int finite_rows = 0;
    for (int j = 1; j < g.nr - 1; ++j) {
        const double g1 = s.bounds.g1[j], g2 = s.bounds.g2[j];
        if (std::isfinite(g1) && std::isfinite(g2)) {
            ++finite_rows;
            CHECK(g1 > g2);
        }
    }
    CHECK(finite_rows > g.nr / 4);
    // g1, g2 increase in r, so their inverses b1, b2 increase in x
    for (int i = g.nx / 10; i + 1 < 9 * g.nx / 10; ++i) {
        if (std::isfinite(s.bounds.b1[i]) && std::isfinite(s.bounds.b1[i + 1]))
            CHECK(s.bounds.b1[i + 1] >= s.bounds.b1[i] - 1e-12);
        if (std::isfinite(s.bounds.b2[i]) && std::isfinite(s.bounds.b2[i + 1]))
            CHECK(s.bounds.b2[i + 1] >= s.bounds.b2[i] - 1e-12);
        if (std::isfinite(s.bounds.b1[i]) && std::isfinite(s.bounds.b2[i]))
            CHECK(s.bounds.b1[i] < s.bounds.b2[i]);
    }
    // |v_r| <= K up to the band
    for (double vr : s.v_r) CHECK(std::abs(vr) <= s.cost_k + 1e-9);
}

TEST_CASE("serial and parallel kernels agree") {
    const FdSolution& s = fixture::fd();
    const FdOperator op = build_operator(fixture::params(), fixture::cost(), s.grid);
    CHECK(vi_residual_serial(op, s.v) == vi_residual_parallel(op, s.v));
    std::vector<double> a = s.v, b = s.v;
    for (double& x : a) x *= 1.01;
    b = a;
    for (int k = 0; k < 3; ++k)
        CHECK(psor_sweep_serial(op, a, 1.2) == psor_sweep_parallel(op, b, 1.2));
    CHECK(a == b);
}

TEST_CASE("PSOR matches policy iteration") {
    const Grid2D g = auto_box(fixture::params(), fixture::cost(), -3, 3, 41, 41);
    const FdSolution h = solve_vi(fixture::params(), fixture::cost(), g);
    FdOptions o;
    o.method = FdMethod::psor;
    o.tol = 1e-9;
    const FdSolution s = solve_vi(fixture::params(), fixture::cost(), g, o);
    double err = 0;
    for (size_t k = 0; k < h.v.size(); ++k) err = std::max(err, std::abs(h.v[k] - s.v[k]));
    CHECK(err < 1e-7);
}

TEST_CASE("refinement moves the value at second order") {
    const ModelParams& p = fixture::params();
    const Grid2D base = auto_box(p, fixture::cost(), -3, 3, 41, 41);
    auto at = [&](int n) {
        Grid2D g = base;
        g.nx = g.nr = n;
        const FdSolution s = solve_vi(p, fixture::cost(), g);
        return interp_field(s, s.v, 0.3, 0.5 * (g.r_lo + g.r_hi));
    };
    const double a = at(41), b = at(81), c = at(161);
    CHECK(std::abs(c - b) < 0.5 * std::abs(b - a));
}

TEST_CASE("CSV round trip") {
    const FdSolution& s = fixture::fd();
    std::stringstream ss;
    write_fd_csv(s, ss);
    const FdSolution t = read_fd_csv(ss, s.cost_k, s.band);
    CHECK(t.grid.nx == s.grid.nx);
    CHECK(t.grid.nr == s.grid.nr);
    CHECK(t.grid.r_lo == Approx(s.grid.r_lo));
    for (size_t k = 0; k < s.v.size(); k += 97) {
        CHECK(t.v[k] == Approx(s.v[k]).epsilon(1e-15));
        CHECK(t.v_r[k] == Approx(s.v_r[k]).epsilon(1e-15));
    }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid2D({-3, 3, 2, -1, 1, 11}).validate(), DomainError);
    CHECK_THROWS_AS(Grid2D({3, -3, 11, -1, 1, 11}).validate(), DomainError);
}

}  // TEST_SUITE
