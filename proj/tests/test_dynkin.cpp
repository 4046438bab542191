#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "ousc/dynkin.hpp"
#include "ousc/errors.hpp"

using namespace ousc;
using doctest::Approx;

TEST_SUITE("dynkin") {

TEST_CASE("zero source gives zero value") {
    const std::vector<double> xs = fixture::x_nodes(), vx(xs.size(), 0.0);
    const GameSlice g = solve_game_slice(fixture::params(), QuadraticCost{}, xs, vx, 0.0);
    for (double u : g.u) CHECK(u == Approx(0.0).scale(1));
    for (double h : g.source) CHECK(h == 0.0);
}

TEST_CASE("slice value tracks v_r and its thresholds track the boundaries") {
    const ModelParams& p = fixture::params();
    const FdSolution& fd = fixture::fd();
    const BoundarySolution& s = fixture::bsol();
    const std::vector<double> xs = fixture::x_nodes();
    for (std::size_t k : {s.r.size() / 4, s.r.size() / 2, 3 * s.r.size() / 4}) {
        const int j = fixture::row_at(s.r[k]);
        const GameSlice g =
            solve_game_slice(p, fixture::cost(), xs, fixture::row(fd.v_x, j), fd.grid.r(j));
        const std::vector<double> vr = fixture::row(fd.v_r, j);
        double err = 0, ux = 0;
        for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
            err = std::max(err, std::abs(g.u[i] - vr[i]));
            ux = std::max(ux, std::abs(g.u[i + 1] - g.u[i - 1]) / (xs[i + 1] - xs[i - 1]));
            CHECK(std::abs(g.u[i]) <= p.cost_k + 1e-12);
            CHECK(g.u[i] <= g.u[i - 1] + 1e-12);  // nonincreasing in x
        }
        CHECK(err <= 2 * fd.grid.hx() * ux);
        CHECK(std::abs(g.stop_upper - fd.bounds.g2[j]) <= 2 * fd.grid.hx());
        CHECK(std::abs(g.stop_lower - fd.bounds.g1[j]) <= 2 * fd.grid.hx());
    }
}

TEST_CASE("immediate stopping outside the band") {
    const ModelParams& p = fixture::params();
    const BoundarySolution& s = fixture::bsol();
    const std::size_t k = s.r.size() / 2;
    const SaddleEstimate lo = simulate_saddle(p, fixture::cost(), s, s.g2[k] - 0.1, s.r[k], 50, 1);
    const SaddleEstimate hi = simulate_saddle(p, fixture::cost(), s, s.g1[k] + 0.1, s.r[k], 50, 1);
    CHECK(lo.estimate == p.cost_k);
    CHECK(hi.estimate == -p.cost_k);
    CHECK(lo.std_error == 0.0);
}

TEST_CASE("saddle estimate matches v_r") {
    const ModelParams& p = fixture::params();
    const FdSolution& fd = fixture::fd();
    const BoundarySolution& s = fixture::bsol();
    const std::size_t k = s.r.size() / 2;
    const double x = 0.5 * (s.g1[k] + s.g2[k]), r = s.r[k];
    const SaddleEstimate e = simulate_saddle(p, fixture::cost(), s, x, r, 4000, 99);
    CHECK(e.n_paths == 4000);
    CHECK(e.std_error > 0);
    CHECK(std::abs(e.estimate - interp_field(fd, fd.v_r, x, r)) <= 3 * e.std_error);
    // same seed, same numbers
    const SaddleEstimate f = simulate_saddle(p, fixture::cost(), s, x, r, 4000, 99);
    CHECK(f.estimate == e.estimate);
    CHECK_THROWS_AS(simulate_saddle(p, fixture::cost(), s, x, r, 1, 99), DomainError);
}

}  // TEST_SUITE
