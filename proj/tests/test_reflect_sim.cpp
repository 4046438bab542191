#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ousc/errors.hpp"
#include "ousc/reflect_sim.hpp"
#include "ousc/verify.hpp"

using namespace ousc;
using doctest::Approx;

TEST_SUITE("reflect_sim") {

TEST_CASE("reflected cost matches the FD value") {
    const FdSolution& fd = fixture::fd();
    const double r0 = 0.5 * (fd.grid.r_lo + fd.grid.r_hi);
    const SimulationResult s = simulate_reflected(fixture::params(), fixture::cost(),
                                                  ReflectionBoundary::from_fd(fd), 0.0, r0, 4000, 5);
    CHECK(s.n_paths == 4000);
    CHECK(s.two_sided_steps == 0);
    CHECK(s.bias_bound < 1e-6);
    CHECK(std::abs(s.cost_mean - interp_field(fd, fd.v, 0.0, r0)) <= 3 * s.cost_stderr);
}

TEST_CASE("reflection from the boundary solution keeps R inside the band") {
    const BoundarySolution& b = fixture::bsol();
    const ReflectionBoundary rb = ReflectionBoundary::from_boundary(b);
    const std::size_t k = b.r.size() / 2;
    const double x0 = 0.5 * (b.g1[k] + b.g2[k]);
    for (double x : {x0 - 0.3, x0, x0 + 0.3}) CHECK(rb.lower(x) < rb.upper(x));
    const SimulationResult s =
        simulate_reflected(fixture::params(), fixture::cost(), rb, x0, b.r[k], 200, 3);
    CHECK(s.two_sided_steps == 0);
    for (std::size_t i = 0; i < s.r_min.size(); ++i) {
        CHECK(s.r_min[i] >= b.r.front() - 1e-9);
        CHECK(s.r_max[i] <= b.r.back() + 1e-9);
    }
}

TEST_CASE("uncontrolled cost is Vhat") {
    const ModelParams& p = fixture::params();
    const SimulationResult d =
        simulate_control(p, fixture::cost(), DoNothing{}, 0.4, 0.1, 4000, 8);
    CHECK(d.xi_plus_mean == 0.0);
    CHECK(d.xi_minus_mean == 0.0);
    CHECK(std::abs(d.cost_mean - v_hat(p, fixture::cost(), 0.4, 0.1, VhatWhich::value)) <=
          3 * d.cost_stderr);
    const SimulationResult j =
        simulate_control(p, fixture::cost(), JumpTo{0.1}, 0.4, 0.1, 4000, 8);
    CHECK(j.cost_mean == d.cost_mean);
}

TEST_CASE("time-step halving changes the estimate within noise") {
    const ModelParams& p = fixture::params();
    SimOptions a, b;
    a.dt = 0.02;
    b.dt = 0.01;
    const SimulationResult s = simulate_control(p, fixture::cost(), Band{-0.05, 0.05}, 0, 0, 3000, 4, a);
    const SimulationResult t = simulate_control(p, fixture::cost(), Band{-0.05, 0.05}, 0, 0, 3000, 4, b);
    const double se = std::hypot(s.cost_stderr, t.cost_stderr);
    CHECK(std::abs(s.cost_mean - t.cost_mean) <= 3 * se);
}

TEST_CASE("no admissible policy beats the value") {
    const FdSolution& fd = fixture::fd();
    const double r0 = 0.5 * (fd.grid.r_lo + fd.grid.r_hi);
    const double v = interp_field(fd, fd.v, 0.2, r0);
    for (const ControlPolicy& pol : {ControlPolicy{DoNothing{}}, ControlPolicy{JumpTo{r0 + 0.05}},
                                     ControlPolicy{Band{r0 - 0.05, r0 + 0.05}}}) {
        const SimulationResult s =
            simulate_control(fixture::params(), fixture::cost(), pol, 0.2, r0, 2000, 17);
        CHECK(s.cost_mean >= v - 3 * s.cost_stderr);
    }
    CHECK_THROWS_AS(simulate_control(fixture::params(), fixture::cost(), Band{0.1, -0.1}, 0, 0, 10, 1),
                    DomainError);
}

TEST_CASE("rate bracket") {
    const ModelParams& p = fixture::params();
    const BoundednessReport r = rate_bracket(p, bounded_rate_cost());
    REQUIRE(r.applicable);
    // C = 3, C' = 2: f_r = 2 r hits -+(rho K - theta b C') = +-0.95 at -+0.475
    CHECK(r.lower == Approx(-0.475).epsilon(1e-14));
    CHECK(r.upper == Approx(0.475).epsilon(1e-14));
    // same points by bisection of f_r
    auto fr = [&](double x) { return cost_eval(bounded_rate_cost(), 0.0, x).fr; };
    double lo = -5, hi = 5;
    const double target = p.theta * p.b * 2.0 - p.rho * p.cost_k;
    for (int k = 0; k < 100; ++k) ((fr(0.5 * (lo + hi)) < target) ? lo : hi) = 0.5 * (lo + hi);
    CHECK(0.5 * (lo + hi) == Approx(r.upper).epsilon(1e-12));

    CHECK_FALSE(rate_bracket(p, fixture::cost()).applicable);
    const BoundednessReport z = rate_bracket(decoupled_params(p), bounded_rate_cost());
    CHECK_FALSE(z.applicable);
    CHECK(z.reason.find("b = 0") != std::string::npos);
}

TEST_CASE("fixed seed reproduces, serial equals parallel") {
    SimOptions ser;
    ser.parallel = false;
    ser.record_paths = 2;
    SimOptions par = ser;
    par.parallel = true;
    const Band band{-0.05, 0.05};
    const SimulationResult a = simulate_control(fixture::params(), fixture::cost(), band, 0.1, 0.2, 500, 42, ser);
    const SimulationResult b = simulate_control(fixture::params(), fixture::cost(), band, 0.1, 0.2, 500, 42, par);
    CHECK(a.cost_mean == b.cost_mean);
    CHECK(a.r_max == b.r_max);
    REQUIRE(a.records.size() == 2);
    CHECK(a.records[1].x == b.records[1].x);
    // the initial jump lands on the band
    CHECK(a.records[0].r.front() == Approx(0.05));
    std::ostringstream os;
    write_paths_csv(a, os);
    CHECK(os.str().rfind("path,", 0) == 0);
}

}  // TEST_SUITE
