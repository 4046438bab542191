#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ousc/errors.hpp"
#include "ousc/free_boundary.hpp"
#include "ousc/verify.hpp"

using namespace ousc;
using doctest::Approx;

namespace {

BoundarySolution flat_solution(double A, double B) {
    BoundarySolution s;
    s.r = {-0.1, 0.1};
    s.g1 = {1.0, 1.0};
    s.g2 = {-1.0, -1.0};
    s.A = {A, A};
    s.B = {B, B};
    s.A_prime = s.B_prime = s.res1 = s.res2 = {0.0, 0.0};
    return s;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_SUITE("free_boundary") {

TEST_CASE("source reduces to f_r without feedback") {
    ModelParams p;
    p.b = 0;
    const CostSpec c = QuadraticCost{1, 0, 2, 0.05, 0.3};
    const BoundarySolution s = flat_solution(0.7, -0.4);
    for (double x : {-0.9, 0.0, 0.6})
        for (double r : {-0.05, 0.0, 0.08})
            CHECK(h_source(p, c, s, x, r) == Approx(cost_eval(c, x, r).fr).epsilon(1e-12));
    CHECK(h_source(p, QuadraticCost{}, s, 0.3, 0.0) == Approx(0.0));
    CHECK_THROWS_AS(h_source(p, c, s, 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(h_source(p, c, s, 0.0, 0.5), DomainError);
}

TEST_CASE("solution of the default instance") {
    const BoundarySolution& s = fixture::bsol();
    REQUIRE(s.converged);
    REQUIRE(s.r.size() >= 10);
    CHECK(max_abs(s.res1) < 1e-8);
    CHECK(max_abs(s.res2) < 1e-8);
    for (std::size_t k = 0; k < s.r.size(); ++k) CHECK(s.g1[k] > s.g2[k]);
    for (std::size_t k = 1; k < s.r.size(); ++k) {
        CHECK(s.g1[k] > s.g1[k - 1]);
        CHECK(s.g2[k] > s.g2[k - 1]);
    }
}

TEST_CASE("boundaries agree with the FD solve") {
    const BoundarySolution& s = fixture::bsol();
    const FdSolution& fd = fixture::fd();
    double dev = 0;
    for (std::size_t k = 0; k < s.r.size(); ++k) {
        const int j = fixture::row_at(s.r[k]);
        if (std::abs(fd.grid.r(j) - s.r[k]) > 1e-12) continue;
        dev = std::max({dev, std::abs(fd.bounds.g1[j] - s.g1[k]),
                        std::abs(fd.bounds.g2[j] - s.g2[k])});
    }
    CHECK(dev < 2 * fd.grid.hx());
}

TEST_CASE("source matches the FD gradient") {
    const ModelParams& p = fixture::params();
    const BoundarySolution& s = fixture::bsol();
    const FdSolution& fd = fixture::fd();
    const std::size_t k = s.r.size() / 2;
    const double r = s.r[k];
    double worst = 0, scale = p.rho * p.cost_k;
    for (int t = 1; t < 10; ++t) {
        const double x = s.g2[k] + (s.g1[k] - s.g2[k]) * t / 10.0;
        const double h = h_source(p, fixture::cost(), s, x, r);
        const double h_fd = -p.theta * p.b * interp_field(fd, fd.v_x, x, r) +
                            cost_eval(fixture::cost(), x, r).fr;
        worst = std::max(worst, std::abs(h - h_fd));
        scale = std::max(scale, std::abs(h));
    }
    CHECK(worst < 0.02 * scale);
}

TEST_CASE("analytic Jacobian matches finite differences") {
    const ModelParams& p = fixture::params();
    const BoundarySolution& s = fixture::bsol();
    const std::size_t k = s.r.size() / 3;
    const double r = s.r[k], A = s.A[k], B = s.B[k];
    const double g1 = s.g1[k] + 0.01, g2 = s.g2[k] - 0.02;  // off the root
    const FeResidual f = integral_residuals(p, fixture::cost(), A, B, r, g1, g2);
    const double h = 1e-6;
    const FeResidual a1 = integral_residuals(p, fixture::cost(), A, B, r, g1 + h, g2);
    const FeResidual b1 = integral_residuals(p, fixture::cost(), A, B, r, g1 - h, g2);
    const FeResidual a2 = integral_residuals(p, fixture::cost(), A, B, r, g1, g2 + h);
    const FeResidual b2 = integral_residuals(p, fixture::cost(), A, B, r, g1, g2 - h);
    CHECK(f.j11 == Approx((a1.res1 - b1.res1) / (2 * h)).epsilon(1e-5));
    CHECK(f.j21 == Approx((a1.res2 - b1.res2) / (2 * h)).epsilon(1e-5));
    CHECK(f.j12 == Approx((a2.res1 - b2.res1) / (2 * h)).epsilon(1e-5));
    CHECK(f.j22 == Approx((a2.res2 - b2.res2) / (2 * h)).epsilon(1e-5));
    CHECK_THROWS_AS(integral_residuals(p, fixture::cost(), A, B, r, g2, g1), DomainError);
}

TEST_CASE("coefficient slopes") {
    ModelParams p;
    p.b = 0;
    const Slope z = coefficient_slope(p, QuadraticCost{}, 0.0, 0.8, -0.8, 0.3, 0.2);
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);

    // A', B' of the solve against differences of A, B along r
    const BoundarySolution& s = fixture::bsol();
    double err_a = 0, err_b = 0;
    for (std::size_t k = 1; k + 1 < s.r.size(); ++k) {
        const double da = (s.A[k + 1] - s.A[k - 1]) / (s.r[k + 1] - s.r[k - 1]);
        const double db = (s.B[k + 1] - s.B[k - 1]) / (s.r[k + 1] - s.r[k - 1]);
        err_a = std::max(err_a, std::abs(da - s.A_prime[k]));
        err_b = std::max(err_b, std::abs(db - s.B_prime[k]));
    }
    CHECK(err_a < 0.1 * max_abs(s.A_prime));
    CHECK(err_b < 0.1 * max_abs(s.B_prime));
}

TEST_CASE("zeta curves") {
    const ModelParams& p = fixture::params();
    const CostSpec& c = fixture::cost();
    auto vhat_x = [&](double r) {
        return [&p, &c, r](double x) { return v_hat(p, c, x, r, VhatWhich::dx); };
    };
    const ZetaPair z = zeta_bounds(p, c, vhat_x(0.0), 0.0, -3, 3);
    CHECK(z.zeta1 > z.zeta2);
    CHECK(std::isfinite(z.zeta1));
    CHECK(std::isfinite(z.zeta2));
    // the map vanishes at both curves
    const double rk = p.rho * p.cost_k;
    auto map = [&](double x) { return p.theta * p.b * vhat_x(0.0)(x) - cost_eval(c, x, 0.0).fr; };
    CHECK(map(z.zeta1) == Approx(rk).epsilon(1e-9));
    CHECK(map(z.zeta2) == Approx(-rk).epsilon(1e-9));

    ModelParams q = p;
    q.b = 0;
    const ZetaPair s = zeta_bounds(q, c, [](double) { return 0.0; }, 0.0, -3, 3);
    CHECK(s.zeta1 == std::numeric_limits<double>::infinity());
    CHECK(s.zeta2 == -std::numeric_limits<double>::infinity());
}

TEST_CASE("zeta start reaches the FD start's solution") {
    const ModelParams& p = fixture::params();
    const BoundarySolution& ref = fixture::bsol();
    const BoundarySolution z =
        solve_system(p, fixture::cost(), start_from_zeta(p, fixture::cost(), ref.r, -3, 3));
    REQUIRE(z.converged);
    double dev = 0;
    for (std::size_t k = 0; k < z.r.size(); ++k) {
        const double rr = z.r[k];
        if (rr < ref.r.front() || rr > ref.r.back()) continue;
        dev = std::max({dev, std::abs(z.g1[k] - ref.interp(ref.g1, rr)),
                        std::abs(z.g2[k] - ref.interp(ref.g2, rr))});
    }
    CHECK(dev < 1e-3);
}

TEST_CASE("decoupled rate converges in one pass") {
    const ModelParams p = decoupled_params(fixture::params());
    const CostSpec c = decoupled_cost();
    std::vector<double> r;
    for (int k = 0; k <= 20; ++k) r.push_back(-0.1 + 0.01 * k);
    const BoundarySolution s = solve_system(p, c, start_from_zeta(p, c, r, -3, 3));
    CHECK(s.converged);
    CHECK(s.iterations <= 1);
    CHECK(max_abs(s.res1) < 1e-8);
}

TEST_CASE("boundary CSV round trip") {
    const BoundarySolution& s = fixture::bsol();
    std::stringstream ss;
    write_boundary_csv(s, ss);
    const BoundarySolution t = read_boundary_csv(ss);
    REQUIRE(t.r.size() == s.r.size());
    for (std::size_t k = 0; k < s.r.size(); ++k) {
        CHECK(t.g1[k] == s.g1[k]);
        CHECK(t.B[k] == s.B[k]);
    }
    std::stringstream bad("r,g1,g2,A,B,res1,res2\n0.1,1,0,0,0,0,0\n0.0,1,0,0,0,0,0\n");
    CHECK_THROWS_AS(read_boundary_csv(bad), DomainError);
}

}  // TEST_SUITE
