#include <cmath>
#include <random>

#include "doctest.h"
#include "ousc/errors.hpp"
#include "ousc/model.hpp"

using namespace ousc;
using doctest::Approx;

TEST_SUITE("model") {

TEST_CASE("mu_bar") {
    ModelParams p;
    p.mu = 0;
    p.b = 1;
    CHECK(mu_bar(p, 0.0) == 0.0);
    p.mu = 2;
    p.b = 0.5;
    CHECK(mu_bar(p, 2.0) == 1.0);
    p.b = 0;
    for (double r : {-3.0, 0.1, 7.0}) CHECK(mu_bar(p, r) == p.mu);
}

TEST_CASE("parameter validation names the field") {
    ModelParams p;
    p.eta = -1;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.eta"), DomainError);
    p = ModelParams{};
    p.rho = 0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.rho"), DomainError);
    CHECK_THROWS_AS(validate_cost(QuadraticCost{1, 0, 1, 0, 2.0}), DomainError);
    AsymmetricPowerCost a;
    a.p = 1.0;
    CHECK_THROWS_AS(validate_cost(a), DomainError);
}

TEST_CASE("cost evaluation") {
    const CostValue m = cost_eval(QuadraticCost{2, 0.5, 3, -0.2, 0}, 0.5, -0.2);
    CHECK(m.f == 0);
    CHECK(m.fx == 0);
    CHECK(m.fr == 0);
    const CostValue q = cost_eval(QuadraticCost{}, 2, 3);
    CHECK(q.f == Approx(13));
    CHECK(q.fx == Approx(4));
    CHECK(q.fr == Approx(6));
    AsymmetricPowerCost a;
    a.q = 3;
    const CostValue s = cost_eval(a, -2, 0);
    CHECK(s.f == Approx(8));
    CHECK(s.fx == Approx(-12));
    // cross term: f_rx = -2 gamma
    CHECK(cost_eval(QuadraticCost{1, 0, 1, 0, 0.4}, 0.3, 0.2).frx == Approx(-0.8));
}

TEST_CASE("capped asymmetric cost has bounded slope") {
    AsymmetricPowerCost a;
    a.q = 3;
    a.x_cap = 1;
    const auto bound = cost_fx_bound(a);
    REQUIRE(bound.has_value());
    CHECK(*bound == Approx(3.0));
    for (double x : {-10.0, -1.0, -0.5, 0.0, 0.5, 1.0, 10.0})
        CHECK(std::abs(cost_eval(a, x, 0).fx) <= *bound + 1e-12);
    CHECK_FALSE(cost_fx_bound(QuadraticCost{}).has_value());
}

TEST_CASE("Vhat of zero cost is zero") {
    const ModelParams p;
    const CostSpec zero = TabulatedCost{[](double, double) { return CostValue{}; }};
    CHECK(v_hat(p, zero, 0.4, 0.1, VhatWhich::value) == 0.0);
}

TEST_CASE("Vhat at x = x~ = mu_bar(r)") {
    const ModelParams p;
    const QuadraticCost q{1.5, 0.0, 2.0, 0.3, 0.0};
    const double r = 0.0;  // mu_bar(0) = 0 = x~
    const double expect =
        q.alpha * (p.eta * p.eta / (2 * p.theta)) * (1 / p.rho - 1 / (p.rho + 2 * p.theta)) +
        q.beta * (r - q.r_tilde) * (r - q.r_tilde) / p.rho;
    CHECK(v_hat_closed(p, q, 0.0, r, VhatWhich::value) == Approx(expect).epsilon(1e-13));
    CHECK(v_hat_green(p, q, 0.0, r, VhatWhich::value) == Approx(expect).epsilon(1e-6));
}

TEST_CASE("closed form and Green route agree, partials match differences") {
    const ModelParams p{1.3, 0.2, 0.7, 0.6, 0.4, 0.1};
    const CostSpec spec = QuadraticCost{1.0, 0.3, 2.0, -0.1, 0.5};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-2, 2), ur(-0.5, 0.5);
    for (int k = 0; k < 20; ++k) {
        const double x = ux(rng), r = ur(rng);
        for (VhatWhich w : {VhatWhich::value, VhatWhich::dx, VhatWhich::dr, VhatWhich::drx}) {
            const double a = v_hat_closed(p, spec, x, r, w), b = v_hat_green(p, spec, x, r, w);
            CHECK(std::abs(a - b) <= 1e-4 * std::max(std::abs(a), 1e-3));
        }
        const double h = 1e-4;
        auto v = [&](double xx, double rr) { return v_hat_closed(p, spec, xx, rr, VhatWhich::value); };
        CHECK(v_hat_closed(p, spec, x, r, VhatWhich::dx) ==
              Approx((v(x + h, r) - v(x - h, r)) / (2 * h)).epsilon(1e-6));
        CHECK(v_hat_closed(p, spec, x, r, VhatWhich::dr) ==
              Approx((v(x, r + h) - v(x, r - h)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("Vhat nonnegative, convex, and solves the resolvent equation") {
    const ModelParams p;
    AsymmetricPowerCost a;
    a.q = 3;
    a.kappa = 1;
    const CostSpec spec = a;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-1.5, 1.5), ur(-0.4, 0.4);
    for (int k = 0; k < 8; ++k) {
        const double x1 = ux(rng), r1 = ur(rng), x2 = ux(rng), r2 = ur(rng);
        const double v1 = v_hat(p, spec, x1, r1, VhatWhich::value);
        const double v2 = v_hat(p, spec, x2, r2, VhatWhich::value);
        const double vm = v_hat(p, spec, 0.5 * (x1 + x2), 0.5 * (r1 + r2), VhatWhich::value);
        CHECK(v1 >= 0);
        CHECK(vm <= 0.5 * (v1 + v2) + 1e-9);
        // (L - rho) Vhat + f = 0 by central differences
        const double h = 1e-2;
        const double vp = v_hat(p, spec, x1 + h, r1, VhatWhich::value);
        const double vn = v_hat(p, spec, x1 - h, r1, VhatWhich::value);
        const double vxx = (vp - 2 * v1 + vn) / (h * h), vx = (vp - vn) / (2 * h);
        const double f = cost_eval(spec, x1, r1).f;
        const double res = 0.5 * p.eta * p.eta * vxx + p.theta * (mu_bar(p, r1) - x1) * vx -
                           p.rho * v1 + f;
        CHECK(std::abs(res) < 1e-4 * (p.rho * v1 + f + std::abs(vxx)));
    }
}

}  // TEST_SUITE
