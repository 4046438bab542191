#include "ousc/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "ousc/errors.hpp"
#include "ousc/io.hpp"
#include "ousc/ou_special.hpp"

namespace ousc {

double BoundarySolution::interp(const std::vector<double>& field, double rr) const {
    if (r.empty()) throw DomainError("BoundarySolution: empty");
    if (rr <= r.front()) return field.front();
    if (rr >= r.back()) return field.back();
    const auto it = std::upper_bound(r.begin(), r.end(), rr);
    const size_t k = static_cast<size_t>(it - r.begin()) - 1;
    const double t = (rr - r[k]) / (r[k + 1] - r[k]);
    return (1 - t) * field[k] + t * field[k + 1];
}

double FeResidual::scaled_max() const {
    return std::max(std::abs(res1) / scale1, std::abs(res2) / scale2);
}

namespace {

double source_at(const ModelParams& p, const CostSpec& spec, double A, double B, double y,
                 double r, const EigenEval& ps, const EigenEval& ph) {
    const double vx = A * ps.d1 + B * ph.d1 + v_hat(p, spec, y, r, VhatWhich::dx);
    return -p.theta * p.b * vx + cost_eval(spec, y, r).fr;
}

struct Pair {
    double a = 0, b = 0;
};

using Rule = boost::math::quadrature::gauss<double, 20>;

// 20-point Gauss-Legendre for both psi- and phi-weighted integrals at once.
template <class F>
Pair gl_panel(const F& fn, double lo, double hi) {
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    Pair out;
    for (size_t k = 0; k < xs.size(); ++k) {
        for (int sgn : {-1, 1}) {
            if (xs[k] == 0.0 && sgn > 0) continue;
            const Pair v = fn(mid + sgn * half * xs[k]);
            out.a += ws[k] * v.a;
            out.b += ws[k] * v.b;
        }
    }
    out.a *= half;
    out.b *= half;
    return out;
}

template <class F>
Pair gl_adaptive(const F& fn, double lo, double hi, const Pair& whole, double tol_a, double tol_b,
                 int depth) {
    const double mid = 0.5 * (lo + hi);
    const Pair l = gl_panel(fn, lo, mid), r = gl_panel(fn, mid, hi);
    const Pair sum{l.a + r.a, l.b + r.b};
    if ((std::abs(sum.a - whole.a) <= tol_a && std::abs(sum.b - whole.b) <= tol_b) || depth >= 14)
        return sum;
    const Pair a = gl_adaptive(fn, lo, mid, l, 0.5 * tol_a, 0.5 * tol_b, depth + 1);
    const Pair b = gl_adaptive(fn, mid, hi, r, 0.5 * tol_a, 0.5 * tol_b, depth + 1);
    return {a.a + b.a, a.b + b.b};
}

}  // namespace

FeResidual integral_residuals(const ModelParams& p, const CostSpec& spec, double A, double B,
                              double r, double g1, double g2) {
    if (!(g2 < g1)) throw DomainError("integral_residuals: need g2 < g1");
    const double m = mu_bar(p, r);
    const EigenEval ps1 = psi_eval(p, g1 - m, 1), ps2 = psi_eval(p, g2 - m, 1);
    const EigenEval ph1 = phi_eval(p, g1 - m, 1), ph2 = phi_eval(p, g2 - m, 1);
    const double ls1 = log_scale_density(p, g1, r), ls2 = log_scale_density(p, g2, r);
    const double k = p.cost_k;

    FeResidual out;
    const double t1 = std::exp(ps1.log_abs_d1 - ls1), t2 = std::exp(ps2.log_abs_d1 - ls2);
    const double u1 = -std::exp(ph1.log_abs_d1 - ls1), u2 = -std::exp(ph2.log_abs_d1 - ls2);
    out.scale1 = k * (t1 + t2);
    out.scale2 = k * std::abs(u1 + u2);

    const auto integrand = [&](double y) {
        const EigenEval ps = psi_eval(p, y - m, 1), ph = phi_eval(p, y - m, 1);
        const double h = source_at(p, spec, A, B, y, r, ps, ph);
        const double lm = log_speed_density(p, y, r);
        return Pair{h * std::exp(ps.log_value + lm), h * std::exp(ph.log_value + lm)};
    };
    const Pair whole = gl_panel(integrand, g2, g1);
    const Pair in = gl_adaptive(integrand, g2, g1, whole, 1e-14 * out.scale1,
                                1e-14 * out.scale2, 0);
    out.res1 = in.a + k * (t1 + t2);
    out.res2 = in.b + k * (u1 + u2);

    // d/dx [zeta'(x - m) / S'(x)] = rho zeta m'(x) for both eigenfunctions
    const double h1 = source_at(p, spec, A, B, g1, r, ps1, ph1);
    const double h2 = source_at(p, spec, A, B, g2, r, ps2, ph2);
    const double lm1 = log_speed_density(p, g1, r), lm2 = log_speed_density(p, g2, r);
    const double rk = p.rho * k;
    out.j11 = std::exp(ps1.log_value + lm1) * (h1 + rk);
    out.j12 = std::exp(ps2.log_value + lm2) * (rk - h2);
    out.j21 = std::exp(ph1.log_value + lm1) * (h1 + rk);
    out.j22 = std::exp(ph2.log_value + lm2) * (rk - h2);
    return out;
}

FeResidual integral_residuals(const ModelParams& p, const CostSpec& spec,
                              const BoundarySolution& bsol, double r, double g1, double g2) {
    return integral_residuals(p, spec, bsol.interp(bsol.A, r), bsol.interp(bsol.B, r), r, g1, g2);
}

double h_source(const ModelParams& p, const CostSpec& spec, const BoundarySolution& bsol, double x,
                double r) {
    if (bsol.r.empty() || r < bsol.r.front() || r > bsol.r.back())
        throw DomainError("h_source: r outside the solved range");
    const double g1 = bsol.interp(bsol.g1, r), g2 = bsol.interp(bsol.g2, r);
    const double slack = 1e-9 * (1.0 + std::abs(g1) + std::abs(g2));
    if (x < g2 - slack || x > g1 + slack) throw DomainError("h_source: x outside the inaction band");
    const double m = mu_bar(p, r);
    return source_at(p, spec, bsol.interp(bsol.A, r), bsol.interp(bsol.B, r), x, r,
                     psi_eval(p, x - m, 1), phi_eval(p, x - m, 1));
}

namespace {

// P y' = -(Q y + v) at one node, returned as y' = M y + q.
struct NodeOde {
    Eigen::Matrix2d m;
    Eigen::Vector2d q;
};

NodeOde node_ode(const ModelParams& p, const CostSpec& spec, double r, double g1, double g2,
                 bool unit_phi_coefficient) {
    const double mb = mu_bar(p, r);
    const EigenEval ps1 = psi_eval(p, g1 - mb), ps2 = psi_eval(p, g2 - mb);
    const EigenEval ph1 = phi_eval(p, g1 - mb), ph2 = phi_eval(p, g2 - mb);
    Eigen::Matrix2d pm, qm;
    pm << ps1.d1, ph1.d1, ps2.d1, ph2.d1;
    const double bb = unit_phi_coefficient ? 1.0 : p.b;
    qm << p.b * ps1.d2, bb * ph1.d2, p.b * ps2.d2, bb * ph2.d2;
    const double det = pm.determinant();
    if (!(std::abs(det) > 1e-14 * (std::abs(ps1.d1 * ph2.d1) + std::abs(ps2.d1 * ph1.d1))))
        throw DegenerateGeometry("coefficient_slope: singular psi'/phi' system (g1 == g2?)");
    const Eigen::Vector2d v(v_hat(p, spec, g1, r, VhatWhich::drx),
                            v_hat(p, spec, g2, r, VhatWhich::drx));
    const auto lu = pm.partialPivLu();
    return {-lu.solve(qm), -lu.solve(v)};
}

}  // namespace

Slope coefficient_slope(const ModelParams& p, const CostSpec& spec, double r, double g1, double g2,
                        double A, double B, bool unit_phi_coefficient) {
    const NodeOde o = node_ode(p, spec, r, g1, g2, unit_phi_coefficient);
    const Eigen::Vector2d y = o.m * Eigen::Vector2d(A, B) + o.q;
    return {y[0], y[1]};
}

Slope coefficient_slope(const ModelParams& p, const CostSpec& spec, const BoundarySolution& bsol,
                        double r, bool unit_phi_coefficient) {
    return coefficient_slope(p, spec, r, bsol.interp(bsol.g1, r), bsol.interp(bsol.g2, r),
                             bsol.interp(bsol.A, r), bsol.interp(bsol.B, r), unit_phi_coefficient);
}

ZetaPair zeta_bounds(const ModelParams& p, const CostSpec& spec,
                     const std::function<double(double)>& vx, double r, double x_lo, double x_hi) {
    const double rk = p.rho * p.cost_k;
    const auto base = [&](double x) { return p.theta * p.b * vx(x) - cost_eval(spec, x, r).fr; };
    // both maps are nondecreasing in x
    const auto bisect = [&](auto&& f, double lo, double hi) {
        for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double inf = std::numeric_limits<double>::infinity();
    ZetaPair z;
    const auto up = [&](double x) { return base(x) - rk >= 0.0; };
    if (up(x_lo)) z.zeta1 = -inf;
    else if (!up(x_hi)) z.zeta1 = inf;
    else z.zeta1 = bisect(up, x_lo, x_hi);
    const auto above = [&](double x) { return base(x) + rk > 0.0; };
    if (!above(x_hi)) z.zeta2 = inf;
    else if (above(x_lo)) z.zeta2 = -inf;
    else z.zeta2 = bisect(above, x_lo, x_hi);
    return z;
}

CoefficientFit fit_coefficients(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                                int j) {
    const Grid2D& g = fd.grid;
    const double g1 = fd.bounds.g1[j], g2 = fd.bounds.g2[j];
    if (!std::isfinite(g1) || !std::isfinite(g2))
        throw DomainError("fit_coefficients: boundary absent on this r-row");
    const double hx = g.hx();
    const double xa = g2 + 2.0 * hx, xb = g1 - 2.0 * hx;
    if (!(xb > xa)) throw DegenerateGeometry("fit_coefficients: band narrower than four cells");
    std::vector<double> row(g.nx);
    for (int i = 0; i < g.nx; ++i) row[i] = fd.at(i, j);
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(row.data(), row.size(),
                                                                       g.x_lo, hx);
    const double r = g.r(j), m = mu_bar(p, r);
    Eigen::Matrix2d a;
    a << psi(p, xa - m), phi(p, xa - m), psi(p, xb - m), phi(p, xb - m);
    const Eigen::Vector2d rhs(spline(xa) - v_hat(p, spec, xa, r, VhatWhich::value),
                              spline(xb) - v_hat(p, spec, xb, r, VhatWhich::value));
    const Eigen::Vector2d ab = a.partialPivLu().solve(rhs);
    return {ab[0], ab[1]};
}

namespace {

// Keep the longest run of nodes whose uncontrolled mode stays within
// exp(bound) over the band; returns [first, last] and logs the rest.
std::pair<size_t, size_t> growth_window(const ModelParams& p, const std::vector<double>& r,
                                        const std::vector<double>& g1,
                                        const std::vector<double>& g2, double bound,
                                        std::vector<BoundarySolution::Excluded>& excluded) {
    const double c2 = p.c() * p.c();
    std::vector<char> ok(r.size(), 1);
    for (size_t k = 0; k < r.size(); ++k) {
        if (p.b == 0.0) continue;
        const double s1 = g1[k] - mu_bar(p, r[k]), s2 = g2[k] - mu_bar(p, r[k]);
        if ((s1 < 0 && 0.5 * c2 * s1 * s1 > bound) || (s2 > 0 && 0.5 * c2 * s2 * s2 > bound))
            ok[k] = 0;
    }
    size_t best_lo = 0, best_len = 0;
    for (size_t k = 0; k < r.size();) {
        if (!ok[k]) {
            ++k;
            continue;
        }
        size_t e = k;
        while (e < r.size() && ok[e]) ++e;
        if (e - k > best_len) {
            best_len = e - k;
            best_lo = k;
        }
        k = e;
    }
    if (best_len < 3) throw DegenerateGeometry("free boundary: fewer than three usable r-nodes");
    for (size_t k = 0; k < r.size(); ++k)
        if (k < best_lo || k >= best_lo + best_len)
            excluded.push_back({r[k], ok[k] ? "outside the longest usable run"
                                             : "uncontrolled mode growth above bound"});
    return {best_lo, best_lo + best_len - 1};
}

}  // namespace

FbStart start_from_fd(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                      double growth_bound) {
    const Grid2D& g = fd.grid;
    const double w = g.x_hi - g.x_lo;
    std::vector<double> r, g1, g2;
    std::vector<int> rows;
    std::vector<BoundarySolution::Excluded> log;
    for (int j = 1; j < g.nr - 1; ++j) {
        const double a = fd.bounds.g1[j], b = fd.bounds.g2[j];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if (b < g.x_lo + 0.1 * w || a > g.x_hi - 0.1 * w || a - b < 6.0 * g.hx()) {
            log.push_back({g.r(j), "boundary near the x-edge of the FD box"});
            continue;
        }
        r.push_back(g.r(j));
        g1.push_back(a);
        g2.push_back(b);
        rows.push_back(j);
    }
    if (r.size() < 3) throw DegenerateGeometry("start_from_fd: no r-row with both boundaries");
    FbStart s;
    s.r = r;
    s.g1 = g1;
    s.g2 = g2;
    const auto [lo, hi] = growth_window(p, r, g1, g2, growth_bound, log);
    s.excluded = log;
    s.r.assign(r.begin() + lo, r.begin() + hi + 1);
    s.g1.assign(g1.begin() + lo, g1.begin() + hi + 1);
    s.g2.assign(g2.begin() + lo, g2.begin() + hi + 1);
    s.a_top = fit_coefficients(p, spec, fd, rows[hi]).A;
    s.b_bottom = fit_coefficients(p, spec, fd, rows[lo]).B;
    return s;
}

FbStart start_from_zeta(const ModelParams& p, const CostSpec& spec, const std::vector<double>& r,
                        double x_lo, double x_hi, double growth_bound) {
    std::vector<double> rr, g1, g2;
    std::vector<BoundarySolution::Excluded> log;
    for (double x : r) {
        const auto vx = [&](double y) { return v_hat(p, spec, y, x, VhatWhich::dx); };
        const ZetaPair z = zeta_bounds(p, spec, vx, x, x_lo, x_hi);
        if (!std::isfinite(z.zeta1) || !std::isfinite(z.zeta2)) {
            log.push_back({x, "zeta bound absent"});
            continue;
        }
        rr.push_back(x);
        // the residual Jacobian vanishes on the zeta curves (H = -+rho K
        // there), so start one stationary deviation outside them
        g1.push_back(z.zeta1 + p.stat_sd());
        g2.push_back(z.zeta2 - p.stat_sd());
    }
    if (rr.size() < 3) throw DegenerateGeometry("start_from_zeta: no r-node with finite zeta bounds");
    const auto [lo, hi] = growth_window(p, rr, g1, g2, growth_bound, log);
    FbStart s;
    s.excluded = log;
    s.r.assign(rr.begin() + lo, rr.begin() + hi + 1);
    s.g1.assign(g1.begin() + lo, g1.begin() + hi + 1);
    s.g2.assign(g2.begin() + lo, g2.begin() + hi + 1);
    return s;
}

namespace {

// Trapezoid discretisation of y' = M y + q on the whole r-grid with
// A fixed at the top node and B at the bottom node.
void solve_coefficients(const ModelParams& p, const CostSpec& spec, const std::vector<double>& r,
                        const std::vector<double>& g1, const std::vector<double>& g2,
                        double a_top, double b_bottom, bool unit_phi, std::vector<double>& A,
                        std::vector<double>& B) {
    const int n = static_cast<int>(r.size());
    std::vector<NodeOde> ode(n);
    for (int k = 0; k < n; ++k) ode[k] = node_ode(p, spec, r[k], g1[k], g2[k], unit_phi);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    for (int k = 0; k + 1 < n; ++k) {
        const double h = r[k + 1] - r[k];
        big.block<2, 2>(2 * k, 2 * k) = -id - 0.5 * h * ode[k].m;
        big.block<2, 2>(2 * k, 2 * k + 2) = id - 0.5 * h * ode[k + 1].m;
        rhs.segment<2>(2 * k) = 0.5 * h * (ode[k].q + ode[k + 1].q);
    }
    big(2 * n - 2, 2 * (n - 1)) = 1.0;
    rhs[2 * n - 2] = a_top;
    big(2 * n - 1, 1) = 1.0;
    rhs[2 * n - 1] = b_bottom;
    const Eigen::VectorXd y = big.partialPivLu().solve(rhs);
    A.resize(n);
    B.resize(n);
    for (int k = 0; k < n; ++k) {
        A[k] = y[2 * k];
        B[k] = y[2 * k + 1];
    }
}

struct NodeResult {
    double g1 = 0, g2 = 0, merit = 0;
    bool ok = false;
    std::string error;
};

NodeResult newton_node(const ModelParams& p, const CostSpec& spec, double r, double g1, double g2,
                       double A, double B, const FbOptions& o) {
    NodeResult out;
    FeResidual f = integral_residuals(p, spec, A, B, r, g1, g2);
    double merit = f.scaled_max();
    for (int it = 0; it < o.max_newton && merit > o.newton_tol; ++it) {
        const double det = f.j11 * f.j22 - f.j12 * f.j21;
        if (!std::isfinite(det) || det == 0.0) break;
        double d1 = -(f.j22 * f.res1 - f.j12 * f.res2) / det;
        double d2 = -(-f.j21 * f.res1 + f.j11 * f.res2) / det;
        const double big = std::max(std::abs(d1), std::abs(d2));
        if (big > o.step_max) {
            d1 *= o.step_max / big;
            d2 *= o.step_max / big;
        }
        bool moved = false;
        for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
            const double n1 = g1 + lam * d1, n2 = g2 + lam * d2;
            if (!(n2 < n1)) continue;
            const FeResidual fn = integral_residuals(p, spec, A, B, r, n1, n2);
            const double mn = fn.scaled_max();
            if (std::isfinite(mn) && mn < merit * (1.0 - 1e-4 * lam)) {
                g1 = n1;
                g2 = n2;
                f = fn;
                merit = mn;
                moved = true;
                break;
            }
        }
        if (!moved || big < 1e-14) break;
    }
    out.g1 = g1;
    out.g2 = g2;
    out.merit = merit;
    out.ok = merit < 1e-9;
    return out;
}

}  // namespace

BoundarySolution solve_system(const ModelParams& p, const CostSpec& spec, const FbStart& start,
                              const FbOptions& opts) {
    p.validate();
    validate_cost(spec);
    const size_t n = start.r.size();
    if (n < 3 || start.g1.size() != n || start.g2.size() != n)
        throw DomainError("solve_system: start needs matching r/g1/g2 with at least three nodes");
    for (size_t k = 0; k < n; ++k)
        if (!(start.g1[k] > start.g2[k])) throw DomainError("solve_system: start needs g1 > g2");

    BoundarySolution s;
    s.r = start.r;
    s.excluded = start.excluded;
    std::vector<double> G1 = start.g1, G2 = start.g2, N1(n), N2(n);
    double omega = opts.omega, prev = std::numeric_limits<double>::infinity();
    double a_top = start.a_top, b_bottom = start.b_bottom;
    int edge_fail_lo = 0, edge_fail_hi = 0;  // consecutive passes without a root

    for (int outer = 0;; ++outer) {
        if (outer >= opts.max_outer)
            throw IterationError("solve_system: outer loop did not converge",
                                 s.history.empty() ? 0.0 : s.history.back(), s.history);
        const size_t n = s.r.size();
        const int nn = static_cast<int>(n);
        solve_coefficients(p, spec, s.r, G1, G2, a_top, b_bottom, opts.unit_phi_coefficient, s.A, s.B);
        std::vector<NodeResult> res(n);
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
        for (int k = 0; k < nn; ++k) {
            try {
                res[k] = newton_node(p, spec, s.r[k], G1[k], G2[k], s.A[k], s.B[k], opts);
            } catch (const std::exception& e) {
                res[k].error = e.what();
            }
        }
        double dg = 0.0;
        int failed = -1;
        for (size_t k = 0; k < n; ++k) {
            if (!res[k].error.empty()) {
                std::ostringstream msg;
                msg << "solve_system: Newton failed at r=" << num(s.r[k]) << " from bracket ["
                    << num(G2[k]) << ", " << num(G1[k]) << "]: " << res[k].error;
                throw NumericError(msg.str(), res[k].merit);
            }
            // a node without a root for the current A, B still moves toward
            // its least-residual point; only the final pass must be clean
            if (!res[k].ok && failed < 0) failed = static_cast<int>(k);
            N1[k] = res[k].g1;
            N2[k] = res[k].g2;
            dg = std::max({dg, std::abs(N1[k] - G1[k]), std::abs(N2[k] - G2[k])});
        }
        s.history.push_back(dg);
        s.iterations = outer + 1;
        if (failed >= 0 && (p.b == 0.0 || outer + 1 == opts.max_outer)) {
            std::ostringstream msg;
            msg << "solve_system: Newton failed at r=" << num(s.r[failed]) << " from bracket ["
                << num(G2[failed]) << ", " << num(G1[failed]) << "], scaled residual "
                << num(res[failed].merit);
            throw NumericError(msg.str(), res[failed].merit);
        }
        // with b = 0 the source does not see A, B, so one pass is exact
        if (p.b == 0.0 || (failed < 0 && dg < opts.tol)) {
            G1 = N1;
            G2 = N2;
            break;
        }
        if (dg > prev) omega = std::max(0.5 * omega, 1.0 / 32.0);
        prev = dg;
        for (size_t k = 0; k < n; ++k) {
            G1[k] += omega * (N1[k] - G1[k]);
            G2[k] += omega * (N2[k] - G2[k]);
        }
        // the start may sit well inside the true band (zeta start), so the
        // growth bound is re-checked on the iterate; the window only shrinks
        auto [lo, hi] = growth_window(p, s.r, G1, G2, opts.growth_bound, s.excluded);
        // an end node that keeps failing has no root for any nearby A, B
        edge_fail_lo = res.front().ok ? 0 : edge_fail_lo + 1;
        edge_fail_hi = res.back().ok ? 0 : edge_fail_hi + 1;
        constexpr int kEdgePatience = 5;
        const char* no_root = "no root of the integral equations at the window end";
        if (edge_fail_lo >= kEdgePatience) {
            for (size_t k = 0; k < n && !res[k].ok && hi >= lo + 3; ++k)
                if (k >= lo) s.excluded.push_back({s.r[lo++], no_root});
            edge_fail_lo = 0;
        }
        if (edge_fail_hi >= kEdgePatience) {
            for (size_t k = n; k-- > 0 && !res[k].ok && hi >= lo + 3;)
                if (k <= hi) s.excluded.push_back({s.r[hi--], no_root});
            edge_fail_hi = 0;
        }
        if (hi - lo + 1 < n) {
            a_top = s.A[hi];
            b_bottom = s.B[lo];
            auto cut = [lo = lo, hi = hi](std::vector<double>& v) {
                v = std::vector<double>(v.begin() + lo, v.begin() + hi + 1);
            };
            for (auto* v : {&s.r, &G1, &G2, &N1, &N2}) cut(*v);
            prev = std::numeric_limits<double>::infinity();
        }
    }
    const size_t n_final = s.r.size();
    if (p.b == 0.0)
        solve_coefficients(p, spec, s.r, G1, G2, a_top, b_bottom, opts.unit_phi_coefficient, s.A, s.B);
    s.g1 = G1;
    s.g2 = G2;
    s.res1.resize(n_final);
    s.res2.resize(n_final);
    s.A_prime.resize(n_final);
    s.B_prime.resize(n_final);
    for (size_t k = 0; k < n_final; ++k) {
        const FeResidual f = integral_residuals(p, spec, s.A[k], s.B[k], s.r[k], G1[k], G2[k]);
        s.res1[k] = f.res1 / f.scale1;
        s.res2[k] = f.res2 / f.scale2;
        const Slope sl =
            coefficient_slope(p, spec, s.r[k], G1[k], G2[k], s.A[k], s.B[k], opts.unit_phi_coefficient);
        s.A_prime[k] = sl.a;
        s.B_prime[k] = sl.b;
    }
    s.converged = true;
    return s;
}

void write_boundary_csv(const BoundarySolution& s, std::ostream& os) {
    os << "r,g1,g2,A,B,res1,res2\n";
    for (size_t k = 0; k < s.r.size(); ++k)
        os << num(s.r[k]) << ',' << num(s.g1[k]) << ',' << num(s.g2[k]) << ',' << num(s.A[k])
           << ',' << num(s.B[k]) << ',' << num(s.res1[k]) << ',' << num(s.res2[k]) << '\n';
}

BoundarySolution read_boundary_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("r,g1,g2,A,B,res1,res2", 0) != 0)
        throw DomainError("read_boundary_csv: unexpected header");
    BoundarySolution s;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw DomainError("read_boundary_csv: malformed row");
        s.r.push_back(parse_num(f[0]));
        s.g1.push_back(parse_num(f[1]));
        s.g2.push_back(parse_num(f[2]));
        s.A.push_back(parse_num(f[3]));
        s.B.push_back(parse_num(f[4]));
        s.res1.push_back(parse_num(f[5]));
        s.res2.push_back(parse_num(f[6]));
    }
    if (s.r.size() < 2) throw DomainError("read_boundary_csv: fewer than 2 nodes");
    for (std::size_t k = 1; k < s.r.size(); ++k)
        if (!(s.r[k] > s.r[k - 1])) throw DomainError("read_boundary_csv: r not increasing");
    // A', B' are not exported; the file is only written for a converged solve
    s.A_prime.assign(s.r.size(), 0.0);
    s.B_prime.assign(s.r.size(), 0.0);
    s.converged = true;
    return s;
}

}  // namespace ousc
