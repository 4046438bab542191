#include "ousc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ousc/errors.hpp"
#include "ousc/ou_special.hpp"

namespace ousc {
namespace {

CheckResult upper(std::string name, double value, double limit, std::string detail = {}) {
    return {std::move(name), value <= limit, value, limit, std::move(detail)};
}

CheckResult lower(std::string name, double value, double limit, std::string detail = {}) {
    return {std::move(name), value >= limit, value, limit, std::move(detail)};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::vector<double> row_of(const FdSolution& fd, const std::vector<double>& field, int j) {
    std::vector<double> out(fd.grid.nx);
    for (int i = 0; i < fd.grid.nx; ++i) out[i] = field[fd.idx(i, j)];
    return out;
}

std::vector<double> x_nodes(const Grid2D& g) {
    std::vector<double> xs(g.nx);
    for (int i = 0; i < g.nx; ++i) xs[i] = g.x(i);
    return xs;
}

// linear interpolation along one uniform row
double along(const Grid2D& g, const std::vector<double>& row, double x) {
    const double t = std::clamp((x - g.x_lo) / g.hx(), 0.0, double(g.nx - 1));
    const int i = std::min(static_cast<int>(t), g.nx - 2);
    const double w = t - i;
    return (1 - w) * row[i] + w * row[i + 1];
}

bool finite_pair(const BoundarySamples& b, int j) {
    return std::isfinite(b.g1[j]) && std::isfinite(b.g2[j]);
}

// FD rows whose continuation band is fully inside the box
std::vector<int> band_rows(const FdSolution& fd) {
    std::vector<int> rows;
    for (int j = 1; j < fd.grid.nr - 1; ++j)
        if (finite_pair(fd.bounds, j)) rows.push_back(j);
    return rows;
}

double mixed_central(const FdSolution& fd, int i, int j) {
    const double hx = fd.grid.hx(), hr = fd.grid.hr();
    return (fd.at(i + 1, j + 1) - fd.at(i + 1, j - 1) - fd.at(i - 1, j + 1) +
            fd.at(i - 1, j - 1)) /
           (4 * hx * hr);
}

}  // namespace

Checks check_special(const ModelParams& p) {
    Checks out;
    const double a = 0.5 * p.eta * p.eta;
    double ode = 0, spread = 0;
    const double w0 = wronskian_at(p, 0.0);
    for (int k = -50; k <= 50; ++k) {
        const double s = 0.1 * k;
        for (const EigenEval& e : {psi_eval(p, s), phi_eval(p, s)}) {
            const double res = a * e.d2 - p.theta * s * e.d1 - p.rho * e.value;
            const double scale =
                a * std::abs(e.d2) + p.theta * std::abs(s * e.d1) + p.rho * std::abs(e.value);
            ode = std::max(ode, std::abs(res) / scale);
        }
        spread = std::max(spread, std::abs(wronskian_at(p, s) / w0 - 1));
    }
    out.push_back(upper("psi/phi ODE residual (relative, |s|<=5)", ode, 1e-6));
    out.push_back(upper("Wronskian constancy (relative, |s|<=5)", spread, 1e-8));

    const double m = mu_bar(p, 0.0);
    double green_err = 0;
    for (double x : {m - 1, m, m + 1}) {
        const double rv = resolvent(p, [](double) { return 1.0; }, x, 0.0).value;
        green_err = std::max(green_err, std::abs(p.rho * rv - 1));
    }
    out.push_back(upper("Green resolvent of 1 vs 1/rho (relative)", green_err, 1e-4));
    return out;
}

Checks check_vhat(const ModelParams& p, const CostSpec& spec, std::uint64_t seed) {
    Checks out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), ur(-0.5, 0.5);
    std::vector<std::pair<double, double>> pts(20);
    for (auto& pt : pts) pt = {ux(rng), ur(rng)};

    if (std::holds_alternative<QuadraticCost>(spec)) {
        double err = 0;
        for (auto [x, r] : pts) {
            const double c = v_hat_closed(p, spec, x, r, VhatWhich::value);
            const double g = v_hat_green(p, spec, x, r, VhatWhich::value);
            err = std::max(err, std::abs(c - g) / std::max(std::abs(c), 1e-300));
        }
        out.push_back(upper("Vhat closed form vs Green route (relative, 20 points)", err, 1e-4));
    }

    const double h = 1e-2, a = 0.5 * p.eta * p.eta;
    double res = 0;
    for (auto [x, r] : pts) {
        const double v0 = v_hat(p, spec, x, r, VhatWhich::value);
        const double vp = v_hat(p, spec, x + h, r, VhatWhich::value);
        const double vm = v_hat(p, spec, x - h, r, VhatWhich::value);
        const double vxx = (vp - 2 * v0 + vm) / (h * h);
        const double vx = (vp - vm) / (2 * h);
        const double drift = p.theta * (mu_bar(p, r) - x);
        const double f = cost_eval(spec, x, r).f;
        const double scale =
            a * std::abs(vxx) + std::abs(drift * vx) + p.rho * std::abs(v0) + std::abs(f);
        res = std::max(res, std::abs(a * vxx + drift * vx - p.rho * v0 + f) / scale);
    }
    out.push_back(upper("(L - rho) Vhat + f, central differences (relative)", res, 1e-4));
    return out;
}

Checks check_fd(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                const FdOptions& opts) {
    Checks out;
    const Grid2D& g = fd.grid;
    const double hx = g.hx(), hr = g.hr();

    double grad = -fd.cost_k;
    for (int i = 1; i < g.nx - 1; ++i)
        for (int j = 0; j < g.nr - 1; ++j)
            grad = std::max(grad, std::abs(fd.at(i, j + 1) - fd.at(i, j)) / hr - fd.cost_k);
    out.push_back(upper("gradient constraint max |v_r| - K", grad, 1e-6));

    double conv = 0;
    for (int i = 1; i < g.nx - 1; ++i)
        for (int j = 1; j < g.nr - 1; ++j) {
            const double c = 2 * fd.at(i, j);
            conv = std::min({conv, fd.at(i + 1, j) + fd.at(i - 1, j) - c,
                             fd.at(i, j + 1) + fd.at(i, j - 1) - c,
                             fd.at(i + 1, j + 1) + fd.at(i - 1, j - 1) - c,
                             fd.at(i + 1, j - 1) + fd.at(i - 1, j + 1) - c});
        }
    out.push_back(lower("discrete convexity min second difference", conv, -1e-6));

    double mixed = -kAbsent;
    for (int i = 1; i < g.nx - 2; ++i)
        for (int j = 1; j < g.nr - 2; ++j)
            mixed = std::max(mixed, (fd.at(i + 1, j + 1) - fd.at(i + 1, j) - fd.at(i, j + 1) +
                                     fd.at(i, j)) /
                                        (hx * hr));
    out.push_back(upper("max v_rx (forward mixed difference)", mixed, 1e-6));

    const FdOperator op = build_operator(p, spec, g);
    double pde = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.nr - 1; ++j) {
            if (fd.region[fd.idx(i, j)] != Region::C) continue;
            const int k = op.idx(i, j);
            double t = op.cd[k] * fd.v[k] - op.rhs[k];
            if (i > 0) t += op.cl[k] * fd.v[k - g.nr];
            if (i < g.nx - 1) t += op.cu[k] * fd.v[k + g.nr];
            pde = std::max(pde, std::abs(t));
        }
    out.push_back(upper("PDE residual on the inaction set", pde, 10 * opts.tol));
    return out;
}

RefinementStudy refinement_study(const ModelParams& p, const CostSpec& spec, const Grid2D& base,
                                 const FdOptions& opts) {
    Grid2D c = base, f = base;
    c.nx = (base.nx + 1) / 2;
    c.nr = (base.nr + 1) / 2;
    f.nx = 2 * base.nx - 1;
    f.nr = 2 * base.nr - 1;
    if ((base.nx - 1) % 2 || (base.nr - 1) % 2)
        throw DomainError("refinement_study: node counts must be odd");
    return {solve_vi(p, spec, c, opts), solve_vi(p, spec, base, opts), solve_vi(p, spec, f, opts)};
}

Checks check_convergence(const RefinementStudy& st) {
    const Grid2D& g = st.coarse.grid;
    const int mx = g.nx / 10, mr = g.nr / 10;
    double e1 = 0, e2 = 0;
    for (int i = mx; i < g.nx - mx; ++i)
        for (int j = mr; j < g.nr - mr; ++j) {
            const double v1 = st.coarse.at(i, j), v2 = st.mid.at(2 * i, 2 * j),
                         v4 = st.fine.at(4 * i, 4 * j);
            e1 = std::max(e1, std::abs(v1 - v2));
            e2 = std::max(e2, std::abs(v2 - v4));
        }
    const double order = std::log2(e1 / e2);
    return {lower("self-convergence order (max-norm, " + std::to_string(g.nx) + "/" +
                      std::to_string(st.mid.grid.nx) + "/" + std::to_string(st.fine.grid.nx) +
                      ")",
                  order, 1.8, "differences " + fmt(e1) + ", " + fmt(e2))};
}

namespace {

double boundary_mixed(const FdSolution& fd) {
    const Grid2D& g = fd.grid;
    const int lo = g.nx / 10, hi = 9 * g.nx / 10;
    double m = 0;
    for (int j = 1; j < g.nr - 1; ++j) {
        int first_i = -1, last_d = -1;
        for (int i = 0; i < g.nx; ++i) {
            const Region rg = fd.region[fd.idx(i, j)];
            if (rg == Region::I && first_i < 0) first_i = i;
            if (rg == Region::D) last_d = i;
        }
        for (int i : {first_i, last_d})
            if (i >= lo && i <= hi && i > 0 && i < g.nx - 1)
                m = std::max(m, std::abs(mixed_central(fd, i, j)));
    }
    return m;
}

}  // namespace

Checks check_smooth_fit(const RefinementStudy& st) {
    const double a = boundary_mixed(st.mid), b = boundary_mixed(st.fine);
    return {lower("smooth fit: max |v_rx| on boundary nodes, ratio under halving", a / b, 1.5,
                  "max |v_rx| " + fmt(a) + " -> " + fmt(b))};
}

Checks check_geometry(const ModelParams& p, const CostSpec& spec, const FdSolution& fd) {
    Checks out;
    const Grid2D& g = fd.grid;
    const double hx = g.hx(), hr = g.hr();
    const BoundarySamples& bs = fd.bounds;

    long mono = 0;
    for (int i = 1; i + 1 < g.nx - 1; ++i) {
        for (const auto* b : {&bs.b1, &bs.b2}) {
            const double u = (*b)[i], w = (*b)[i + 1];
            if (std::isfinite(u) && std::isfinite(w) && w < u - hr) ++mono;
        }
    }
    out.push_back(upper("b1, b2 nondecreasing (violations over one cell)", double(mono), 0));

    long order = 0;
    for (int j = 1; j < g.nr - 1; ++j)
        if (finite_pair(bs, j) && !(bs.g1[j] > bs.g2[j])) ++order;
    out.push_back(upper("g1 > g2 (violations)", double(order), 0));

    long zeta = 0, rows = 0;
    const std::vector<double> xs = x_nodes(g);
    for (int j : band_rows(fd)) {
        const std::vector<double> vx = row_of(fd, fd.v_x, j);
        const ZetaPair z =
            zeta_bounds(p, spec, [&](double x) { return along(g, vx, x); }, g.r(j), g.x_lo, g.x_hi);
        ++rows;
        if (!(bs.g2[j] <= z.zeta2 + hx && z.zeta2 < z.zeta1 && z.zeta1 <= bs.g1[j] + hx)) ++zeta;
    }
    out.push_back(upper("g2 <= zeta2 < zeta1 <= g1 within one cell (violations)", double(zeta), 0,
                        std::to_string(rows) + " rows"));
    return out;
}

Checks check_free_boundary(const ModelParams&, const CostSpec&, const FdSolution& fd,
                           const BoundarySolution& bsol) {
    Checks out;
    double res = 0;
    for (std::size_t k = 0; k < bsol.r.size(); ++k)
        res = std::max({res, std::abs(bsol.res1[k]), std::abs(bsol.res2[k])});
    out.push_back(upper("integral equation residuals (K psi'/S' scale)", res, 1e-6,
                        std::to_string(bsol.r.size()) + " nodes"));

    const Grid2D& g = fd.grid;
    double dev = 0;
    long compared = 0;
    for (std::size_t k = 1; k + 1 < bsol.r.size(); ++k) {
        const double t = (bsol.r[k] - g.r_lo) / g.hr();
        const int j = std::clamp(static_cast<int>(std::floor(t)), 0, g.nr - 2);
        const double w = t - j;
        if (!finite_pair(fd.bounds, j) || !finite_pair(fd.bounds, j + 1)) continue;
        const double f1 = (1 - w) * fd.bounds.g1[j] + w * fd.bounds.g1[j + 1];
        const double f2 = (1 - w) * fd.bounds.g2[j] + w * fd.bounds.g2[j + 1];
        dev = std::max({dev, std::abs(bsol.g1[k] - f1), std::abs(bsol.g2[k] - f2)});
        ++compared;
    }
    out.push_back(upper("|g - g_FD| in FD cells", dev / g.hx(), 2.0,
                        std::to_string(compared) + " interior nodes"));
    return out;
}

ModelParams decoupled_params(const ModelParams& p) {
    ModelParams q = p;
    q.b = 0;
    return q;
}

CostSpec decoupled_cost() { return QuadraticCost{1.0, 0.0, 1.0, 0.0, 0.5}; }

CostSpec bounded_rate_cost() {
    AsymmetricPowerCost a;
    a.alpha = 1;
    a.p = 2;
    a.beta = 1;
    a.q = 3;
    a.kappa = 1;
    a.x_cap = 1;
    return a;
}

Checks check_decoupled(const ModelParams& p0, const CostSpec& spec, double cell) {
    Checks out;
    const ModelParams p = decoupled_params(p0);
    std::vector<double> r;
    for (int k = 0; k <= 40; ++k) r.push_back(-0.2 + 0.01 * k);
    const double x_lo = -3, x_hi = 3;
    const BoundarySolution bsol = solve_system(p, spec, start_from_zeta(p, spec, r, x_lo, x_hi));
    out.push_back(upper("b = 0: outer passes", bsol.iterations, 1));

    std::vector<double> xs(2001), vx(2001, 0.0);
    for (int i = 0; i < 2001; ++i) xs[i] = x_lo + (x_hi - x_lo) * i / 2000.0;
    double dev = 0;
    for (std::size_t k = 0; k < bsol.r.size(); ++k) {
        const GameSlice gs = solve_game_slice(p, spec, xs, vx, bsol.r[k]);
        dev = std::max({dev, std::abs(gs.stop_upper - bsol.g2[k]),
                        std::abs(gs.stop_lower - bsol.g1[k])});
    }
    out.push_back(upper("b = 0: |g - g_1D| in FD cells", dev / cell, 2.0,
                        std::to_string(bsol.r.size()) + " nodes"));
    return out;
}

Checks check_dynkin(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                    const BoundarySolution& bsol, const VerifySettings& s) {
    Checks out;
    const Grid2D& g = fd.grid;
    const std::vector<double> xs = x_nodes(g);
    const std::size_t n = bsol.r.size();
    if (n < 3) throw DomainError("check_dynkin: boundary solution has fewer than 3 nodes");
    const double r_a = bsol.r[1], r_b = bsol.r[n - 2];

    std::vector<int> rows;
    for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double r = r_a + frac * (r_b - r_a);
        rows.push_back(std::clamp(static_cast<int>(std::lround((r - g.r_lo) / g.hr())), 1,
                                  g.nr - 2));
    }

    double ratio = 0;
    long bad_shape = 0;
    for (int j : rows) {
        const std::vector<double> vx = row_of(fd, fd.v_x, j), vr = row_of(fd, fd.v_r, j);
        const GameSlice gs = solve_game_slice(p, spec, xs, vx, g.r(j));
        double err = 0, dux = 0;
        for (int i = 1; i < g.nx - 1; ++i) {
            err = std::max(err, std::abs(gs.u[i] - vr[i]));
            dux = std::max(dux, 0.5 * std::abs(gs.u[i + 1] - gs.u[i - 1]));
        }
        ratio = std::max(ratio, err / (2 * dux));
        for (int i = 0; i < g.nx; ++i) {
            if (std::abs(gs.u[i]) > fd.cost_k * (1 + 1e-12)) ++bad_shape;
            if (i > 0 && gs.u[i] > gs.u[i - 1] + 1e-12) ++bad_shape;
        }
    }
    out.push_back(upper("game slice |u - v_r| / (2 hx max|u_x|), 5 slices", ratio, 1.0));
    out.push_back(upper("game slice -K <= u <= K, u nonincreasing (violations)", double(bad_shape),
                        0));

    double z = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double r = g.r(rows[k]);
        const double x = 0.5 * (bsol.interp(bsol.g1, r) + bsol.interp(bsol.g2, r));
        const SaddleEstimate e = simulate_saddle(p, spec, bsol, x, r, s.n_paths, s.seed + k);
        z = std::max(z, std::abs(e.estimate - interp_field(fd, fd.v_r, x, r)) / e.std_error);
    }
    out.push_back(upper("MC saddle vs FD v_r (stderr units), 5 points", z, 3.0));

    const int jm = rows[2];
    const double r = g.r(jm);
    const PayoffTable h = payoff_from_vx(p, spec, xs, row_of(fd, fd.v_x, jm), r);
    const StoppingRule star{bsol.interp(bsol.g2, r), bsol.interp(bsol.g1, r)};
    const double x = 0.5 * (star.sigma_level + star.tau_level);
    const SaddleEstimate base = simulate_game(p, h, star, x, r, s.n_paths, s.seed);
    double worst = -kAbsent;
    for (double d : {-0.2, -0.1, 0.1, 0.2}) {
        const SaddleEstimate a =
            simulate_game(p, h, {star.sigma_level + d, star.tau_level}, x, r, s.n_paths, s.seed);
        const SaddleEstimate b =
            simulate_game(p, h, {star.sigma_level, star.tau_level + d}, x, r, s.n_paths, s.seed);
        const double pa = std::hypot(a.std_error, base.std_error);
        const double pb = std::hypot(b.std_error, base.std_error);
        worst = std::max(worst, (base.estimate - a.estimate) / pa);
        worst = std::max(worst, (b.estimate - base.estimate) / pb);
    }
    out.push_back(upper("saddle perturbations, worst violation (pooled stderr units)", worst, 3.0,
                        "8 perturbed rules at r = " + fmt(r)));
    return out;
}

Checks check_optimality(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                        const VerifySettings& s) {
    Checks out;
    const Grid2D& g = fd.grid;
    const std::vector<int> rows = band_rows(fd);
    if (rows.size() < 5) throw DomainError("check_optimality: fewer than 5 rows with a band");
    const ReflectionBoundary bnd = ReflectionBoundary::from_fd(fd);

    const double qs[5] = {0.2, 0.35, 0.5, 0.65, 0.8};
    const double ws[5] = {0.5, 0.7, 0.3, 0.6, 0.4};
    double opt = 0, dn = 0, sub = -kAbsent;
    for (int k = 0; k < 5; ++k) {
        const int j = rows[static_cast<std::size_t>(qs[k] * (rows.size() - 1))];
        const double r0 = g.r(j);
        const double x0 = fd.bounds.g2[j] + ws[k] * (fd.bounds.g1[j] - fd.bounds.g2[j]);
        const std::uint64_t seed = s.seed + 100 + k;
        const double v = interp_field(fd, fd.v, x0, r0);
        const double inc = g.hx() * std::abs(interp_field(fd, fd.v_x, x0, r0)) +
                           g.hr() * std::abs(interp_field(fd, fd.v_r, x0, r0));

        const SimulationResult refl =
            simulate_reflected(p, spec, bnd, x0, r0, s.n_paths, seed, s.sim);
        opt = std::max(opt, std::abs(refl.cost_mean - v) / std::max(3 * refl.cost_stderr, inc));

        const ControlPolicy policies[3] = {DoNothing{}, JumpTo{r0 + 0.05},
                                           Band{r0 - 0.05, r0 + 0.05, 0.0}};
        for (int q = 0; q < 3; ++q) {
            const SimulationResult c =
                simulate_control(p, spec, policies[q], x0, r0, s.n_paths, seed, s.sim);
            if (q == 0) {
                const double vh = v_hat(p, spec, x0, r0, VhatWhich::value);
                dn = std::max(dn, std::abs(c.cost_mean - vh) / c.cost_stderr);
            }
            sub = std::max(sub, (v - c.cost_mean) / c.cost_stderr);
            sub = std::max(sub, (refl.cost_mean - c.cost_mean) /
                                    std::hypot(refl.cost_stderr, c.cost_stderr));
        }
    }
    out.push_back(upper("reflected cost vs FD V / max(3 stderr, cell increment), 5 points", opt,
                        1.0));
    out.push_back(upper("do-nothing cost vs Vhat (stderr units)", dn, 3.0));
    out.push_back(upper("suboptimal policies below V or reflected cost (stderr units)", sub, 3.0,
                        "do-nothing, jump by +0.05, constant band +-0.05"));
    return out;
}

Checks check_boundedness(const ModelParams& p, const CostSpec& spec, const FdSolution& fd,
                         const VerifySettings& s) {
    const BoundednessReport br = rate_bracket(p, spec);
    if (!br.applicable)
        return {{"bounded-rate bracket", false, 0, 0, "not applicable: " + br.reason}};
    const ReflectionBoundary bnd = ReflectionBoundary::from_fd(fd);
    const double r0 = 0.5 * (br.lower + br.upper);
    const SimulationResult res =
        simulate_reflected(p, spec, bnd, p.mu, r0, s.n_paths, s.seed + 200, s.sim);
    const BoundednessReport rep = boundedness_check(p, spec, res, fd.grid.hr());
    return {upper("rate paths outside [" + fmt(rep.lower) + ", " + fmt(rep.upper) + "] +- " +
                      fmt(rep.margin),
                  double(rep.violations), 0,
                  std::to_string(rep.checked) + " paths, range [" + fmt(rep.r_min) + ", " +
                      fmt(rep.r_max) + "]")};
}

Checks run_criterion(int k, const SuiteInputs& in) {
    const auto& [p, spec, fd, bsol, s] = in;
    switch (k) {
        case 1: return check_special(p);
        case 2: return check_vhat(p, spec, s.seed);
        case 3: {
            Checks c = check_fd(p, spec, fd, s.fd);
            Grid2D cg = fd.grid, fg = fd.grid;
            cg.nx = (cg.nx + 1) / 2;
            cg.nr = (cg.nr + 1) / 2;
            fg.nx = 2 * fg.nx - 1;
            fg.nr = 2 * fg.nr - 1;
            RefinementStudy st{solve_vi(p, spec, cg, s.fd), fd, solve_vi(p, spec, fg, s.fd)};
            const Checks o = check_convergence(st);
            c.insert(c.end(), o.begin(), o.end());
            return c;
        }
        case 4: return check_geometry(p, spec, fd);
        case 5: {
            // the mid grid is the given one; only the fine solve is new
            Grid2D f = fd.grid;
            f.nx = 2 * f.nx - 1;
            f.nr = 2 * f.nr - 1;
            RefinementStudy st;
            st.mid = fd;
            st.fine = solve_vi(p, spec, f, s.fd);
            return check_smooth_fit(st);
        }
        case 6: {
            Checks c = check_free_boundary(p, spec, fd, bsol);
            const Checks d = check_decoupled(p, decoupled_cost(), fd.grid.hx());
            c.insert(c.end(), d.begin(), d.end());
            return c;
        }
        case 7: return check_dynkin(p, spec, fd, bsol, s);
        case 8: return check_optimality(p, spec, fd, s);
        case 9: {
            const CostSpec br = bounded_rate_cost();
            const Grid2D g = auto_box(p, br, -4, 4, 161, 161);
            return check_boundedness(p, br, solve_vi(p, br, g, s.fd), s);
        }
        default: throw DomainError("run_criterion: no criterion " + std::to_string(k));
    }
}

std::string checks_json(const Checks& c) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const CheckResult& r : c)
        arr.push_back({{"name", r.name},
                       {"passed", r.passed},
                       {"value", r.value},
                       {"limit", r.limit},
                       {"detail", r.detail}});
    return arr.dump(2);
}

bool all_passed(const Checks& c) {
    return std::all_of(c.begin(), c.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace ousc
