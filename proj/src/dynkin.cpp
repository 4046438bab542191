#include "ousc/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "ousc/errors.hpp"
#include "ousc/io.hpp"
#include "ousc/mc.hpp"

namespace ousc {

namespace {

enum Action : unsigned char { kCont, kUpper, kLower };

// Thomas algorithm; lo[0] and up[n-1] are ignored.
std::vector<double> tridiag(std::vector<double> lo, std::vector<double> di, std::vector<double> up,
                            std::vector<double> rhs) {
    const size_t n = di.size();
    for (size_t i = 1; i < n; ++i) {
        const double w = lo[i] / di[i - 1];
        di[i] -= w * up[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / di[n - 1];
    for (size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
    return x;
}

}  // namespace

GameSlice solve_game_slice(const ModelParams& p, const CostSpec& spec,
                           const std::vector<double>& x_nodes, const std::vector<double>& vx,
                           double r, const GameOptions& opts) {
    const size_t n = x_nodes.size();
    if (n < 16 || vx.size() != n) throw DomainError("solve_game_slice: need >= 16 nodes and matching V_x");
    const double hx = (x_nodes.back() - x_nodes.front()) / static_cast<double>(n - 1);
    const double a = 0.5 * p.eta * p.eta, k = p.cost_k;
    GameSlice g;
    g.r = r;
    g.x = x_nodes;
    g.source.resize(n);
    std::vector<double> cl(n, 0.0), cd(n), cu(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double x = x_nodes[i];
        g.source[i] = -p.theta * p.b * vx[i] + cost_eval(spec, x, r).fr;
        const double d = p.theta * (mu_bar(p, r) - x);
        if (i == 0) {
            cd[i] = p.rho + std::max(d, 0.0) / hx;
            cu[i] = -std::max(d, 0.0) / hx;
        } else if (i == n - 1) {
            cd[i] = p.rho + std::max(-d, 0.0) / hx;
            cl[i] = -std::max(-d, 0.0) / hx;
        } else {
            double lo, up;
            if (std::abs(d) * hx <= 2.0 * a) {
                lo = a / (hx * hx) - d / (2.0 * hx);
                up = a / (hx * hx) + d / (2.0 * hx);
            } else {
                lo = a / (hx * hx) + std::max(-d, 0.0) / hx;
                up = a / (hx * hx) + std::max(d, 0.0) / hx;
            }
            cl[i] = -lo;
            cu[i] = -up;
            cd[i] = p.rho + lo + up;
        }
    }
    std::vector<unsigned char> pol(n, kCont);
    std::vector<double> u(n, 0.0);
    for (int it = 0;; ++it) {
        if (it >= opts.max_iter)
            throw IterationError("solve_game_slice: policy iteration did not settle", 0.0);
        std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0), rhs(n);
        for (size_t i = 0; i < n; ++i) {
            if (pol[i] == kCont) {
                lo[i] = cl[i];
                di[i] = cd[i];
                up[i] = cu[i];
                rhs[i] = g.source[i];
            } else {
                rhs[i] = pol[i] == kUpper ? k : -k;
            }
        }
        u = tridiag(lo, di, up, rhs);
        int changed = 0;
        for (size_t i = 0; i < n; ++i) {
            double s = g.source[i];
            if (i > 0) s -= cl[i] * u[i - 1];
            if (i + 1 < n) s -= cu[i] * u[i + 1];
            const double cont = s / cd[i];
            const double tol = 1e-14 * std::max(1.0, k);
            unsigned char want = pol[i];
            if (cont > k + tol) want = kUpper;
            else if (cont < -k - tol) want = kLower;
            else if (cont < k - tol && cont > -k + tol) want = kCont;
            if (want != pol[i]) {
                pol[i] = want;
                ++changed;
            }
        }
        g.iterations = it + 1;
        if (!changed) break;
    }
    for (double& v : u) v = std::clamp(v, -k, k);
    g.u = u;
    // thresholds: last node of the u = K run from the left, first node of the
    // u = -K run from the right, interpolated on K -+ band
    const double band = 1e-9 * k;
    const double inf = std::numeric_limits<double>::infinity();
    size_t iu = 0;
    while (iu < n && u[iu] >= k - band) ++iu;
    if (iu == 0) g.stop_upper = -inf;
    else if (iu == n) g.stop_upper = inf;
    else {
        const double t = (u[iu - 1] - (k - band)) / (u[iu - 1] - u[iu]);
        g.stop_upper = x_nodes[iu - 1] + t * hx;
    }
    size_t il = n;
    while (il > 0 && u[il - 1] <= -k + band) --il;
    if (il == n) g.stop_lower = inf;
    else if (il == 0) g.stop_lower = -inf;
    else {
        const double t = (u[il - 1] - (-k + band)) / (u[il - 1] - u[il]);
        g.stop_lower = x_nodes[il - 1] + t * hx;
    }
    return g;
}

double PayoffTable::operator()(double x) const {
    const double f = (x - x_lo) / hx;
    if (f <= 0.0) return h.front();
    const double last = static_cast<double>(h.size() - 1);
    if (f >= last) return h.back();
    const size_t i = static_cast<size_t>(f);
    const double t = f - static_cast<double>(i);
    return (1 - t) * h[i] + t * h[i + 1];
}

double PayoffTable::sup_abs() const {
    double m = 0.0;
    for (double v : h) m = std::max(m, std::abs(v));
    return m;
}

PayoffTable payoff_from_boundary(const ModelParams& p, const CostSpec& spec,
                                 const BoundarySolution& bsol, double r, int n) {
    const double g1 = bsol.interp(bsol.g1, r), g2 = bsol.interp(bsol.g2, r);
    PayoffTable t;
    t.x_lo = g2;
    t.hx = (g1 - g2) / (n - 1);
    t.h.resize(n);
    for (int i = 0; i < n; ++i) t.h[i] = h_source(p, spec, bsol, std::min(g2 + i * t.hx, g1), r);
    return t;
}

PayoffTable payoff_from_vx(const ModelParams& p, const CostSpec& spec,
                           const std::vector<double>& x_nodes, const std::vector<double>& vx,
                           double r) {
    PayoffTable t;
    t.x_lo = x_nodes.front();
    t.hx = (x_nodes.back() - x_nodes.front()) / static_cast<double>(x_nodes.size() - 1);
    t.h.resize(x_nodes.size());
    for (size_t i = 0; i < x_nodes.size(); ++i)
        t.h[i] = -p.theta * p.b * vx[i] + cost_eval(spec, x_nodes[i], r).fr;
    return t;
}

SaddleEstimate simulate_game(const ModelParams& p, const PayoffTable& h, const StoppingRule& rule,
                             double x0, double r, std::int64_t n_paths, std::uint64_t seed,
                             const SaddleOptions& opts) {
    if (n_paths < 2) throw DomainError("simulate_game: need at least two paths");
    const double dt = opts.dt > 0 ? opts.dt : default_step(p);
    const double k = p.cost_k, level = mu_bar(p, r);
    const OuStep step(p, dt);
    const double disc = std::exp(-p.rho * dt);
    const double bridge = 2.0 / (p.eta * p.eta * dt);
    // already in a stopping region: the payoff is exact
    if (x0 <= rule.sigma_level || x0 >= rule.tau_level) {
        SaddleEstimate out;
        out.estimate = x0 <= rule.sigma_level ? k : -k;
        out.std_error = 0.0;
        out.n_paths = n_paths;
        out.seed = seed;
        return out;
    }
    std::vector<double> payoff(n_paths);
    std::vector<double> tail(n_paths, 0.0);  // discount left on unstopped paths
#pragma omp parallel for schedule(static) if (opts.parallel)
    for (std::int64_t i = 0; i < n_paths; ++i) {
        auto rng = path_rng(seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unif;
        double x = x0, e = 1.0, hx = h(x), acc = 0.0;
        for (;;) {
            const double xn = step(x, level, normal(rng));
            const double en = e * disc;
            bool lower = xn <= rule.sigma_level, upper = xn >= rule.tau_level;
            if (opts.bridge_correction && !lower && !upper) {
                const double ul = unif(rng), uu = unif(rng);
                lower = ul < std::exp(-bridge * (x - rule.sigma_level) * (xn - rule.sigma_level));
                upper = !lower &&
                        uu < std::exp(-bridge * (rule.tau_level - x) * (rule.tau_level - xn));
            }
            const double hn = h(std::clamp(xn, rule.sigma_level, rule.tau_level));
            acc += 0.5 * dt * (e * hx + en * hn);
            if (lower) {
                acc += en * k;
                break;
            }
            if (upper) {
                acc -= en * k;
                break;
            }
            x = xn;
            e = en;
            hx = hn;
            if (e < opts.discount_cutoff) {
                tail[i] = e;
                break;
            }
        }
        payoff[i] = acc;
    }
    double sum = 0.0, tail_sum = 0.0;
    std::int64_t open = 0;
    for (std::int64_t i = 0; i < n_paths; ++i) {
        sum += payoff[i];
        tail_sum += tail[i];
        open += tail[i] > 0.0;
    }
    const double mean = sum / static_cast<double>(n_paths);
    double ss = 0.0;
    for (double v : payoff) ss += (v - mean) * (v - mean);
    SaddleEstimate out;
    out.estimate = mean;
    out.std_error = std::sqrt(ss / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths));
    out.n_paths = n_paths;
    out.seed = seed;
    out.stopped_fraction = 1.0 - static_cast<double>(open) / static_cast<double>(n_paths);
    out.bias_bound = tail_sum / static_cast<double>(n_paths) * (h.sup_abs() / p.rho + k);
    if (out.stopped_fraction < 0.99)
        out.warning = "fewer than 99% of paths stopped before the discount cutoff";
    return out;
}

SaddleEstimate simulate_saddle(const ModelParams& p, const CostSpec& spec,
                               const BoundarySolution& bsol, double x, double r,
                               std::int64_t n_paths, std::uint64_t seed,
                               const SaddleOptions& opts) {
    const StoppingRule rule{bsol.interp(bsol.g2, r), bsol.interp(bsol.g1, r)};
    if (x <= rule.sigma_level || x >= rule.tau_level) {
        // stopped at time zero; no payoff table needed
        PayoffTable none{0.0, 1.0, {0.0, 0.0}};
        return simulate_game(p, none, rule, x, r, n_paths, seed, opts);
    }
    return simulate_game(p, payoff_from_boundary(p, spec, bsol, r), rule, x, r, n_paths, seed,
                         opts);
}

void write_game_csv(const GameSlice& g, std::ostream& os) {
    os << "x,u,source\n";
    for (size_t i = 0; i < g.x.size(); ++i)
        os << num(g.x[i]) << ',' << num(g.u[i]) << ',' << num(g.source[i]) << '\n';
}

std::string saddle_json(const SaddleEstimate& e) {
    nlohmann::ordered_json j;
    j["estimate"] = e.estimate;
    j["stderr"] = e.std_error;
    j["n_paths"] = e.n_paths;
    j["seed"] = e.seed;
    j["stopped_fraction"] = e.stopped_fraction;
    j["bias_bound"] = e.bias_bound;
    if (!e.warning.empty()) j["warning"] = e.warning;
    return j.dump(2);
}

}  // namespace ousc
