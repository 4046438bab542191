#include "ousc/reflect_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "ousc/errors.hpp"
#include "ousc/io.hpp"
#include "ousc/mc.hpp"

namespace ousc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double table_lookup(const std::vector<double>& t, double x_lo, double hx, double x) {
    const double f = (x - x_lo) / hx;
    if (f <= 0.0) return t.front();
    const double last = static_cast<double>(t.size() - 1);
    if (f >= last) return t.back();
    const size_t i = static_cast<size_t>(f);
    const double w = f - static_cast<double>(i);
    const double a = t[i], b = t[i + 1];
    if (!std::isfinite(a) || !std::isfinite(b)) return w < 0.5 ? a : b;
    return (1 - w) * a + w * b;
}

// r as a function of x along a sampled increasing curve x = g(r).
std::vector<double> invert(const std::vector<double>& r, const std::vector<double>& g, double x_lo,
                           double hx, int n) {
    for (size_t k = 1; k < g.size(); ++k)
        if (!(g[k] > g[k - 1]))
            throw DegenerateGeometry("ReflectionBoundary: boundary curve not strictly increasing");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double x = x_lo + i * hx;
        if (x <= g.front()) out[i] = r.front();
        else if (x >= g.back()) out[i] = r.back();
        else {
            const size_t k = static_cast<size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
            out[i] = r[k] + (r[k + 1] - r[k]) * (x - g[k]) / (g[k + 1] - g[k]);
        }
    }
    return out;
}

}  // namespace

double ReflectionBoundary::lower(double x) const { return table_lookup(b1, x_lo, hx, x); }
double ReflectionBoundary::upper(double x) const { return table_lookup(b2, x_lo, hx, x); }

ReflectionBoundary ReflectionBoundary::from_fd(const FdSolution& fd) {
    ReflectionBoundary b;
    b.x_lo = fd.grid.x_lo;
    b.hx = fd.grid.hx();
    b.b1 = fd.bounds.b1;
    b.b2 = fd.bounds.b2;
    for (size_t i = 0; i < b.b1.size(); ++i) {
        if (b.b1[i] == kInf || b.b2[i] == -kInf)
            throw DomainError("ReflectionBoundary: an x-column lies entirely in an action region");
        if (b.b1[i] > b.b2[i]) throw DegenerateGeometry("ReflectionBoundary: b1 above b2");
    }
    return b;
}

ReflectionBoundary ReflectionBoundary::from_boundary(const BoundarySolution& bsol, int n) {
    const double lo = std::min(bsol.g2.front(), bsol.g1.front());
    const double hi = std::max(bsol.g1.back(), bsol.g2.back());
    ReflectionBoundary b;
    b.x_lo = lo;
    b.hx = (hi - lo) / (n - 1);
    b.b1 = invert(bsol.r, bsol.g1, lo, b.hx, n);
    b.b2 = invert(bsol.r, bsol.g2, lo, b.hx, n);
    return b;
}

namespace {

struct PathOut {
    double cost = 0, xi_plus = 0, xi_minus = 0, tail = 0, r_min = 0, r_max = 0;
    std::int64_t two_sided = 0;
};

// Lower/upper reflection curves in x; `initial` gives the target of the
// time-zero jump.
template <class Lo, class Hi>
SimulationResult run(const ModelParams& p, const CostSpec& spec, const Lo& lo, const Hi& hi,
                     double x0, double r0, std::int64_t n_paths, std::uint64_t seed,
                     const SimOptions& opts, double jump_target) {
    p.validate();
    validate_cost(spec);
    if (n_paths < 2) throw DomainError("simulate: need at least two paths");
    const double dt = opts.dt > 0 ? opts.dt : default_step(p);
    const OuStep step(p, dt);
    const double disc = std::exp(-p.rho * dt);
    const double k = p.cost_k;
    const std::int64_t n_steps =
        static_cast<std::int64_t>(std::ceil(std::log(1.0 / opts.cutoff) / (p.rho * dt)));
    std::vector<PathOut> out(n_paths);
    const int n_rec = static_cast<int>(std::min<std::int64_t>(opts.record_paths, n_paths));
    std::vector<PathRecord> rec(n_rec);

#pragma omp parallel for schedule(static) if (opts.parallel)
    for (std::int64_t i = 0; i < n_paths; ++i) {
        auto rng = path_rng(seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal;
        PathOut o;
        PathRecord* pr = i < n_rec ? &rec[i] : nullptr;
        double x = x0, r = r0, e = 1.0;
        // time-zero jump onto the closure of the inaction region
        double target = std::isnan(jump_target) ? std::clamp(r, lo(x), std::max(lo(x), hi(x)))
                                                : jump_target;
        if (target > r) o.xi_plus += target - r;
        else o.xi_minus += r - target;
        o.cost += k * std::abs(target - r);
        double raw_plus = o.xi_plus, raw_minus = o.xi_minus;  // undiscounted, for records
        r = target;
        o.r_min = o.r_max = r;
        double fcur = cost_eval(spec, x, r).f, fmax = fcur;
        auto record = [&](double t) {
            if (!pr) return;
            pr->t.push_back(t);
            pr->x.push_back(x);
            pr->r.push_back(r);
            pr->xi_plus.push_back(raw_plus);
            pr->xi_minus.push_back(raw_minus);
            pr->discounted_cost.push_back(o.cost);
        };
        record(0.0);
        for (std::int64_t s = 0; s < n_steps; ++s) {
            const double xn = step(x, mu_bar(p, r), normal(rng));
            const double en = e * disc;
            const double fn = cost_eval(spec, xn, r).f;
            o.cost += 0.5 * dt * (e * fcur + en * fn);
            x = xn;
            e = en;
            const double l = lo(x), h = hi(x);
            const bool up = r < l, down = r > h;
            o.two_sided += up && down;
            if (up) {
                o.xi_plus += en * (l - r);
                raw_plus += l - r;
                o.cost += en * k * (l - r);
                r = l;
            } else if (down) {
                o.xi_minus += en * (r - h);
                raw_minus += r - h;
                o.cost += en * k * (r - h);
                r = h;
            }
            fcur = (up || down) ? cost_eval(spec, x, r).f : fn;
            fmax = std::max(fmax, fcur);
            o.r_min = std::min(o.r_min, r);
            o.r_max = std::max(o.r_max, r);
            record((s + 1) * dt);
        }
        o.tail = e * fmax / p.rho;
        out[i] = o;
    }

    SimulationResult res;
    res.n_paths = n_paths;
    res.seed = seed;
    res.horizon_effective = n_steps * dt;
    double sum = 0, xp = 0, xm = 0, tail = 0;
    res.r_min.resize(n_paths);
    res.r_max.resize(n_paths);
    for (std::int64_t i = 0; i < n_paths; ++i) {
        sum += out[i].cost;
        xp += out[i].xi_plus;
        xm += out[i].xi_minus;
        tail += out[i].tail;
        res.two_sided_steps += out[i].two_sided;
        res.r_min[i] = out[i].r_min;
        res.r_max[i] = out[i].r_max;
    }
    const double n = static_cast<double>(n_paths);
    res.cost_mean = sum / n;
    double ss = 0;
    for (const PathOut& o : out) ss += (o.cost - res.cost_mean) * (o.cost - res.cost_mean);
    res.cost_stderr = std::sqrt(ss / (n - 1) / n);
    res.xi_plus_mean = xp / n;
    res.xi_minus_mean = xm / n;
    res.bias_bound = tail / n;
    res.records = std::move(rec);
    return res;
}

}  // namespace

SimulationResult simulate_reflected(const ModelParams& p, const CostSpec& spec,
                                    const ReflectionBoundary& bnd, double x0, double r0,
                                    std::int64_t n_paths, std::uint64_t seed,
                                    const SimOptions& opts) {
    return run(
        p, spec, [&](double x) { return bnd.lower(x); }, [&](double x) { return bnd.upper(x); },
        x0, r0, n_paths, seed, opts, std::nan(""));
}

SimulationResult simulate_control(const ModelParams& p, const CostSpec& spec,
                                  const ControlPolicy& policy, double x0, double r0,
                                  std::int64_t n_paths, std::uint64_t seed,
                                  const SimOptions& opts) {
    const auto none_lo = [](double) { return -kInf; };
    const auto none_hi = [](double) { return kInf; };
    if (std::holds_alternative<DoNothing>(policy))
        return run(p, spec, none_lo, none_hi, x0, r0, n_paths, seed, opts, r0);
    if (const auto* j = std::get_if<JumpTo>(&policy))
        return run(p, spec, none_lo, none_hi, x0, r0, n_paths, seed, opts, j->r);
    const Band& b = std::get<Band>(policy);
    if (!(b.hi >= b.lo)) throw DomainError("simulate_control: band needs lo <= hi");
    return run(
        p, spec, [&](double x) { return b.lo + b.slope * x; },
        [&](double x) { return b.hi + b.slope * x; }, x0, r0, n_paths, seed, opts, std::nan(""));
}

BoundednessReport rate_bracket(const ModelParams& p, const CostSpec& spec) {
    BoundednessReport rep;
    const auto* a = std::get_if<AsymmetricPowerCost>(&spec);
    const auto bound = cost_fx_bound(spec);
    if (!a || !bound) {
        rep.reason = "cost has no bound on |f_x|";
        return rep;
    }
    if (!(a->kappa > 0.0)) {
        rep.reason = "f_r is not strictly increasing in r (kappa = 0)";
        return rep;
    }
    if (p.b == 0.0) {
        rep.reason = "b = 0: the bracket needs the coupling between R and X";
        return rep;
    }
    const double cp = *bound / (p.rho + p.theta);
    const double lo_val = p.rho * p.cost_k - p.theta * std::abs(p.b) * cp;
    // f_r = 2 kappa (r - r~) inverts in closed form
    rep.lower = a->r_tilde + lo_val / (2.0 * a->kappa);
    rep.upper = a->r_tilde - lo_val / (2.0 * a->kappa);
    if (!(rep.lower <= rep.upper)) {
        rep.reason = "rho K exceeds theta b C': bracket is empty";
        return rep;
    }
    rep.applicable = true;
    return rep;
}

BoundednessReport boundedness_check(const ModelParams& p, const CostSpec& spec,
                                    const SimulationResult& result, double margin) {
    BoundednessReport rep = rate_bracket(p, spec);
    rep.margin = margin;
    if (!rep.applicable) return rep;
    rep.checked = static_cast<std::int64_t>(result.r_min.size());
    rep.r_min = kInf;
    rep.r_max = -kInf;
    for (size_t i = 0; i < result.r_min.size(); ++i) {
        rep.r_min = std::min(rep.r_min, result.r_min[i]);
        rep.r_max = std::max(rep.r_max, result.r_max[i]);
        if (result.r_min[i] < rep.lower - margin || result.r_max[i] > rep.upper + margin)
            ++rep.violations;
    }
    return rep;
}

std::string simulation_json(const SimulationResult& r) {
    nlohmann::ordered_json j;
    j["cost_mean"] = r.cost_mean;
    j["cost_stderr"] = r.cost_stderr;
    j["xi_plus_mean"] = r.xi_plus_mean;
    j["xi_minus_mean"] = r.xi_minus_mean;
    j["n_paths"] = r.n_paths;
    j["seed"] = r.seed;
    j["horizon_effective"] = r.horizon_effective;
    j["bias_bound"] = r.bias_bound;
    j["two_sided_steps"] = r.two_sided_steps;
    return j.dump(2);
}

std::string boundedness_json(const BoundednessReport& r) {
    nlohmann::ordered_json j;
    j["applicable"] = r.applicable;
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (r.applicable) {
        j["lower"] = r.lower;
        j["upper"] = r.upper;
        j["margin"] = r.margin;
        j["checked"] = r.checked;
        j["violations"] = r.violations;
        j["r_min"] = r.r_min;
        j["r_max"] = r.r_max;
    }
    return j.dump(2);
}

void write_paths_csv(const SimulationResult& r, std::ostream& os) {
    os << "path,t,x,r,xi_plus,xi_minus\n";
    for (size_t k = 0; k < r.records.size(); ++k) {
        const PathRecord& pr = r.records[k];
        for (size_t i = 0; i < pr.t.size(); ++i)
            os << k << ',' << num(pr.t[i]) << ',' << num(pr.x[i]) << ',' << num(pr.r[i]) << ','
               << num(pr.xi_plus[i]) << ',' << num(pr.xi_minus[i]) << '\n';
    }
}

}  // namespace ousc
