#include "ousc/hjb_fd.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ousc/errors.hpp"
#include "ousc/io.hpp"

namespace ousc {

void Grid2D::validate() const {
    if (nx < 16 || nr < 16) throw DomainError("grids: nx and nr must be at least 16");
    if (!(x_hi > x_lo)) throw DomainError("grids: x range is empty");
    if (!(r_hi > r_lo)) throw DomainError("grids: r range is empty");
}

FdOperator build_operator(const ModelParams& p, const CostSpec& spec, const Grid2D& g) {
    FdOperator op;
    op.grid = g;
    op.k = p.cost_k;
    const int n = g.nx * g.nr;
    op.cl.assign(n, 0.0);
    op.cd.assign(n, 0.0);
    op.cu.assign(n, 0.0);
    op.rhs.assign(n, 0.0);
    const double a = 0.5 * p.eta * p.eta;
    const double hx = g.hx();
    // edge rows: one-sided inward drift, curvature taken from the
    // uncontrolled solution
    std::vector<double> vxx_lo(g.nr), vxx_hi(g.nr);
    for (int j = 0; j < g.nr; ++j) {
        const double r = g.r(j);
        const double m = mu_bar(p, r);
        if (!(m > g.x_lo && m < g.x_hi))
            throw DomainTooSmall("x-range must contain the mean-reversion level at every r");
        vxx_lo[j] = v_hat(p, spec, g.x_lo, r, VhatWhich::dxx);
        vxx_hi[j] = v_hat(p, spec, g.x_hi, r, VhatWhich::dxx);
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        for (int j = 0; j < g.nr; ++j) {
            const double r = g.r(j);
            const int k = op.idx(i, j);
            const double d = p.theta * (mu_bar(p, r) - x);
            const double f = cost_eval(spec, x, r).f;
            if (i == 0) {
                op.cd[k] = p.rho + d / hx;
                op.cu[k] = -d / hx;
                op.rhs[k] = f + a * vxx_lo[j];
            } else if (i == g.nx - 1) {
                op.cd[k] = p.rho - d / hx;
                op.cl[k] = d / hx;
                op.rhs[k] = f + a * vxx_hi[j];
            } else {
                double lo, up;
                if (std::abs(d) * hx <= 2.0 * a) {
                    lo = a / (hx * hx) - d / (2.0 * hx);
                    up = a / (hx * hx) + d / (2.0 * hx);
                } else {
                    lo = a / (hx * hx) + std::max(-d, 0.0) / hx;
                    up = a / (hx * hx) + std::max(d, 0.0) / hx;
                }
                op.cl[k] = -lo;
                op.cu[k] = -up;
                op.cd[k] = p.rho + lo + up;
                op.rhs[k] = f;
            }
        }
    }
    return op;
}

namespace {

enum Policy : unsigned char { kC = 0, kI = 1, kD = 2 };

inline double pde_term(const FdOperator& op, const std::vector<double>& v, int i, int j) {
    const int k = op.idx(i, j);
    const int nr = op.grid.nr;
    double t = op.cd[k] * v[k] - op.rhs[k];
    if (i > 0) t += op.cl[k] * v[k - nr];
    if (i < op.grid.nx - 1) t += op.cu[k] * v[k + nr];
    return t;
}

inline double continuation_value(const FdOperator& op, const std::vector<double>& v, int i,
                                 int j) {
    const int k = op.idx(i, j);
    const int nr = op.grid.nr;
    double s = op.rhs[k];
    if (i > 0) s -= op.cl[k] * v[k - nr];
    if (i < op.grid.nx - 1) s -= op.cu[k] * v[k + nr];
    return s / op.cd[k];
}

inline double node_residual(const FdOperator& op, const std::vector<double>& v, int i, int j) {
    const int k = op.idx(i, j);
    const double hr = op.grid.hr();
    double m = pde_term(op, v, i, j);
    m = std::max(m, (v[k] - v[k + 1]) / hr - op.k);  // -v_r - K, forward difference
    m = std::max(m, (v[k] - v[k - 1]) / hr - op.k);  // v_r - K, backward difference
    return std::abs(m);
}

inline double relaxed_update(const FdOperator& op, const std::vector<double>& v, int i, int j,
                             double omega) {
    const int k = op.idx(i, j);
    const double step = op.k * op.grid.hr();
    if (j == 0) return v[k + 1] + step;
    if (j == op.grid.nr - 1) return v[k - 1] + step;
    const double cont = v[k] + omega * (continuation_value(op, v, i, j) - v[k]);
    return std::min({cont, v[k + 1] + step, v[k - 1] + step});
}

std::vector<unsigned char> greedy_policy(const FdOperator& op, const std::vector<double>& v) {
    const Grid2D& g = op.grid;
    std::vector<unsigned char> pol(v.size(), kC);
    const double step = op.k * g.hr();
    for (int i = 0; i < g.nx; ++i) {
        pol[op.idx(i, 0)] = kI;
        pol[op.idx(i, g.nr - 1)] = kD;
        for (int j = 1; j < g.nr - 1; ++j) {
            const int k = op.idx(i, j);
            const double cont = continuation_value(op, v, i, j);
            const double up = v[k + 1] + step, dn = v[k - 1] + step;
            if (up < cont && up <= dn) pol[k] = kI;
            else if (dn < cont && dn < up) pol[k] = kD;
        }
    }
    return pol;
}

std::vector<double> solve_policy(const FdOperator& op, const std::vector<unsigned char>& pol) {
    const Grid2D& g = op.grid;
    const int n = g.nx * g.nr;
    const double step = op.k * g.hr();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * static_cast<size_t>(n));
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nr; ++j) {
            const int k = op.idx(i, j);
            switch (pol[k]) {
                case kC:
                    trip.emplace_back(k, k, op.cd[k]);
                    if (i > 0) trip.emplace_back(k, k - g.nr, op.cl[k]);
                    if (i < g.nx - 1) trip.emplace_back(k, k + g.nr, op.cu[k]);
                    rhs[k] = op.rhs[k];
                    break;
                case kI:
                    trip.emplace_back(k, k, 1.0);
                    trip.emplace_back(k, k + 1, -1.0);
                    rhs[k] = step;
                    break;
                default:
                    trip.emplace_back(k, k, 1.0);
                    trip.emplace_back(k, k - 1, -1.0);
                    rhs[k] = step;
                    break;
            }
        }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericError("solve_vi: policy matrix factorisation failed");
    Eigen::VectorXd x = lu.solve(rhs);
    return std::vector<double>(x.data(), x.data() + n);
}

// Policy improvement; only strictly better actions replace the current one,
// which rules out I/D cycles and keeps every policy matrix an M-matrix.
int improve_policy(const FdOperator& op, const std::vector<double>& v,
                   std::vector<unsigned char>& pol, bool parallel) {
    const Grid2D& g = op.grid;
    const double step = op.k * g.hr();
    int changed = 0;
#pragma omp parallel for reduction(+ : changed) schedule(static) if (parallel)
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 1; j < g.nr - 1; ++j) {
            const int k = op.idx(i, j);
            const double cand[3] = {continuation_value(op, v, i, j), v[k + 1] + step,
                                    v[k - 1] + step};
            const double cur = cand[pol[k]];
            int best = 0;
            for (int c = 1; c < 3; ++c)
                if (cand[c] < cand[best]) best = c;
            if (cand[best] < cur - 1e-14 * std::max(1.0, std::abs(cur)) && best != pol[k]) {
                pol[k] = static_cast<unsigned char>(best);
                ++changed;
            }
        }
    }
    return changed;
}

}  // namespace

double vi_residual_serial(const FdOperator& op, const std::vector<double>& v) {
    double m = 0.0;
    for (int i = 0; i < op.grid.nx; ++i)
        for (int j = 1; j < op.grid.nr - 1; ++j) m = std::max(m, node_residual(op, v, i, j));
    return m;
}

double vi_residual_parallel(const FdOperator& op, const std::vector<double>& v) {
    double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
    for (int i = 0; i < op.grid.nx; ++i)
        for (int j = 1; j < op.grid.nr - 1; ++j) m = std::max(m, node_residual(op, v, i, j));
    return m;
}

double psor_sweep_serial(const FdOperator& op, std::vector<double>& v, double omega) {
    double delta = 0.0;
    for (int color = 0; color < 2; ++color) {
        for (int i = 0; i < op.grid.nx; ++i) {
            for (int j = (i + color) % 2; j < op.grid.nr; j += 2) {
                const int k = op.idx(i, j);
                const double nv = relaxed_update(op, v, i, j, omega);
                delta = std::max(delta, std::abs(nv - v[k]));
                v[k] = nv;
            }
        }
    }
    return delta;
}

double psor_sweep_parallel(const FdOperator& op, std::vector<double>& v, double omega) {
    double delta = 0.0;
    for (int color = 0; color < 2; ++color) {
#pragma omp parallel for reduction(max : delta) schedule(static)
        for (int i = 0; i < op.grid.nx; ++i) {
            for (int j = (i + color) % 2; j < op.grid.nr; j += 2) {
                const int k = op.idx(i, j);
                const double nv = relaxed_update(op, v, i, j, omega);
                delta = std::max(delta, std::abs(nv - v[k]));
                v[k] = nv;
            }
        }
    }
    return delta;
}

namespace {

void fill_derived(FdSolution& sol, const std::vector<unsigned char>& pol) {
    const Grid2D& g = sol.grid;
    const int n = g.nx * g.nr;
    const double hx = g.hx(), hr = g.hr();
    sol.v_x.assign(n, 0.0);
    sol.v_r.assign(n, 0.0);
    sol.v_rx.assign(n, 0.0);
    sol.region.assign(n, Region::C);
    const auto& v = sol.v;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nr; ++j) {
            const int k = sol.idx(i, j);
            if (i == 0) sol.v_x[k] = (v[k + g.nr] - v[k]) / hx;
            else if (i == g.nx - 1) sol.v_x[k] = (v[k] - v[k - g.nr]) / hx;
            else sol.v_x[k] = (v[k + g.nr] - v[k - g.nr]) / (2.0 * hx);

            if (j == 0 || (pol[k] == kI && j < g.nr - 1)) sol.v_r[k] = (v[k + 1] - v[k]) / hr;
            else if (j == g.nr - 1 || pol[k] == kD) sol.v_r[k] = (v[k] - v[k - 1]) / hr;
            else sol.v_r[k] = (v[k + 1] - v[k - 1]) / (2.0 * hr);
        }
    }
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nr; ++j) {
            const int k = sol.idx(i, j);
            if (i == 0) sol.v_rx[k] = (sol.v_r[k + g.nr] - sol.v_r[k]) / hx;
            else if (i == g.nx - 1) sol.v_rx[k] = (sol.v_r[k] - sol.v_r[k - g.nr]) / hx;
            else sol.v_rx[k] = (sol.v_r[k + g.nr] - sol.v_r[k - g.nr]) / (2.0 * hx);
            if (sol.v_r[k] <= -sol.cost_k + sol.band) sol.region[k] = Region::I;
            else if (sol.v_r[k] >= sol.cost_k - sol.band) sol.region[k] = Region::D;
        }
    }
}

}  // namespace

FdSolution solve_vi(const ModelParams& p, const CostSpec& spec, const Grid2D& grid,
                    const FdOptions& opts) {
    p.validate();
    validate_cost(spec);
    grid.validate();
    const FdOperator op = build_operator(p, spec, grid);
    FdSolution sol;
    sol.grid = grid;
    sol.cost_k = p.cost_k;
    sol.band = 10.0 * opts.tol;
    const int n = grid.nx * grid.nr;

    std::vector<unsigned char> pol;
    if (opts.method == FdMethod::howard) {
        pol.assign(n, kC);
        for (int i = 0; i < grid.nx; ++i) {
            pol[op.idx(i, 0)] = kI;
            pol[op.idx(i, grid.nr - 1)] = kD;
        }
        int it = 0;
        for (;; ++it) {
            if (it >= opts.max_iter) {
                sol.v = solve_policy(op, pol);
                throw IterationError("solve_vi: policy iteration did not converge",
                                     vi_residual_parallel(op, sol.v));
            }
            sol.v = solve_policy(op, pol);
            if (improve_policy(op, sol.v, pol, opts.parallel) == 0) break;
        }
        sol.iterations = it + 1;
    } else {
        sol.v.resize(n);
        for (int i = 0; i < grid.nx; ++i)
            for (int j = 0; j < grid.nr; ++j)
                sol.v[op.idx(i, j)] = v_hat(p, spec, grid.x(i), grid.r(j), VhatWhich::value);
        long sweep = 0;
        double delta = 0.0;
        for (;; ++sweep) {
            delta = opts.parallel ? psor_sweep_parallel(op, sol.v, opts.omega)
                                  : psor_sweep_serial(op, sol.v, opts.omega);
            if (delta < 1e-3 * opts.tol) break;
            if (sweep >= opts.max_sweeps)
                throw IterationError("solve_vi: PSOR did not converge", delta);
        }
        sol.iterations = static_cast<int>(sweep + 1);
        pol = greedy_policy(op, sol.v);
    }
    sol.residual_norm = opts.parallel ? vi_residual_parallel(op, sol.v)
                                      : vi_residual_serial(op, sol.v);

    if (opts.require_edge_action) {
        for (int i = 0; i < grid.nx; ++i) {
            if (pol[op.idx(i, 1)] != kI || pol[op.idx(i, grid.nr - 2)] != kD)
                throw DomainTooSmall(
                    "solve_vi: continuation region reaches the r-edges; widen the r-range");
        }
    }
    fill_derived(sol, pol);
    sol.bounds = extract_boundaries(sol);
    return sol;
}

BoundarySamples extract_boundaries(const FdSolution& sol) {
    const Grid2D& g = sol.grid;
    const double lo_thr = -sol.cost_k + sol.band, hi_thr = sol.cost_k - sol.band;
    BoundarySamples out;
    out.b1.assign(g.nx, -kAbsent);
    out.b2.assign(g.nx, kAbsent);
    out.g1.assign(g.nr, kAbsent);
    out.g2.assign(g.nr, -kAbsent);
    auto vr = [&](int i, int j) { return sol.v_r[sol.idx(i, j)]; };
    auto cross = [](double a0, double a1, double f0, double f1, double thr) {
        if (f1 == f0) return a0;
        return a0 + (a1 - a0) * (thr - f0) / (f1 - f0);
    };
    for (int i = 0; i < g.nx; ++i) {
        // forced edge rows do not count as resolved action
        int top_i = -1;
        for (int j = 1; j < g.nr - 1; ++j)
            if (vr(i, j) <= lo_thr) top_i = j;
        if (top_i == g.nr - 2) out.b1[i] = kAbsent;
        else if (top_i >= 1) out.b1[i] = cross(g.r(top_i), g.r(top_i + 1), vr(i, top_i), vr(i, top_i + 1), lo_thr);
        int bot_d = -1;
        for (int j = g.nr - 2; j >= 1; --j)
            if (vr(i, j) >= hi_thr) bot_d = j;
        if (bot_d == 1) out.b2[i] = -kAbsent;
        else if (bot_d >= 1) out.b2[i] = cross(g.r(bot_d), g.r(bot_d - 1), vr(i, bot_d), vr(i, bot_d - 1), hi_thr);
    }
    for (int j = 1; j < g.nr - 1; ++j) {
        int last_not_i = -1;
        for (int i = 0; i < g.nx; ++i)
            if (vr(i, j) > lo_thr) last_not_i = i;
        if (last_not_i == -1) out.g1[j] = -kAbsent;
        else if (last_not_i == g.nx - 1) out.g1[j] = kAbsent;
        else out.g1[j] = cross(g.x(last_not_i), g.x(last_not_i + 1), vr(last_not_i, j), vr(last_not_i + 1, j), lo_thr);
        int first_not_d = -1;
        for (int i = g.nx - 1; i >= 0; --i)
            if (vr(i, j) < hi_thr) first_not_d = i;
        if (first_not_d == -1) out.g2[j] = kAbsent;
        else if (first_not_d == 0) out.g2[j] = -kAbsent;
        else out.g2[j] = cross(g.x(first_not_d), g.x(first_not_d - 1), vr(first_not_d, j), vr(first_not_d - 1, j), hi_thr);
    }
    out.g1.front() = -kAbsent;  // r_lo row: whole slice pushed up
    out.g2.front() = -kAbsent;
    out.g1.back() = kAbsent;
    out.g2.back() = kAbsent;
    return out;
}

namespace {

// Does zeta1 or zeta2 (zeros of theta b Vhat_x - f_r -+ rho K) lie inside
// [x_lo, x_hi] at this r?  Both maps are monotone in x, so a sign change
// between the endpoints decides it.
bool zeta_inside(const ModelParams& p, const CostSpec& spec, double x_lo, double x_hi, double r) {
    auto map = [&](double x) {
        return p.theta * p.b * v_hat(p, spec, x, r, VhatWhich::dx) - cost_eval(spec, x, r).fr;
    };
    const double a = map(x_lo), b = map(x_hi);
    const double rk = p.rho * p.cost_k;
    return ((a - rk) * (b - rk) <= 0) || ((a + rk) * (b + rk) <= 0);
}

}  // namespace

Grid2D auto_box(const ModelParams& p, const CostSpec& spec, double x_lo, double x_hi, int nx,
                int nr) {
    double center = 0.0;
    if (auto* q = std::get_if<QuadraticCost>(&spec)) center = q->r_tilde;
    if (auto* a = std::get_if<AsymmetricPowerCost>(&spec)) center = a->r_tilde;
    const double step = 0.02;
    const int reach = 250;
    int k_lo = reach + 1, k_hi = -reach - 1;
    for (int k = -reach; k <= reach; ++k) {
        if (!zeta_inside(p, spec, x_lo, x_hi, center + k * step)) continue;
        k_lo = std::min(k_lo, k);
        k_hi = std::max(k_hi, k);
    }
    if (k_lo > k_hi)
        throw DomainTooSmall("auto_box: the zeta curves do not cross the x-range");
    // refine the two ends between the last inside and first outside scan point
    auto refine = [&](double in, double out) {
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (in + out);
            (zeta_inside(p, spec, x_lo, x_hi, mid) ? in : out) = mid;
        }
        return in;
    };
    const double lo = refine(center + k_lo * step, center + (k_lo - 1) * step);
    const double hi = refine(center + k_hi * step, center + (k_hi + 1) * step);
    const double w = hi - lo;
    return Grid2D{x_lo, x_hi, nx, lo - 0.2 * w, hi + 0.2 * w, nr};
}

double interp_field(const FdSolution& sol, const std::vector<double>& field, double x, double r) {
    const Grid2D& g = sol.grid;
    const double fx = std::clamp((x - g.x_lo) / g.hx(), 0.0, g.nx - 1.0);
    const double fr = std::clamp((r - g.r_lo) / g.hr(), 0.0, g.nr - 1.0);
    const int i = std::min(static_cast<int>(fx), g.nx - 2);
    const int j = std::min(static_cast<int>(fr), g.nr - 2);
    const double tx = fx - i, tr = fr - j;
    const double v00 = field[sol.idx(i, j)], v10 = field[sol.idx(i + 1, j)];
    const double v01 = field[sol.idx(i, j + 1)], v11 = field[sol.idx(i + 1, j + 1)];
    return (1 - tx) * (1 - tr) * v00 + tx * (1 - tr) * v10 + (1 - tx) * tr * v01 + tx * tr * v11;
}

void write_fd_csv(const FdSolution& sol, std::ostream& os) {
    os << "x,r,v,v_x,v_r,v_rx,region\n";
    const Grid2D& g = sol.grid;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nr; ++j) {
            const int k = sol.idx(i, j);
            os << num(g.x(i)) << ',' << num(g.r(j)) << ',' << num(sol.v[k]) << ','
               << num(sol.v_x[k]) << ',' << num(sol.v_r[k]) << ',' << num(sol.v_rx[k]) << ','
               << static_cast<char>(sol.region[k]) << '\n';
        }
}

void write_boundaries_r_csv(const FdSolution& sol, std::ostream& os) {
    os << "r,g1,g2\n";
    for (int j = 0; j < sol.grid.nr; ++j)
        os << num(sol.grid.r(j)) << ',' << num(sol.bounds.g1[j]) << ','
           << num(sol.bounds.g2[j]) << '\n';
}

void write_boundaries_x_csv(const FdSolution& sol, std::ostream& os) {
    os << "x,b1,b2\n";
    for (int i = 0; i < sol.grid.nx; ++i)
        os << num(sol.grid.x(i)) << ',' << num(sol.bounds.b1[i]) << ','
           << num(sol.bounds.b2[i]) << '\n';
}

FdSolution read_fd_csv(std::istream& is, double cost_k, double band) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,r,v,v_x,v_r,v_rx,region", 0) != 0)
        throw DomainError("read_fd_csv: unexpected header");
    struct Row {
        double x, r, v, vx, vr, vrx;
        char region;
    };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw DomainError("read_fd_csv: malformed row");
        rows.push_back({parse_num(f[0]), parse_num(f[1]), parse_num(f[2]), parse_num(f[3]),
                        parse_num(f[4]), parse_num(f[5]), f[6].empty() ? 'C' : f[6][0]});
    }
    if (rows.empty()) throw DomainError("read_fd_csv: no rows");
    int nr = 0;
    while (nr < static_cast<int>(rows.size()) && rows[nr].x == rows[0].x) ++nr;
    if (nr == 0 || rows.size() % nr != 0) throw DomainError("read_fd_csv: ragged grid");
    FdSolution sol;
    sol.grid = Grid2D{rows.front().x, rows.back().x, static_cast<int>(rows.size() / nr),
                      rows.front().r, rows.back().r, nr};
    sol.grid.validate();
    sol.cost_k = cost_k;
    sol.band = band;
    for (const Row& r : rows) {
        sol.v.push_back(r.v);
        sol.v_x.push_back(r.vx);
        sol.v_r.push_back(r.vr);
        sol.v_rx.push_back(r.vrx);
        sol.region.push_back(static_cast<Region>(r.region));
    }
    sol.bounds = extract_boundaries(sol);
    return sol;
}

}  // namespace ousc
