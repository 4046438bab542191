#include "ousc/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ousc/dynkin.hpp"
#include "ousc/errors.hpp"
#include "ousc/io.hpp"
#include "ousc/ou_special.hpp"
#include "ousc/verify.hpp"

namespace ousc {
namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

const std::map<std::string, std::set<std::string>> kSchema = {
    {"model", {"theta", "mu", "b", "eta", "rho", "K"}},
    {"cost",
     {"type", "alpha", "x_tilde", "beta", "r_tilde", "gamma", "p", "q", "kappa", "x_cap"}},
    {"grids", {"x_lo", "x_hi", "nx", "nr", "r_lo", "r_hi"}},
    {"solver",
     {"tol", "max_iter", "method", "omega", "max_sweeps", "fb_tol", "fb_max_outer", "fb_omega",
      "growth_bound"}},
    {"sim", {"seed", "paths", "dt", "cutoff", "x0", "r0", "record_paths"}},
    {"output", {"dir"}},
};

const std::set<std::string> kQuadraticKeys = {"type", "alpha", "x_tilde", "beta", "r_tilde",
                                              "gamma"};
const std::set<std::string> kPowerKeys = {"type", "alpha", "p",     "beta",
                                          "q",    "kappa", "r_tilde", "x_cap"};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& key) const {
        const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double real(const std::string& key, std::optional<double> fallback = std::nullopt) const {
        const auto s = raw(key);
        if (!s) {
            if (fallback) return *fallback;
            throw ConfigError(key, "missing required key");
        }
        const char* b = s->c_str();
        char* end = nullptr;
        const double v = std::strtod(b, &end);
        if (s->empty() || end != b + s->size()) throw ConfigError(key, "expected a number, got '" + *s + "'");
        return v;
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback) const {
        const auto s = raw(key);
        if (!s) return fallback;
        Int v{};
        const auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
        if (ec != std::errc() || p != s->data() + s->size())
            throw ConfigError(key, "expected an integer, got '" + *s + "'");
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        const auto s = raw(key);
        return s ? *s : fallback;
    }

private:
    const pt::ptree& tree_;
};

// Library validation messages start with the key they refer to.
[[noreturn]] void rethrow_as_config(const std::exception& e) {
    const std::string what = e.what();
    const auto sp = what.find(' ');
    const std::string key = what.substr(0, sp);
    throw ConfigError(key.find('.') != std::string::npos ? key : "config",
                      sp == std::string::npos ? what : what.substr(sp + 1));
}

void check_positive(double v, const char* key) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(key, "must be positive and finite");
}

json versions() {
    return {{"ousc", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"compiler", __VERSION__}};
}

std::string config_hash(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.output_dir.clear();  // where the files go is not part of the run
    return sha256_hex(serialize_config(c));
}

// Files produced by a command, held in memory until the command succeeds.
struct Outcome {
    std::vector<std::pair<std::string, std::string>> files;
    json residuals = json::object();
    int exit_code = kOk;
    std::string summary;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

template <class F>
std::string to_string_with(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

FdSolution load_fd(const RunConfig& cfg, const fs::path& dir) {
    const fs::path f = dir / "fd_solution.csv";
    if (!fs::exists(f))
        throw PrerequisiteError("missing " + f.string() + "; run solve-fd first");
    std::ifstream is(f);
    return read_fd_csv(is, cfg.model.cost_k, 10.0 * cfg.solver.tol);
}

BoundarySolution load_boundary(const fs::path& dir) {
    const fs::path f = dir / "boundary.csv";
    if (!fs::exists(f))
        throw PrerequisiteError("missing " + f.string() + "; run solve-fb first");
    std::ifstream is(f);
    return read_boundary_csv(is);
}

Outcome cmd_characteristics(const RunConfig& cfg) {
    const ModelParams& p = cfg.model;
    const double r = cfg.sim.r0;
    std::vector<double> xs(cfg.grids.nx);
    for (int i = 0; i < cfg.grids.nx; ++i)
        xs[i] = cfg.grids.x_lo + (cfg.grids.x_hi - cfg.grids.x_lo) * i / (cfg.grids.nx - 1);
    const CharacteristicsCache cache(p, r, xs);
    const double w = cache.wronskian();
    Outcome o;
    o.files.emplace_back("characteristics.csv", to_string_with([&](std::ostream& os) {
        os << "x,s,psi,phi,psi_x,phi_x,scale_density,speed_density,green_diag,wronskian_rel\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double s = xs[i] - mu_bar(p, r);
            os << num(xs[i]) << ',' << num(s) << ',' << num(cache.psi()[i].value) << ','
               << num(cache.phi()[i].value) << ',' << num(cache.psi()[i].d1) << ','
               << num(cache.phi()[i].d1) << ',' << num(cache.scale_density()[i]) << ','
               << num(cache.speed_density()[i]) << ',' << num(green(p, xs[i], xs[i], r)) << ','
               << num(wronskian_at(p, s) / w - 1) << '\n';
        }
    }));
    const bool ok = cache.wronskian_spread() < 1e-8;
    o.residuals = {{"wronskian", w}, {"wronskian_spread", cache.wronskian_spread()},
                   {"wronskian_check", ok ? "pass" : "fail"}};
    o.exit_code = ok ? kOk : kVerifyFailed;
    o.summary = std::string("Wronskian check: ") + (ok ? "pass" : "FAIL");
    return o;
}

Outcome cmd_vhat(const RunConfig& cfg) {
    const Grid2D g = grid_for(cfg);
    Outcome o;
    o.files.emplace_back("vhat.csv", to_string_with([&](std::ostream& os) {
        os << "x,r,vhat,vhat_x,vhat_r\n";
        for (int i = 0; i < g.nx; i += 10)
            for (int j = 0; j < g.nr; j += 10) {
                const double x = g.x(i), r = g.r(j);
                os << num(x) << ',' << num(r) << ','
                   << num(v_hat(cfg.model, cfg.cost, x, r, VhatWhich::value)) << ','
                   << num(v_hat(cfg.model, cfg.cost, x, r, VhatWhich::dx)) << ','
                   << num(v_hat(cfg.model, cfg.cost, x, r, VhatWhich::dr)) << '\n';
            }
    }));
    return o;
}

Outcome cmd_solve_fd(const RunConfig& cfg) {
    const Grid2D g = grid_for(cfg);
    const FdSolution fd = solve_vi(cfg.model, cfg.cost, g, fd_options(cfg));
    Outcome o;
    o.files.emplace_back("fd_solution.csv",
                         to_string_with([&](std::ostream& os) { write_fd_csv(fd, os); }));
    o.files.emplace_back("fd_boundaries_r.csv",
                         to_string_with([&](std::ostream& os) { write_boundaries_r_csv(fd, os); }));
    o.files.emplace_back("fd_boundaries_x.csv",
                         to_string_with([&](std::ostream& os) { write_boundaries_x_csv(fd, os); }));
    o.residuals = {{"vi_residual", fd.residual_norm}, {"iterations", fd.iterations},
                   {"nx", g.nx},  {"nr", g.nr}, {"r_lo", g.r_lo}, {"r_hi", g.r_hi}};
    o.summary = "FD solve: " + std::to_string(fd.iterations) + " iterations, residual " +
                num(fd.residual_norm);
    return o;
}

Outcome cmd_solve_fb(const RunConfig& cfg, const fs::path& dir, const std::string& init) {
    const ModelParams& p = cfg.model;
    FbStart start;
    if (init == "zeta") {
        const Grid2D g = grid_for(cfg);
        std::vector<double> r;
        for (int j = 1; j < g.nr - 1; ++j) r.push_back(g.r(j));
        start = start_from_zeta(p, cfg.cost, r, g.x_lo, g.x_hi, cfg.solver.growth_bound);
    } else if (init == "fd") {
        start = start_from_fd(p, cfg.cost, load_fd(cfg, dir), cfg.solver.growth_bound);
    } else {
        throw ConfigError("--init", "expected 'fd' or 'zeta', got '" + init + "'");
    }
    const BoundarySolution s = solve_system(p, cfg.cost, start, fb_options(cfg));
    double res = 0;
    for (std::size_t k = 0; k < s.r.size(); ++k)
        res = std::max({res, std::abs(s.res1[k]), std::abs(s.res2[k])});
    Outcome o;
    o.files.emplace_back("boundary.csv",
                         to_string_with([&](std::ostream& os) { write_boundary_csv(s, os); }));
    json excl = json::array();
    for (const auto& e : s.excluded) excl.push_back({{"r", e.r}, {"reason", e.reason}});
    o.residuals = {{"max_scaled_residual", res}, {"outer_passes", s.iterations},
                   {"nodes", s.r.size()},        {"init", init},
                   {"excluded", excl}};
    o.summary = "free boundary: " + std::to_string(s.r.size()) + " nodes, " +
                std::to_string(s.iterations) + " outer passes, residual " + num(res);
    return o;
}

Outcome cmd_dynkin(const RunConfig& cfg, const fs::path& dir) {
    const FdSolution fd = load_fd(cfg, dir);
    const Grid2D& g = fd.grid;
    const int j = std::clamp(static_cast<int>(std::lround((cfg.sim.r0 - g.r_lo) / g.hr())), 0,
                             g.nr - 1);
    std::vector<double> xs(g.nx), vx(g.nx);
    for (int i = 0; i < g.nx; ++i) {
        xs[i] = g.x(i);
        vx[i] = fd.v_x[fd.idx(i, j)];
    }
    const GameSlice gs = solve_game_slice(cfg.model, cfg.cost, xs, vx, g.r(j));
    double err = 0;
    for (int i = 0; i < g.nx; ++i) err = std::max(err, std::abs(gs.u[i] - fd.v_r[fd.idx(i, j)]));
    Outcome o;
    o.files.emplace_back("game_slice.csv",
                         to_string_with([&](std::ostream& os) { write_game_csv(gs, os); }));
    o.residuals = {{"r", g.r(j)}, {"iterations", gs.iterations}, {"max_abs_u_minus_v_r", err}};
    o.summary = "game slice at r = " + num(g.r(j)) + ": max |u - v_r| " + num(err);
    if (fs::exists(dir / "boundary.csv")) {
        const BoundarySolution bsol = load_boundary(dir);
        SaddleOptions so;
        so.dt = cfg.sim.dt;
        const SaddleEstimate e = simulate_saddle(cfg.model, cfg.cost, bsol, cfg.sim.x0, cfg.sim.r0,
                                                 cfg.sim.paths, cfg.sim.seed, so);
        o.files.emplace_back("saddle.json", saddle_json(e) + "\n");
        o.residuals["saddle_estimate"] = e.estimate;
        o.residuals["saddle_stderr"] = e.std_error;
        o.summary += "; saddle estimate " + num(e.estimate) + " +- " + num(e.std_error);
    }
    return o;
}

Outcome cmd_simulate(const RunConfig& cfg, const fs::path& dir) {
    const FdSolution fd = load_fd(cfg, dir);
    const ReflectionBoundary bnd = ReflectionBoundary::from_fd(fd);
    const SimulationResult res = simulate_reflected(cfg.model, cfg.cost, bnd, cfg.sim.x0,
                                                    cfg.sim.r0, cfg.sim.paths, cfg.sim.seed,
                                                    sim_options(cfg));
    Outcome o;
    o.files.emplace_back("simulation.json", simulation_json(res) + "\n");
    const BoundednessReport br =
        boundedness_check(cfg.model, cfg.cost, res, fd.grid.hr());
    o.files.emplace_back("boundedness.json", boundedness_json(br) + "\n");
    if (cfg.sim.record_paths > 0)
        o.files.emplace_back("paths.csv",
                             to_string_with([&](std::ostream& os) { write_paths_csv(res, os); }));
    o.residuals = {{"cost_mean", res.cost_mean},
                   {"cost_stderr", res.cost_stderr},
                   {"fd_value", interp_field(fd, fd.v, cfg.sim.x0, cfg.sim.r0)},
                   {"bias_bound", res.bias_bound}};
    o.summary = "reflected cost " + num(res.cost_mean) + " +- " + num(res.cost_stderr);
    return o;
}

Outcome cmd_verify(const RunConfig& cfg, const fs::path& dir) {
    SuiteInputs in;
    in.p = cfg.model;
    in.spec = cfg.cost;
    in.fd = load_fd(cfg, dir);
    in.bsol = load_boundary(dir);
    in.s.n_paths = cfg.sim.paths;
    in.s.seed = cfg.sim.seed;
    in.s.fd = fd_options(cfg);
    in.s.fb = fb_options(cfg);
    in.s.sim = sim_options(cfg);

    json report = json::array();
    std::ostringstream table, summary;
    table << "criterion,check,passed,value,limit\n";
    bool all = true;
    for (int k = 1; k <= kSuiteCriteria; ++k) {
        Checks c;
        try {
            c = run_criterion(k, in);
        } catch (const std::exception& e) {
            c.push_back({"criterion " + std::to_string(k), false, 0, 0, e.what()});
        }
        const bool ok = all_passed(c);
        all = all && ok;
        report.push_back({{"criterion", k}, {"passed", ok}, {"checks", json::parse(checks_json(c))}});
        summary << "criterion " << k << ": " << (ok ? "PASS" : "FAIL") << '\n';
        for (const CheckResult& r : c) {
            table << k << ',' << csv_field(r.name) << ',' << (r.passed ? "true" : "false") << ','
                  << num(r.value) << ',' << num(r.limit) << '\n';
            summary << "    " << (r.passed ? "ok   " : "FAIL ") << r.name << ": " << num(r.value)
                    << " (limit " << num(r.limit) << ")\n";
        }
    }
    Outcome o;
    o.files.emplace_back("verify_report.json",
                         json{{"all_passed", all}, {"criteria", report}}.dump(2) + "\n");
    o.files.emplace_back("verify_table.csv", table.str());
    o.residuals = {{"all_passed", all}};
    o.exit_code = all ? kOk : kVerifyFailed;
    o.summary = summary.str();
    return o;
}

void write_manifest(const fs::path& dir, const std::string& cmd, const json& body) {
    write_atomic(dir / ("manifest_" + cmd + ".json"), body.dump(2) + "\n");
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& [section, body] : tree) {
        const auto it = kSchema.find(section);
        if (it == kSchema.end()) throw ConfigError(section, "unknown section");
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "key outside a section");
        for (const auto& [key, _] : body)
            if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
    }
    const Reader rd(tree);
    RunConfig c;

    c.model.theta = rd.real("model.theta");
    c.model.mu = rd.real("model.mu");
    c.model.b = rd.real("model.b");
    c.model.eta = rd.real("model.eta");
    c.model.rho = rd.real("model.rho");
    c.model.cost_k = rd.real("model.K");

    const std::string type = rd.text("cost.type", "quadratic");
    const std::set<std::string>* allowed = nullptr;
    if (type == "quadratic") {
        QuadraticCost q;
        q.alpha = rd.real("cost.alpha", q.alpha);
        q.x_tilde = rd.real("cost.x_tilde", q.x_tilde);
        q.beta = rd.real("cost.beta", q.beta);
        q.r_tilde = rd.real("cost.r_tilde", q.r_tilde);
        q.gamma = rd.real("cost.gamma", q.gamma);
        c.cost = q;
        allowed = &kQuadraticKeys;
    } else if (type == "asymmetric_power") {
        AsymmetricPowerCost a;
        a.alpha = rd.real("cost.alpha", a.alpha);
        a.p = rd.real("cost.p", a.p);
        a.beta = rd.real("cost.beta", a.beta);
        a.q = rd.real("cost.q", a.q);
        a.kappa = rd.real("cost.kappa", a.kappa);
        a.r_tilde = rd.real("cost.r_tilde", a.r_tilde);
        a.x_cap = rd.real("cost.x_cap", a.x_cap);
        c.cost = a;
        allowed = &kPowerKeys;
    } else {
        throw ConfigError("cost.type", "expected 'quadratic' or 'asymmetric_power', got '" + type + "'");
    }
    if (auto s = tree.get_child_optional("cost"))
        for (const auto& [key, _] : *s)
            if (!allowed->count(key))
                throw ConfigError("cost." + key, "not a parameter of the " + type + " cost");

    GridConfig& g = c.grids;
    g.x_lo = rd.real("grids.x_lo", g.x_lo);
    g.x_hi = rd.real("grids.x_hi", g.x_hi);
    g.nx = rd.integer("grids.nx", g.nx);
    g.nr = rd.integer("grids.nr", g.nr);
    const bool has_lo = rd.raw("grids.r_lo").has_value(), has_hi = rd.raw("grids.r_hi").has_value();
    if (has_lo != has_hi)
        throw ConfigError(has_lo ? "grids.r_hi" : "grids.r_lo",
                          "r_lo and r_hi must be given together (or both omitted)");
    if (has_lo) {
        g.r_auto = false;
        g.r_lo = rd.real("grids.r_lo");
        g.r_hi = rd.real("grids.r_hi");
    }

    SolverConfig& s = c.solver;
    s.tol = rd.real("solver.tol", s.tol);
    s.max_iter = rd.integer("solver.max_iter", s.max_iter);
    s.method = rd.text("solver.method", s.method);
    s.omega = rd.real("solver.omega", s.omega);
    s.max_sweeps = rd.integer("solver.max_sweeps", s.max_sweeps);
    s.fb_tol = rd.real("solver.fb_tol", s.fb_tol);
    s.fb_max_outer = rd.integer("solver.fb_max_outer", s.fb_max_outer);
    s.fb_omega = rd.real("solver.fb_omega", s.fb_omega);
    s.growth_bound = rd.real("solver.growth_bound", s.growth_bound);

    SimConfig& m = c.sim;
    m.seed = rd.integer("sim.seed", m.seed);
    m.paths = rd.integer("sim.paths", m.paths);
    m.dt = rd.real("sim.dt", m.dt);
    m.cutoff = rd.real("sim.cutoff", m.cutoff);
    m.x0 = rd.real("sim.x0", m.x0);
    m.r0 = rd.real("sim.r0", m.r0);
    m.record_paths = rd.integer("sim.record_paths", m.record_paths);

    c.output_dir = rd.text("output.dir", c.output_dir);

    // invariants
    try {
        c.model.validate();
        validate_cost(c.cost);
    } catch (const DomainError& e) {
        rethrow_as_config(e);
    }
    if (!std::isfinite(g.x_lo) || !std::isfinite(g.x_hi) || !(g.x_hi > g.x_lo))
        throw ConfigError("grids.x_hi", "x range is empty");
    if (g.nx < 16) throw ConfigError("grids.nx", "must be at least 16");
    if (g.nr < 16) throw ConfigError("grids.nr", "must be at least 16");
    if (!g.r_auto && (!std::isfinite(g.r_lo) || !std::isfinite(g.r_hi) || !(g.r_hi > g.r_lo)))
        throw ConfigError("grids.r_hi", "r range is empty");
    check_positive(s.tol, "solver.tol");
    check_positive(s.fb_tol, "solver.fb_tol");
    check_positive(s.omega, "solver.omega");
    check_positive(s.fb_omega, "solver.fb_omega");
    check_positive(s.growth_bound, "solver.growth_bound");
    if (s.max_iter < 1) throw ConfigError("solver.max_iter", "must be at least 1");
    if (s.max_sweeps < 1) throw ConfigError("solver.max_sweeps", "must be at least 1");
    if (s.fb_max_outer < 1) throw ConfigError("solver.fb_max_outer", "must be at least 1");
    if (s.method != "howard" && s.method != "psor")
        throw ConfigError("solver.method", "expected 'howard' or 'psor'");
    if (!(s.omega < 2)) throw ConfigError("solver.omega", "must be below 2");
    if (!(s.fb_omega <= 1)) throw ConfigError("solver.fb_omega", "must be at most 1");
    if (m.paths < 2) throw ConfigError("sim.paths", "must be at least 2");
    if (!(m.dt >= 0) || !std::isfinite(m.dt)) throw ConfigError("sim.dt", "must be >= 0 (0: automatic)");
    if (!(m.cutoff > 0 && m.cutoff < 1)) throw ConfigError("sim.cutoff", "must lie in (0, 1)");
    if (!std::isfinite(m.x0)) throw ConfigError("sim.x0", "must be finite");
    if (!std::isfinite(m.r0)) throw ConfigError("sim.r0", "must be finite");
    if (m.record_paths < 0 || m.record_paths > m.paths)
        throw ConfigError("sim.record_paths", "must lie in [0, sim.paths]");
    if (c.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
    return c;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[model]\ntheta = " << num(c.model.theta) << "\nmu = " << num(c.model.mu)
       << "\nb = " << num(c.model.b) << "\neta = " << num(c.model.eta)
       << "\nrho = " << num(c.model.rho) << "\nK = " << num(c.model.cost_k) << "\n\n[cost]\n";
    if (auto* q = std::get_if<QuadraticCost>(&c.cost)) {
        os << "type = quadratic\nalpha = " << num(q->alpha) << "\nx_tilde = " << num(q->x_tilde)
           << "\nbeta = " << num(q->beta) << "\nr_tilde = " << num(q->r_tilde)
           << "\ngamma = " << num(q->gamma) << '\n';
    } else if (auto* a = std::get_if<AsymmetricPowerCost>(&c.cost)) {
        os << "type = asymmetric_power\nalpha = " << num(a->alpha) << "\np = " << num(a->p)
           << "\nbeta = " << num(a->beta) << "\nq = " << num(a->q)
           << "\nkappa = " << num(a->kappa) << "\nr_tilde = " << num(a->r_tilde)
           << "\nx_cap = " << num(a->x_cap) << '\n';
    } else {
        throw DomainError("serialize_config: tabulated costs have no text form");
    }
    const GridConfig& g = c.grids;
    os << "\n[grids]\nx_lo = " << num(g.x_lo) << "\nx_hi = " << num(g.x_hi) << "\nnx = " << g.nx
       << "\nnr = " << g.nr << '\n';
    if (!g.r_auto) os << "r_lo = " << num(g.r_lo) << "\nr_hi = " << num(g.r_hi) << '\n';
    const SolverConfig& s = c.solver;
    os << "\n[solver]\ntol = " << num(s.tol) << "\nmax_iter = " << s.max_iter
       << "\nmethod = " << s.method << "\nomega = " << num(s.omega)
       << "\nmax_sweeps = " << s.max_sweeps << "\nfb_tol = " << num(s.fb_tol)
       << "\nfb_max_outer = " << s.fb_max_outer << "\nfb_omega = " << num(s.fb_omega)
       << "\ngrowth_bound = " << num(s.growth_bound) << '\n';
    const SimConfig& m = c.sim;
    os << "\n[sim]\nseed = " << m.seed << "\npaths = " << m.paths << "\ndt = " << num(m.dt)
       << "\ncutoff = " << num(m.cutoff) << "\nx0 = " << num(m.x0) << "\nr0 = " << num(m.r0)
       << "\nrecord_paths = " << m.record_paths << '\n';
    os << "\n[output]\ndir = " << c.output_dir << '\n';
    return os.str();
}

Grid2D grid_for(const RunConfig& c) {
    const GridConfig& g = c.grids;
    if (g.r_auto) return auto_box(c.model, c.cost, g.x_lo, g.x_hi, g.nx, g.nr);
    return Grid2D{g.x_lo, g.x_hi, g.nx, g.r_lo, g.r_hi, g.nr};
}

FdOptions fd_options(const RunConfig& c) {
    FdOptions o;
    o.tol = c.solver.tol;
    o.max_iter = c.solver.max_iter;
    o.method = c.solver.method == "psor" ? FdMethod::psor : FdMethod::howard;
    o.omega = c.solver.omega;
    o.max_sweeps = c.solver.max_sweeps;
    return o;
}

FbOptions fb_options(const RunConfig& c) {
    FbOptions o;
    o.tol = c.solver.fb_tol;
    o.max_outer = c.solver.fb_max_outer;
    o.omega = c.solver.fb_omega;
    o.growth_bound = c.solver.growth_bound;
    return o;
}

SimOptions sim_options(const RunConfig& c) {
    SimOptions o;
    o.dt = c.sim.dt;
    o.cutoff = c.sim.cutoff;
    o.record_paths = c.sim.record_paths;
    return o;
}

fs::path resolve_output_dir(const std::string& config_dir, const Overrides& ov) {
    if (ov.output_dir) return *ov.output_dir;
    if (const char* env = std::getenv("OUSC_OUTPUT_DIR"); env && *env) return env;
    return config_dir;
}

ExitReport run_command(const std::string& cmd, const RunConfig& cfg_in, const Overrides& ov) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = cfg_in;
    if (ov.seed) cfg.sim.seed = *ov.seed;
    if (ov.paths) cfg.sim.paths = *ov.paths;
    if (ov.tol) cfg.solver.tol = *ov.tol;
    const fs::path dir = resolve_output_dir(cfg.output_dir, ov);

    ExitReport rep;
    json manifest = {{"command", cmd},
                     {"status", "ok"},
                     {"exit_code", 0},
                     {"error", nullptr},
                     {"config_sha256", config_hash(cfg)},
                     {"versions", versions()},
                     {"seed", cfg.sim.seed},
                     {"n_paths", cfg.sim.paths},
                     {"residuals", json::object()},
                     {"outputs", json::array()}};
    auto fail = [&](int code, const std::string& module, const std::string& what) {
        rep.exit_code = code;
        rep.error = module.empty() ? what : module + ": " + what;
        manifest["status"] = "error";
        manifest["error"] = rep.error;
    };
    static const std::map<std::string, std::string> module_of = {
        {"characteristics", "ou_special"}, {"vhat", "model"},       {"solve-fd", "hjb_fd"},
        {"solve-fb", "free_boundary"},     {"dynkin", "dynkin"},    {"simulate", "reflect_sim"},
        {"verify", "verify"}};
    const auto mod = module_of.find(cmd);
    try {
        if (mod == module_of.end()) throw ConfigError("command", "unknown command '" + cmd + "'");
        if (ov.paths && *ov.paths < 2) throw ConfigError("--paths", "must be at least 2");
        if (ov.tol && !(*ov.tol > 0)) throw ConfigError("--tol", "must be positive");
        Outcome o;
        if (cmd == "characteristics") o = cmd_characteristics(cfg);
        else if (cmd == "vhat") o = cmd_vhat(cfg);
        else if (cmd == "solve-fd") o = cmd_solve_fd(cfg);
        else if (cmd == "solve-fb") o = cmd_solve_fb(cfg, dir, ov.init);
        else if (cmd == "dynkin") o = cmd_dynkin(cfg, dir);
        else if (cmd == "simulate") o = cmd_simulate(cfg, dir);
        else o = cmd_verify(cfg, dir);
        for (const auto& [name, content] : o.files) {
            write_atomic(dir / name, content);
            rep.outputs.push_back(name);
            manifest["outputs"].push_back(name);
        }
        manifest["residuals"] = o.residuals;
        rep.summary = o.summary;
        if (o.exit_code != kOk) {
            rep.exit_code = o.exit_code;
            manifest["status"] = "failed-checks";
        }
    } catch (const ConfigError& e) {
        fail(kConfigError, "", e.what());
    } catch (const PrerequisiteError& e) {
        fail(kConfigError, "", e.what());
    } catch (const IterationError& e) {
        fail(kSolverError, mod->second, e.what());
        manifest["residuals"] = {{"last_residual", e.residual()},
                                 {"history_length", e.history().size()}};
    } catch (const std::exception& e) {
        fail(kSolverError, mod == module_of.end() ? "" : mod->second, e.what());
    }
    manifest["exit_code"] = rep.exit_code;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, cmd, manifest);
    return rep;
}

ExitReport run_from_file(const std::string& cmd, const fs::path& config, const Overrides& ov) {
    RunConfig cfg;
    std::string error;
    try {
        cfg = parse_config(read_file(config));
    } catch (const std::exception& e) {
        error = e.what();
    }
    if (error.empty()) return run_command(cmd, cfg, ov);

    ExitReport rep;
    rep.exit_code = kConfigError;
    rep.error = error;
    const json manifest = {{"command", cmd},       {"status", "error"},
                           {"exit_code", kConfigError}, {"error", error},
                           {"config_sha256", nullptr}, {"versions", versions()},
                           {"outputs", json::array()}, {"wall_time_s", 0.0}};
    write_manifest(resolve_output_dir(RunConfig{}.output_dir, ov), cmd, manifest);
    return rep;
}

}  // namespace ousc
