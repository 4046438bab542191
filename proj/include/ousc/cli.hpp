#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ousc/hjb_fd.hpp"
#include "ousc/free_boundary.hpp"
#include "ousc/reflect_sim.hpp"

namespace ousc {

// Bad config: `key` is the offending "section.name" (or "config" for syntax).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// A command needs the artifact of an earlier command.
class PrerequisiteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    double x_lo = -3.0, x_hi = 3.0;
    int nx = 201, nr = 201;
    bool r_auto = true;  // size the r-range from the zeta curves
    double r_lo = 0, r_hi = 0;
    bool operator==(const GridConfig&) const = default;
};

struct SolverConfig {
    double tol = 1e-8;
    int max_iter = 200;
    std::string method = "howard";  // or "psor"
    double omega = 1.2;
    long max_sweeps = 400000;
    double fb_tol = 1e-7;
    int fb_max_outer = 200;
    double fb_omega = 0.5;
    double growth_bound = 5.0;
    bool operator==(const SolverConfig&) const = default;
};

struct SimConfig {
    std::uint64_t seed = 20240601;
    std::int64_t paths = 10000;
    double dt = 0;  // 0: 0.01 / max(theta, rho)
    double cutoff = 1e-8;
    double x0 = 0, r0 = 0;
    int record_paths = 0;
    bool operator==(const SimConfig&) const = default;
};

struct RunConfig {
    ModelParams model;
    CostSpec cost = QuadraticCost{};
    GridConfig grids;
    SolverConfig solver;
    SimConfig sim;
    std::string output_dir = "out";
    bool operator==(const RunConfig&) const = default;
};

// INI text with sections [model], [cost], [grids], [solver], [sim], [output].
// [model] theta, mu, b, eta, rho, K are required; everything else has a
// default.  Unknown sections or keys are rejected.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

Grid2D grid_for(const RunConfig& cfg);
FdOptions fd_options(const RunConfig& cfg);
FbOptions fb_options(const RunConfig& cfg);
SimOptions sim_options(const RunConfig& cfg);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<double> tol;
    std::optional<std::string> output_dir;
    std::string init = "fd";  // solve-fb start: "fd" or "zeta"
};

// --output, then $OUSC_OUTPUT_DIR, then [output] dir.
std::filesystem::path resolve_output_dir(const std::string& config_dir, const Overrides& ov);

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kVerifyFailed = 4 };

struct ExitReport {
    int exit_code = kOk;
    std::string error;
    std::vector<std::string> outputs;  // file names inside the output directory
    std::string summary;               // human-readable table for stdout
};

inline const std::vector<std::string> kCommands = {
    "characteristics", "vhat", "solve-fd", "solve-fb", "dynkin", "simulate", "verify"};

// Runs one command and writes its artifacts plus manifest_<cmd>.json; the
// manifest is written whatever the outcome.
ExitReport run_command(const std::string& cmd, const RunConfig& cfg, const Overrides& ov = {});
// Same, reading the config first; config errors still leave a manifest.
ExitReport run_from_file(const std::string& cmd, const std::filesystem::path& config,
                         const Overrides& ov = {});

std::string sha256_hex(const std::string& data);

}  // namespace ousc
