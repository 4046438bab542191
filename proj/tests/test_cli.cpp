#include <cstdlib>
#include <filesystem>

#include <unistd.h>

#include "doctest.h"
#include "ousc/cli.hpp"
#include "ousc/io.hpp"

using namespace ousc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal =
    "[model]\ntheta = 1\nmu = 0\nb = 0.5\neta = 0.5\nrho = 0.5\nK = 0.1\n";

std::string config_error_key(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("ousc_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config takes the defaults") {
    const RunConfig c = parse_config(kMinimal);
    CHECK(c.model == ModelParams{});
    CHECK(std::get<QuadraticCost>(c.cost) == QuadraticCost{});
    CHECK(c.grids == GridConfig{});
    CHECK(c.solver == SolverConfig{});
    CHECK(c.sim == SimConfig{});
    CHECK(c.output_dir == "out");
}

TEST_CASE("serialized config parses back to itself") {
    RunConfig c = parse_config(std::string(kMinimal) +
                               "[cost]\ntype = asymmetric_power\nq = 3\nkappa = 1\nx_cap = 1\n"
                               "[grids]\nnx = 81\nr_lo = -0.4\nr_hi = 0.3\n"
                               "[solver]\nmethod = psor\ntol = 1e-9\n[sim]\nseed = 12345678901\n");
    CHECK(std::get<AsymmetricPowerCost>(c.cost).q == 3.0);
    CHECK_FALSE(c.grids.r_auto);
    CHECK(c.sim.seed == 12345678901ULL);
    CHECK(parse_config(serialize_config(c)) == c);
    c.model.theta = 0.1 + 0.2;  // needs all 17 digits
    CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("invalid configs name the offending key") {
    std::string t = kMinimal;
    CHECK(config_error_key(t.replace(t.find("eta = 0.5"), 9, "eta = -1")) == "model.eta");
    CHECK(config_error_key(std::string(kMinimal) + "foo = 1\n") == "model.foo");
    CHECK(config_error_key("[model]\ntheta = 1\n") == "model.mu");
    CHECK(config_error_key(std::string(kMinimal) + "[cost]\ntype = quadratic\nq = 3\n") == "cost.q");
    CHECK(config_error_key(std::string(kMinimal) + "[grids]\nnx = 1.5\n") == "grids.nx");
    CHECK(config_error_key(std::string(kMinimal) + "[grids]\nr_lo = -1\n") != "");
    CHECK(config_error_key(std::string(kMinimal) + "[extra]\na = 1\n") != "");
}

TEST_CASE("output directory precedence") {
    Overrides ov;
    ::unsetenv("OUSC_OUTPUT_DIR");
    CHECK(resolve_output_dir("cfg", ov) == "cfg");
    ::setenv("OUSC_OUTPUT_DIR", "env", 1);
    CHECK(resolve_output_dir("cfg", ov) == "env");
    ov.output_dir = "flag";
    CHECK(resolve_output_dir("cfg", ov) == "flag");
    ::unsetenv("OUSC_OUTPUT_DIR");
}

TEST_CASE("characteristics writes its table and manifest") {
    TempDir d("chars");
    Overrides ov;
    ov.output_dir = d.path.string();
    const ExitReport rep = run_command("characteristics", parse_config(kMinimal), ov);
    CHECK(rep.exit_code == kOk);
    const std::string csv = read_file(d.path / "characteristics.csv");
    CHECK(csv.rfind("x,s,psi,phi,", 0) == 0);
    const std::string man = read_file(d.path / "manifest_characteristics.json");
    CHECK(man.find("\"status\": \"ok\"") != std::string::npos);
    CHECK(man.find(sha256_hex(serialize_config([] {
              RunConfig c = parse_config(kMinimal);
              c.output_dir.clear();
              return c;
          }()))) != std::string::npos);
}

TEST_CASE("missing prerequisite leaves only the manifest") {
    TempDir d("prereq");
    Overrides ov;
    ov.output_dir = d.path.string();
    const ExitReport rep = run_command("solve-fb", parse_config(kMinimal), ov);
    CHECK(rep.exit_code == kConfigError);
    CHECK(rep.error.find("fd_solution.csv") != std::string::npos);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(d.path)) files.push_back(e.path().filename());
    CHECK(files == std::vector<std::string>{"manifest_solve-fb.json"});
}

TEST_CASE("config errors from a file still write a manifest") {
    TempDir d("badcfg");
    write_atomic(d.path / "bad.ini", "[model]\ntheta = x\n");
    Overrides ov;
    ov.output_dir = (d.path / "out").string();
    const ExitReport rep = run_from_file("vhat", d.path / "bad.ini", ov);
    CHECK(rep.exit_code == kConfigError);
    CHECK(fs::exists(d.path / "out" / "manifest_vhat.json"));
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // TEST_SUITE
