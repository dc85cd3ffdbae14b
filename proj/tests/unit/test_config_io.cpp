#include "doctest.h"
#include "support.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "eitmem/config.hpp"
#include "eitmem/output.hpp"
#include "eitmem/runs.hpp"

using namespace eitmem;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = EITMEM_CONFIG_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("eitmem_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

config::RunConfig reference() { return config::load_config(kConfigs + "/reference_storage.toml"); }

// Small, fast variant of the reference run.
config::RunConfig tiny() {
    auto c = reference();
    c.grid.nz = 10;
    c.grid.dt = 0.4;
    c.grid.n_traj = 6;
    c.grid.threads = 1;
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EITMEM_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("reference configuration loads and passes the validity checks") {
    const auto c = reference();
    CHECK(c.engine == config::Engine::Sde);
    CHECK(c.physics.optical_depth() == doctest::Approx(121.0));
    CHECK(c.physics.gamma0 == doctest::Approx(250.0 / 38138934.81458009).epsilon(1e-12));
    CHECK(c.pulse.duration == 50.0);
    CHECK(c.storage.mode == storage::Mode::Kernel);
    CHECK(config::validity(c).all_passed());
}

TEST_CASE("shipped configurations load") {
    for (const char* f : {"delay_exchange.toml", "delay_mixed.toml", "delay_dephasing.toml"}) {
        const auto c = config::load_config(kConfigs + "/" + f);
        CHECK(c.readout.planes.size() == 5);
        CHECK(c.grid.check().empty());
    }
}

TEST_CASE("empty configuration is rejected") {
    CHECK_THROWS_AS(config::parse_config(""), config::ConfigError);
    CHECK_THROWS_AS(config::parse_config("  \n\t\n"), config::ConfigError);
}

TEST_CASE("unknown keys are reported with their position") {
    const std::string text = "engine = \"benchmark\"\n[benchmark]\neta = 0.5\nbogus = 1\n";
    try {
        config::parse_config(text);
        FAIL("expected ConfigError");
    } catch (const config::ConfigError& e) {
        CHECK(e.line == 4);
        CHECK(e.column == 1);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(config::parse_config("engine = \"warp\"\n"), config::ConfigError);
    CHECK_THROWS_AS(config::parse_config("engine = \"benchmark\"\n[benchmark]\neta = \"x\"\n"),
                    config::ConfigError);
}

TEST_CASE("a pulse as wide as the absorption window fails validity") {
    auto c = reference();
    const double gp = derive(c.physics).Gamma_p;
    c.pulse.duration = 1.0 / gp;
    REQUIRE(c.pulse.bandwidth() == doctest::Approx(gp));
    const auto v = config::validity(c);
    const auto* it = v.find("pulse_within_window");
    REQUIRE(it != nullptr);
    CHECK(it->margin == doctest::Approx(1.0));
    CHECK_FALSE(it->passed);
    CHECK_FALSE(v.all_passed());
}

TEST_CASE("echo round trip reproduces the effective configuration") {
    for (const char* f : {"reference_storage.toml", "delay_exchange.toml", "delay_mixed.toml", "delay_dephasing.toml"}) {
        const auto c = config::load_config(kConfigs + "/" + f);
        const auto back = config::parse_config(config::to_toml(c));
        CHECK(back.same_effective(c));
        CHECK(config::to_toml(back) == config::to_toml(c));
    }
    config::RunConfig b;
    b.engine = config::Engine::Benchmark;
    b.benchmark.eta = 0.37;
    CHECK(config::parse_config(config::to_toml(b)).same_effective(b));
}

TEST_CASE("effective hash changes exactly when an effective parameter changes") {
    const auto c = reference();
    const auto h = io::git_blob_sha1(config::to_toml(c));
    auto same = c;
    same.source_text += "\n# comment\n";
    CHECK(io::git_blob_sha1(config::to_toml(same)) == h);
    testing::Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        auto d = c;
        switch (i % 5) {
            case 0: d.grid.seed += 1 + i; break;
            case 1: d.pulse.duration *= 1 + rng.uniform(1e-9, 0.1); break;
            case 2: d.physics.gammac *= 1 + rng.uniform(1e-9, 0.1); break;
            case 3: d.readout.window_start += rng.uniform(0.1, 1); break;
            case 4: d.storage.hold += rng.uniform(0.1, 1); break;
        }
        CHECK_FALSE(d.same_effective(c));
        CHECK(io::git_blob_sha1(config::to_toml(d)) != h);
    }
}

TEST_CASE("git blob hash") {
    CHECK(io::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(io::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("numbers print in shortest round-trip form") {
    testing::Rng rng(43);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.log_uniform(1e-300, 1e300) * (i % 2 ? -1 : 1);
        const auto s = io::format_number(v);
        double back = 0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(2.0) == "2");
}

TEST_CASE("output target resolution") {
    auto t = io::Target::from("out/run.csv", "spectrum.csv");
    CHECK(t.dir == fs::path("out"));
    CHECK(t.main_csv == "run.csv");
    t = io::Target::from("out/run", "spectrum.csv");
    CHECK(t.dir == fs::path("out/run"));
    CHECK(t.main_csv == "spectrum.csv");
}

TEST_CASE("simulation output has the documented header and is reproducible") {
    const auto c = tiny();
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    io::RunInfo info{"simulate", "test", 0.0, {}};
    io::emit_simulation(io::Target::from(a, "spectrum.csv"), c, runs::simulate(c, true), true, info);
    auto c2 = c;
    c2.grid.threads = 3;
    io::emit_simulation(io::Target::from(b, "spectrum.csv"), c2, runs::simulate(c2, true), true, info);
    const auto s = slurp(a / "spectrum.csv");
    CHECK(s.rfind("omega,S_plus,S_minus,V_plus,V_minus,se_plus,se_minus\n", 0) == 0);
    for (const char* f : {"spectrum.csv", "spectrum_plane0.csv", "input_spectrum.csv"})
        CHECK(slurp(a / f) == slurp(b / f));
    CHECK(fs::exists(a / "run.json"));
    const auto m = slurp(a / "run.json");
    CHECK(m.find(io::git_blob_sha1(c.source_text)) != std::string::npos);
}

TEST_CASE("tv-map writes the grid and the boundary") {
    config::RunConfig c;
    c.engine = config::Engine::Benchmark;
    c.output.dat_mirror = true;
    c.benchmark.grid.nx = 11;
    c.benchmark.grid.ny = 11;
    const auto m = qbench::regime_map(qbench::Plane::LossNoise, c.benchmark.grid);
    const auto d = scratch("tv");
    io::emit_tv_map(io::Target::from(d / "map.csv", "tv_map.csv"), c, m, {"tv-map", "test", 0.0, {}});
    const auto grid = slurp(d / "map.csv");
    CHECK(grid.rfind("x,y,T,V,eta,V_noise,region\n", 0) == 0);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 1 + 121);
    CHECK(slurp(d / "map_boundary.csv").rfind("x,y,from,to\n", 0) == 0);
    CHECK(fs::exists(d / "map.dat"));
    CHECK(fs::exists(d / "benchmark.json"));
    CHECK(fs::exists(d / "run.json"));
}

TEST_CASE("command line exit codes") {
    const auto d = scratch("cli");
    const std::string ref = kConfigs + "/reference_storage.toml";
    CHECK(run_cli("validate --config " + ref) == 0);
    CHECK(run_cli("--no-such-flag") == 2);
    {
        std::ofstream(d / "bad.toml") << "engine = \"sde\"\nnope = 1\n";
    }
    CHECK(run_cli("validate --config " + (d / "bad.toml").string()) == 2);
    CHECK(run_cli("--strict validate --config " + kConfigs + "/delay_exchange.toml") == 3);
    CHECK(run_cli("benchmark fidelity --alpha 1 --eta 1 --noise 2") == 0);
    CHECK(run_cli("--out " + (d / "map").string() + " tv-map --plane loss-noise") == 0);
    CHECK(fs::exists(d / "map" / "tv_map.csv"));
    CHECK(run_cli("--config " + ref + " --out " + (d / "an.csv").string() + " analytic") == 0);
    CHECK(fs::exists(d / "an.csv"));
}
