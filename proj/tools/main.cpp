#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eitmem/config.hpp"
#include "eitmem/output.hpp"
#include "eitmem/qbench.hpp"
#include "eitmem/runs.hpp"

namespace {

using namespace eitmem;

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kValidity = 3, kDivergence = 4 };

struct Globals {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool strict = false;
};

// Thrown to leave with a specific exit code after a message was printed.
struct ExitWith {
    int code;
};

config::RunConfig load(const Globals& g, config::Engine engine, bool required) {
    config::RunConfig c;
    if (!g.config_path.empty()) {
        c = config::load_config(g.config_path);
    } else if (required) {
        throw config::ConfigError("--config is required for this command");
    }
    c.engine = engine;
    if (g.seed) c.grid.seed = *g.seed;
    if (g.threads) c.grid.threads = *g.threads;
    return c;
}

// Prints validity warnings; under --strict any failed check ends the run.
std::vector<std::string> check_validity(const Globals& g, const config::RunConfig& c) {
    std::vector<std::string> warnings;
    if (!(c.physics.atom_number > 0.0)) return warnings;
    const auto v = config::validity(c);
    bool failed = false;
    for (const auto& it : v.items) {
        if (it.passed) continue;
        const std::string w = std::string(it.advisory ? "advisory: " : "validity: ") + it.name +
                              " margin " + io::format_number(it.margin) + " below threshold";
        std::cerr << "warning: " << w << "\n";
        warnings.push_back(w);
        if (!it.advisory) failed = true;
    }
    if (failed && g.strict) {
        std::cerr << "error: physics validity checks failed under --strict\n";
        throw ExitWith{kValidity};
    }
    return warnings;
}

io::RunInfo info_for(const std::string& command, std::vector<std::string> warnings,
                     std::chrono::steady_clock::time_point start) {
    io::RunInfo info;
    info.command = command;
    info.tool_version = EITMEM_VERSION;
    info.warnings = std::move(warnings);
    info.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return info;
}

std::string out_or(const Globals& g, const std::string& fallback) {
    return g.out.empty() ? fallback : g.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EIT quantum memory simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "TOML configuration file");
    app.add_option("--out", g.out, "Output directory, or CSV path for table commands");
    app.add_option("--seed", g.seed, "Master seed override");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_flag("--strict", g.strict, "Treat physics validity failures as fatal");

    bool signal_off = false;
    std::optional<long> traj;
    auto* sim = app.add_subcommand("simulate", "Positive-P Monte-Carlo run");
    sim->add_flag("--signal-off", signal_off, "Vacuum input, for the noise floor");
    sim->add_option("--traj", traj, "Trajectory count override");

    std::optional<std::string> sweep;
    auto* ana = app.add_subcommand("analytic", "Linearised spectra over a sweep");
    ana->add_option("--sweep", sweep, "omega|z|gamma0|gammac")
        ->check(CLI::IsMember({"omega", "z", "gamma0", "gammac"}));

    std::optional<std::string> mode;
    std::optional<double> hold;
    auto* sto = app.add_subcommand("storage", "Write, hold and read a pulse");
    sto->add_option("--mode", mode, "ideal|kernel|downsampling")
        ->check(CLI::IsMember({"ideal", "kernel", "downsampling"}));
    sto->add_option("--hold", hold, "Hold time in 1/gamma");

    std::optional<double> eta, noise, alpha;
    std::optional<std::string> plane;
    auto* ben = app.add_subcommand("benchmark", "Fidelity and TV figures of merit");
    ben->add_option("--eta", eta, "Transmission");
    ben->add_option("--noise", noise, "Added noise V_noise");
    ben->add_option("--alpha", alpha, "Coherent amplitude");
    auto* ben_map = ben->add_subcommand("tv-map", "Region map of a channel plane");
    ben_map->add_option("--plane", plane, "loss-noise|gain-loss");
    auto* ben_fid = ben->add_subcommand("fidelity", "Fidelity of a coherent state");
    ben_fid->add_option("--alpha", alpha, "Coherent amplitude");
    ben_fid->add_option("--eta", eta, "Transmission");
    ben_fid->add_option("--noise", noise, "Added noise V_noise");

    auto* map = app.add_subcommand("tv-map", "Region map of a channel plane");
    map->add_option("--plane", plane, "loss-noise|gain-loss");

    auto* val = app.add_subcommand("validate", "Physics validity report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (sim->parsed()) {
            auto c = load(g, config::Engine::Sde, true);
            if (traj) c.grid.n_traj = *traj;
            if (auto e = c.grid.check(); !e.empty()) throw config::ConfigError("grid: " + e);
            auto w = check_validity(g, c);
            const auto r = runs::simulate(c, !signal_off);
            io::emit_simulation(io::Target::from(out_or(g, "run"), "spectrum.csv"), c, r, !signal_off,
                                info_for("simulate", w, start));
            std::cout << "trajectories used " << r.traj_used << ", diverged " << r.diverged_count << "\n";
        } else if (ana->parsed()) {
            auto c = load(g, config::Engine::Analytic, true);
            if (sweep) c.analytic.sweep = *sweep;
            auto w = check_validity(g, c);
            const auto rows = runs::analytic_sweep(c);
            io::emit_analytic(io::Target::from(out_or(g, "analytic"), "analytic.csv"), c, rows,
                              info_for("analytic", w, start));
        } else if (sto->parsed()) {
            auto c = load(g, config::Engine::Storage, true);
            if (mode) c.storage.mode = storage::parse_mode(*mode);
            if (hold) c.storage.hold = *hold;
            auto w = check_validity(g, c);
            const auto p = runs::storage_run(c);
            if (!p.written.warning.empty()) w.push_back(p.written.warning);
            if (!p.output.warning.empty()) w.push_back(p.output.warning);
            io::emit_storage(io::Target::from(out_or(g, "storage"), "storage.csv"), c, p,
                             info_for("storage", w, start));
            std::cout << "amplitude factor " << std::abs(p.report.amplitude_factor) << "\n";
        } else if (ben->parsed() || map->parsed()) {
            auto c = load(g, config::Engine::Benchmark, false);
            if (ben_map->parsed() || map->parsed()) {
                if (plane) c.benchmark.plane = *plane;
                const auto m = qbench::regime_map(qbench::parse_plane(c.benchmark.plane), c.benchmark.grid);
                io::emit_tv_map(io::Target::from(out_or(g, "tv_map"), "tv_map.csv"), c, m,
                                info_for("tv-map", {}, start));
                std::cout << "cells " << m.cells.size() << ", boundary points " << m.boundary.size() << "\n";
            } else {
                if (eta) c.benchmark.eta = *eta;
                if (noise) c.benchmark.v_noise = *noise;
                if (alpha) c.benchmark.alpha = *alpha;
                const auto b = runs::benchmark_point(c.benchmark.alpha, c.benchmark.eta, c.benchmark.v_noise);
                std::cout << "F " << io::format_number(b.fidelity) << "\nT " << io::format_number(b.tv.T)
                          << "\nV " << io::format_number(b.tv.V) << "\nregion " << qbench::to_string(b.region)
                          << "\n";
                if (!g.out.empty())
                    io::emit_benchmark(io::Target::from(g.out, "benchmark.csv"), c, b,
                                       info_for(ben_fid->parsed() ? "benchmark fidelity" : "benchmark", {}, start));
            }
        } else if (val->parsed()) {
            auto c = load(g, config::Engine::Sde, true);
            const auto v = config::validity(c);
            for (const auto& it : v.items)
                std::cout << (it.passed ? "pass " : (it.advisory ? "note " : "FAIL ")) << it.name << " margin "
                          << io::format_number(it.margin) << "\n";
            if (!g.out.empty())
                io::emit_validation(io::Target::from(g.out, "validity.csv"), c, v, info_for("validate", {}, start));
            if (!v.all_passed()) {
                std::cerr << "warning: validity checks failed\n";
                if (g.strict) return kValidity;
            }
        }
    } catch (const ExitWith& e) {
        return e.code;
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const sde::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
