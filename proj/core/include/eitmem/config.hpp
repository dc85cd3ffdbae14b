#pragma once

// TOML run configuration with a strict schema.  Unknown keys and type
// mismatches are errors reported with line and column.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/model.hpp"
#include "eitmem/qbench.hpp"
#include "eitmem/sde.hpp"
#include "eitmem/storage.hpp"

namespace eitmem::config {

enum class Engine { Sde, Analytic, Storage, Benchmark };
Engine parse_engine(const std::string& s);
std::string to_string(Engine e);

struct StorageSettings {
    storage::Mode mode = storage::Mode::Ideal;
    double hold = 50.0;
    double dt = 0.1;
    storage::KernelOptions kernel;
    bool operator==(const StorageSettings&) const = default;
};

struct AnalyticSettings {
    std::string sweep = "omega";  // omega | z | gamma0 | gammac
    double from = 0.0, to = 0.02;
    int n = 101;
    double omega = 0.005;  // fixed frequency for the z and rate sweeps
    double z = 1.0;        // fixed depth for the omega and rate sweeps
    double s_in = 1.0;
    bool operator==(const AnalyticSettings&) const = default;
};

struct BenchmarkSettings {
    double eta = 0.4;
    double v_noise = 0.12;
    double alpha = 1.0;
    std::string plane = "loss-noise";
    qbench::GridSpec2 grid;
    bool operator==(const BenchmarkSettings&) const = default;
};

struct OutputSettings {
    bool dat_mirror = false;
    bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
    Engine engine = Engine::Sde;
    double margin_factor = 10.0;
    PhysicalParams physics;
    PulseSpec pulse;
    sde::GridSpec grid;
    sde::ReadoutSpec readout;
    StorageSettings storage;
    AnalyticSettings analytic;
    BenchmarkSettings benchmark;
    OutputSettings output;
    // Raw bytes the configuration was parsed from; not part of the echo.
    std::string source_text;
    // Equality of the effective parameters, ignoring source_text.
    bool same_effective(const RunConfig& o) const;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, int column = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                            std::to_string(column) + ")"
                                      : what),
          line(line), column(column) {}
    int line, column;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

// Effective configuration as TOML; parse_config of the result reproduces it.
std::string to_toml(const RunConfig& c);

// Physics validity at the configured margin.
ValidityReport validity(const RunConfig& c);

}  // namespace eitmem::config
