#pragma once

// Run directories: CSV tables with round-trip number formatting, JSON reports
// and a single run.json manifest per directory.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/config.hpp"
#include "eitmem/qbench.hpp"
#include "eitmem/runs.hpp"
#include "eitmem/sde.hpp"
#include "eitmem/storage.hpp"

namespace eitmem::io {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest decimal that parses back to the same double.
std::string format_number(double v);

// SHA-1 of "blob <size>\0" + bytes, as git computes object ids.
std::string git_blob_sha1(const std::string& bytes);

struct Cell {
    std::string text;
    Cell(double v) : text(format_number(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(long long v) : text(std::to_string(v)) {}
    Cell(const std::string& s) : text(s) {}
    Cell(const char* s) : text(s) {}
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    void add(std::initializer_list<Cell> cells);
    std::string csv() const;
    std::string dat() const;  // whitespace separated, '#' header
};

// Where a command writes: a directory, optionally with a named main CSV.
struct Target {
    std::filesystem::path dir;
    std::string main_csv;

    // A path ending in .csv names the main file; anything else is a directory.
    static Target from(const std::filesystem::path& out, const std::string& default_csv);
};

struct RunInfo {
    std::string command;
    std::string tool_version;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

// Tables
Table spectrum_table(const spectrum::PlaneSpectrum& s);
Table field_grid_table(const sde::EnsembleResult& r);
Table analytic_table(const std::vector<runs::AnalyticRow>& rows);
Table storage_table(const storage::Pipeline& p);
Table tv_map_table(const qbench::RegionMap& m);
Table boundary_table(const qbench::RegionMap& m);

class RunDirectory {
public:
    RunDirectory(std::filesystem::path dir, bool dat_mirror);
    const std::filesystem::path& dir() const { return dir_; }

    // Writes name (and the .dat mirror when enabled).
    void table(const std::string& name, const Table& t) const;
    void text(const std::string& name, const std::string& content) const;

private:
    std::filesystem::path dir_;
    bool dat_;
};

// Per-engine emission.  Every call writes run.json last.
void emit_simulation(const Target& t, const config::RunConfig& c, const sde::EnsembleResult& r,
                     bool signal_on, const RunInfo& info);
void emit_analytic(const Target& t, const config::RunConfig& c,
                   const std::vector<runs::AnalyticRow>& rows, const RunInfo& info);
void emit_storage(const Target& t, const config::RunConfig& c, const storage::Pipeline& p,
                  const RunInfo& info);
void emit_benchmark(const Target& t, const config::RunConfig& c, const runs::BenchmarkPoint& b,
                    const RunInfo& info);
void emit_tv_map(const Target& t, const config::RunConfig& c, const qbench::RegionMap& m,
                 const RunInfo& info);
void emit_validation(const Target& t, const config::RunConfig& c, const ValidityReport& v,
                     const RunInfo& info);

// Manifest content for a configuration; exposed for tests.
std::string manifest_json(const config::RunConfig& c, const RunInfo& info,
                          const std::string& engine_json = "{}");

}  // namespace eitmem::io
