#include "eitmem/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <openssl/evp.h>

#include "json.hpp"

namespace eitmem::io {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json validity_json(const ValidityReport& v) {
    json items = json::array();
    for (const auto& it : v.items)
        items.push_back({{"name", it.name},
                         {"margin", finite_or_null(it.margin)},
                         {"margin_infinite", std::isinf(it.margin)},
                         {"passed", it.passed},
                         {"advisory", it.advisory}});
    return {{"margin_factor", v.margin_factor}, {"all_passed", v.all_passed()}, {"items", items}};
}

std::string dat_name(const std::string& csv) {
    const auto pos = csv.rfind(".csv");
    return (pos == std::string::npos ? csv : csv.substr(0, pos)) + ".dat";
}

std::string stem_of(const std::string& csv) {
    const auto pos = csv.rfind(".csv");
    return pos == std::string::npos ? csv : csv.substr(0, pos);
}

void write_manifest(const RunDirectory& d, const config::RunConfig& c, const RunInfo& info,
                    const json& engine) {
    d.text("run.json", manifest_json(c, info, engine.dump()));
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string git_blob_sha1(const std::string& bytes) {
    const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
    const std::string data = header + bytes;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("SHA-1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        const unsigned char b = md[i];
        s += hex[b >> 4];
        s += hex[b & 15];
    }
    return s;
}

void Table::add(std::initializer_list<Cell> cells) {
    if (cells.size() != columns.size()) throw std::logic_error("table row width mismatch");
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(c.text);
    rows.push_back(std::move(row));
}

std::string Table::csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += "\n";
    }
    return s;
}

std::string Table::dat() const {
    std::string s = "#";
    for (const auto& c : columns) s += " " + c;
    s += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? " " : "") + r[i];
        s += "\n";
    }
    return s;
}

Target Target::from(const std::filesystem::path& out, const std::string& default_csv) {
    Target t;
    if (out.extension() == ".csv") {
        t.dir = out.has_parent_path() ? out.parent_path() : std::filesystem::path(".");
        t.main_csv = out.filename().string();
    } else {
        t.dir = out;
        t.main_csv = default_csv;
    }
    return t;
}

RunDirectory::RunDirectory(std::filesystem::path dir, bool dat_mirror)
    : dir_(std::move(dir)), dat_(dat_mirror) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw OutputError("cannot create output directory '" + dir_.string() + "'");
}

void RunDirectory::text(const std::string& name, const std::string& content) const {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw OutputError("write failed for '" + path.string() + "'");
}

void RunDirectory::table(const std::string& name, const Table& t) const {
    text(name, t.csv());
    if (dat_) text(dat_name(name), t.dat());
}

Table spectrum_table(const spectrum::PlaneSpectrum& s) {
    Table t;
    t.columns = {"omega", "S_plus", "S_minus", "V_plus", "V_minus", "se_plus", "se_minus"};
    for (std::size_t i = 0; i < s.omega.size(); ++i)
        t.add({s.omega[i], s.S_plus[i], s.S_minus[i], s.V_plus[i], s.V_minus[i], s.se_plus[i],
               s.se_minus[i]});
    return t;
}

Table field_grid_table(const sde::EnsembleResult& r) {
    Table t;
    t.columns = {"z", "t", "mean_Xplus", "mean_Xminus"};
    const std::size_t nz = r.grid_z.size();
    for (std::size_t it = 0; it < r.grid_t.size(); ++it)
        for (std::size_t iz = 0; iz < nz; ++iz)
            t.add({r.grid_z[iz], r.grid_t[it], r.mean_Xplus[it * nz + iz], r.mean_Xminus[it * nz + iz]});
    return t;
}

Table analytic_table(const std::vector<runs::AnalyticRow>& rows) {
    Table t;
    t.columns = {"x",      "omega",       "z",           "gamma0", "gammac", "S_plus", "S_minus",
                 "V_plus", "V_minus", "alpha_plus", "alpha_minus", "eta", "N_f", "V_noise"};
    for (const auto& r : rows)
        t.add({r.x, r.omega, r.z, r.gamma0, r.gammac, r.S_plus, r.S_minus, r.V_plus, r.V_minus,
               r.alpha_plus, r.alpha_minus, r.eta, r.nf, r.v_noise});
    return t;
}

Table storage_table(const storage::Pipeline& p) {
    Table t;
    t.columns = {"series", "coord", "re", "im", "abs2"};
    auto env = [&](const char* name, const storage::Envelope& e) {
        for (std::size_t k = 0; k < e.samples.size(); ++k)
            t.add({name, e.time(k), e.samples[k].real(), e.samples[k].imag(), std::norm(e.samples[k])});
    };
    auto coh = [&](const char* name, const storage::StoredCoherence& c) {
        for (std::size_t k = 0; k < c.sigma.size(); ++k)
            t.add({name, c.zeta[k], c.sigma[k].real(), c.sigma[k].imag(), std::norm(c.sigma[k])});
    };
    env("input", p.input);
    coh("written", p.written.coherence);
    coh("held", p.held);
    env("output", p.output.out);
    return t;
}

Table tv_map_table(const qbench::RegionMap& m) {
    Table t;
    t.columns = {"x", "y", "T", "V", "eta", "V_noise", "region"};
    for (const auto& c : m.cells)
        t.add({c.x, c.y, c.tv.T, c.tv.V, c.tv.eta, c.tv.v_noise, qbench::to_string(c.region)});
    return t;
}

Table boundary_table(const qbench::RegionMap& m) {
    Table t;
    t.columns = {"x", "y", "from", "to"};
    for (const auto& b : m.boundary)
        t.add({b.x, b.y, qbench::to_string(b.from), qbench::to_string(b.to)});
    return t;
}

std::string manifest_json(const config::RunConfig& c, const RunInfo& info, const std::string& engine_json) {
    const std::string echo = config::to_toml(c);
    json m;
    m["tool"] = "eitmem";
    m["tool_version"] = info.tool_version;
    m["command"] = info.command;
    m["engine"] = config::to_string(c.engine);
    m["config_sha1"] = git_blob_sha1(c.source_text.empty() ? echo : c.source_text);
    m["effective_sha1"] = git_blob_sha1(echo);
    m["seed"] = c.grid.seed;
    m["wall_seconds"] = info.wall_seconds;
    m["warnings"] = info.warnings;
    if (c.physics.atom_number > 0.0) m["validity"] = validity_json(config::validity(c));
    m["config_echo"] = echo;
    m["diagnostics"] = json::parse(engine_json);
    return m.dump(2) + "\n";
}

void emit_simulation(const Target& t, const config::RunConfig& c, const sde::EnsembleResult& r,
                     bool signal_on, const RunInfo& info) {
    RunDirectory d(t.dir, c.output.dat_mirror);
    json planes = json::array();
    for (std::size_t i = 0; i < r.spectra.size(); ++i) {
        const auto& s = r.spectra[i];
        const std::string name = "spectrum_plane" + std::to_string(i) + ".csv";
        d.table(name, spectrum_table(s));
        planes.push_back({{"file", name}, {"z", s.z}, {"window", s.window}, {"samples", s.samples}});
    }
    if (!r.spectra.empty()) d.table(t.main_csv, spectrum_table(r.spectra.back()));
    d.table("input_spectrum.csv", spectrum_table(r.input));
    if (!r.grid_t.empty()) d.table("field_grid.csv", field_grid_table(r));
    json e = {{"signal_on", signal_on},
              {"diverged_count", r.diverged_count},
              {"traj_used", r.traj_used},
              {"engine_wall_seconds", r.wall_seconds},
              {"planes", planes},
              {"spectrum_file", t.main_csv}};
    write_manifest(d, c, info, e);
}

void emit_analytic(const Target& t, const config::RunConfig& c, const std::vector<runs::AnalyticRow>& rows,
                   const RunInfo& info) {
    RunDirectory d(t.dir, c.output.dat_mirror);
    d.table(t.main_csv, analytic_table(rows));
    json e = {{"sweep", c.analytic.sweep}, {"rows", rows.size()}, {"file", t.main_csv}};
    write_manifest(d, c, info, e);
}

void emit_storage(const Target& t, const config::RunConfig& c, const storage::Pipeline& p,
                  const RunInfo& info) {
    RunDirectory d(t.dir, c.output.dat_mirror);
    d.table(t.main_csv, storage_table(p));
    const auto& r = p.report;
    const double e_in = p.input.energy(), e_out = p.output.out.energy();
    json tr = {{"mode", storage::to_string(c.storage.mode)},
               {"amplitude_factor_re", r.amplitude_factor.real()},
               {"amplitude_factor_im", r.amplitude_factor.imag()},
               {"amplitude_factor_abs", std::abs(r.amplitude_factor)},
               {"margin_fits", finite_or_null(r.margin_fits)},
               {"margin_window", finite_or_null(r.margin_window)},
               {"tb_product", finite_or_null(r.tb_product)},
               {"d_prime", r.d_prime},
               {"hold", r.hold},
               {"t_off", p.t_off},
               {"t_on", p.t_on},
               {"input_energy", e_in},
               {"output_energy", e_out},
               {"energy_efficiency", e_in > 0.0 ? json(e_out / e_in) : json(nullptr)},
               {"write_truncation_loss", p.written.truncation_loss},
               {"read_truncation_loss", p.output.truncation_loss},
               {"write_warning", p.written.warning},
               {"read_warning", p.output.warning}};
    d.text("transfer.json", tr.dump(2) + "\n");
    write_manifest(d, c, info, {{"file", t.main_csv}, {"transfer", "transfer.json"}});
}

void emit_benchmark(const Target& t, const config::RunConfig& c, const runs::BenchmarkPoint& b,
                    const RunInfo& info) {
    RunDirectory d(t.dir, c.output.dat_mirror);
    json j = {{"alpha", b.alpha},   {"eta", b.eta},   {"v_noise", b.v_noise}, {"F", b.fidelity},
              {"T", b.tv.T},        {"V", b.tv.V},    {"region", qbench::to_string(b.region)}};
    d.text("benchmark.json", j.dump(2) + "\n");
    write_manifest(d, c, info, {{"benchmark", "benchmark.json"}});
}

void emit_tv_map(const Target& t, const config::RunConfig& c, const qbench::RegionMap& m,
                 const RunInfo& info) {
    RunDirectory d(t.dir, c.output.dat_mirror);
    const std::string boundary = stem_of(t.main_csv) + "_boundary.csv";
    d.table(t.main_csv, tv_map_table(m));
    d.table(boundary, boundary_table(m));
    std::map<std::string, long> counts;
    for (const auto& cell : m.cells) ++counts[qbench::to_string(cell.region)];
    json j = {{"plane", m.plane == qbench::Plane::LossNoise ? "loss-noise" : "gain-loss"},
              {"nx", m.grid.nx},
              {"ny", m.grid.ny},
              {"x_min", m.grid.x_min},
              {"x_max", m.grid.x_max},
              {"y_min", m.grid.y_min},
              {"y_max", m.grid.y_max},
              {"z", m.grid.z},
              {"region_counts", counts},
              {"boundary_points", m.boundary.size()},
              {"grid_file", t.main_csv},
              {"boundary_file", boundary}};
    d.text("benchmark.json", j.dump(2) + "\n");
    write_manifest(d, c, info, {{"benchmark", "benchmark.json"}});
}

void emit_validation(const Target& t, const config::RunConfig& c, const ValidityReport& v,
                     const RunInfo& info) {
    RunDirectory d(t.dir, c.output.dat_mirror);
    Table tab;
    tab.columns = {"name", "margin", "margin_factor", "passed", "advisory"};
    for (const auto& it : v.items)
        tab.add({it.name, it.margin, v.margin_factor, it.passed ? "true" : "false",
                 it.advisory ? "true" : "false"});
    d.table(t.main_csv, tab);
    write_manifest(d, c, info, validity_json(v));
}

}  // namespace eitmem::io
