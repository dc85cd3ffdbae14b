#include "eitmem/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace eitmem::config {

namespace {

[[noreturn]] void fail_at(const std::string& msg, const toml::source_region& src) {
    throw ConfigError(msg, static_cast<int>(src.begin.line), static_cast<int>(src.begin.column));
}

// A table whose keys must all be consumed.
class Section {
public:
    Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

    bool present() const { return t_ != nullptr; }
    bool has(const std::string& key) const { return t_ && t_->contains(key); }

    const toml::node* take(const std::string& key) {
        if (!t_) return nullptr;
        used_.insert(key);
        return t_->get(key);
    }

    double number(const std::string& key, double def) {
        const auto* n = take(key);
        if (!n) return def;
        if (auto v = n->value_exact<double>()) return *v;
        if (auto v = n->value_exact<int64_t>()) return static_cast<double>(*v);
        fail_at(where(key) + " must be a number", n->source());
    }
    double required_number(const std::string& key) {
        if (!has(key)) missing(key);
        return number(key, 0.0);
    }
    long long integer(const std::string& key, long long def) {
        const auto* n = take(key);
        if (!n) return def;
        if (auto v = n->value_exact<int64_t>()) return *v;
        fail_at(where(key) + " must be an integer", n->source());
    }
    bool boolean(const std::string& key, bool def) {
        const auto* n = take(key);
        if (!n) return def;
        if (auto v = n->value_exact<bool>()) return *v;
        fail_at(where(key) + " must be a boolean", n->source());
    }
    std::string string(const std::string& key, const std::string& def) {
        const auto* n = take(key);
        if (!n) return def;
        if (auto v = n->value_exact<std::string>()) return *v;
        fail_at(where(key) + " must be a string", n->source());
    }
    std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
        const auto* n = take(key);
        if (!n) return def;
        const auto* a = n->as_array();
        if (!a) fail_at(where(key) + " must be an array of numbers", n->source());
        std::vector<double> r;
        for (const auto& e : *a) {
            if (auto v = e.value_exact<double>()) r.push_back(*v);
            else if (auto w = e.value_exact<int64_t>()) r.push_back(static_cast<double>(*w));
            else fail_at(where(key) + " must contain numbers only", e.source());
        }
        return r;
    }
    // Rate given either in gamma units (key a) or in s^-1 (key b).
    std::optional<double> rate(const std::string& a, const std::string& b, double gamma_per_second) {
        if (has(a) && has(b)) fail_at(where(a) + " and " + b + " are mutually exclusive", t_->get(b)->source());
        if (has(a)) return number(a, 0.0);
        if (has(b)) return hz_to_gamma(number(b, 0.0), gamma_per_second);
        return std::nullopt;
    }

    [[noreturn]] void bad(const std::string& key, const std::string& why) {
        const auto* n = t_ ? t_->get(key) : nullptr;
        if (n) fail_at(where(key) + ": " + why, n->source());
        throw ConfigError(where(key) + ": " + why);
    }
    [[noreturn]] void missing(const std::string& key) const {
        if (t_) fail_at("missing required key " + where(key), t_->source());
        throw ConfigError("missing required key " + where(key));
    }

    void finish() const {
        if (!t_) return;
        for (const auto& [k, v] : *t_)
            if (!used_.count(std::string(k.str())))
                fail_at("unknown key " + where(std::string(k.str())), k.source().begin ? k.source() : v.source());
    }

    std::string where(const std::string& key) const {
        return name_.empty() ? key : name_ + "." + key;
    }

private:
    const toml::table* t_;
    std::string name_;
    std::set<std::string> used_;
};

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, r.ptr);
    // Keep floats distinguishable from integers in the echo.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string quoted(const std::string& s) {
    std::string r = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') r += '\\';
        r += ch;
    }
    return r + "\"";
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

sde::NoiseModel parse_noise_model(const std::string& s) {
    if (s == "full") return sde::NoiseModel::Full;
    if (s == "linearized") return sde::NoiseModel::Linearized;
    throw std::invalid_argument("unknown noise model '" + s + "' (full|linearized)");
}

std::string noise_model_name(sde::NoiseModel m) {
    return m == sde::NoiseModel::Linearized ? "linearized" : "full";
}

PulseShape parse_shape(const std::string& s) {
    if (s == "super_gaussian" || s == "super-gaussian") return PulseShape::SuperGaussian;
    if (s == "flat_top" || s == "flat-top") return PulseShape::FlatTop;
    throw std::invalid_argument("unknown pulse shape '" + s + "' (super_gaussian|flat_top)");
}

std::string shape_name(PulseShape s) {
    return s == PulseShape::FlatTop ? "flat_top" : "super_gaussian";
}

template <class F>
auto guarded(Section& s, const std::string& key, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        s.bad(key, e.what());
    }
}

bool needs_medium(Engine e) { return e != Engine::Benchmark; }

void read_physics(Section s, Section sched, RunConfig& c) {
    auto& p = c.physics;
    if (!s.present()) {
        if (needs_medium(c.engine)) throw ConfigError("missing [physics] section");
        if (sched.present()) throw ConfigError("[schedule] given without [physics]");
        return;
    }
    p.gamma_per_second = s.number("gamma_hz", kDefaultGammaPerSecond);
    if (!(p.gamma_per_second > 0.0)) s.bad("gamma_hz", "must be positive");
    p.gamma0 = s.rate("gamma0_gamma", "gamma0_hz", p.gamma_per_second).value_or(0.0);
    p.gammac = s.rate("gammac_gamma", "gammac_hz", p.gamma_per_second).value_or(0.0);
    if (!(p.gamma0 >= 0.0 && p.gammac >= 0.0)) s.bad("gamma0_gamma", "decoherence rates must be non-negative");
    p.density = s.required_number("density_cm3");
    p.area = s.required_number("area_cm2");
    p.length = s.required_number("length_cm");
    p.c_light = s.number("c_light_cm_per_s", kSpeedOfLightCmPerS);
    p.atom_number = p.density * p.area * p.length;
    if (s.has("optical_depth") && s.has("g_per_second"))
        s.bad("g_per_second", "optical_depth and g_per_second are mutually exclusive");
    if (s.has("optical_depth")) {
        const double d = s.number("optical_depth", 0.0);
        if (!(d > 0.0)) s.bad("optical_depth", "must be positive");
        p.g = std::sqrt(d * p.gamma_per_second * p.c_light / (p.atom_number * p.length));
    } else if (s.has("g_per_second")) {
        p.g = s.number("g_per_second", 0.0);
    } else {
        s.missing("optical_depth");
    }
    s.finish();

    if (!sched.present()) throw ConfigError("missing [schedule] section");
    auto& k = p.coupling;
    k.omega_on = sched.required_number("omega_c_gamma");
    k.switching = sched.boolean("switching", false);
    k.t_off = sched.number("t_off_inv_gamma", 0.0);
    k.t_on = sched.number("t_on_inv_gamma", 0.0);
    if (!k.is_valid()) sched.bad("t_on_inv_gamma", "needs omega_c >= 0 and t_on > t_off >= 0 when switching");
    sched.finish();

    const std::string err = p.check();
    if (!err.empty()) throw ConfigError("[physics]: " + err);
}

void read_pulse(Section s, PulseSpec& p) {
    p.shape = guarded(s, "shape", [&] { return parse_shape(s.string("shape", shape_name(p.shape))); });
    p.order = static_cast<int>(s.integer("order", p.order));
    p.duration = s.number("duration_inv_gamma", p.duration);
    p.center = s.number("center_inv_gamma", p.center);
    p.carrier_amp = s.number("carrier_amp", p.carrier_amp);
    p.mod_freq = s.number("mod_freq_gamma", p.mod_freq);
    p.mod_depth_plus = s.number("mod_depth_plus", p.mod_depth_plus);
    p.mod_depth_minus = s.number("mod_depth_minus", p.mod_depth_minus);
    if (!(p.duration > 0.0)) s.bad("duration_inv_gamma", "must be positive");
    if (p.order < 1) s.bad("order", "must be at least 1");
    s.finish();
}

void read_grid(Section s, sde::GridSpec& g) {
    g.nz = static_cast<int>(s.integer("nz", g.nz));
    g.dt = s.number("dt_inv_gamma", g.dt);
    g.t_total = s.number("t_total_inv_gamma", g.t_total);
    g.n_traj = static_cast<long>(s.integer("n_traj", g.n_traj));
    if (const auto* n = s.take("seed")) {
        if (auto v = n->value_exact<int64_t>(); v && *v >= 0) {
            g.seed = static_cast<std::uint64_t>(*v);
        } else if (auto str = n->value_exact<std::string>()) {
            std::uint64_t u = 0;
            auto r = std::from_chars(str->data(), str->data() + str->size(), u);
            if (r.ec != std::errc() || r.ptr != str->data() + str->size())
                fail_at("grid.seed must be a non-negative integer", n->source());
            g.seed = u;
        } else {
            fail_at("grid.seed must be a non-negative integer", n->source());
        }
    }
    g.overflow_guard = s.number("overflow_guard", g.overflow_guard);
    g.max_diverged = s.number("max_diverged", g.max_diverged);
    g.noise = s.boolean("noise", g.noise);
    g.noise_model = guarded(s, "noise_model", [&] {
        return parse_noise_model(s.string("noise_model", noise_model_name(g.noise_model)));
    });
    g.threads = static_cast<int>(s.integer("threads", g.threads));
    const std::string err = g.check();
    if (!err.empty()) throw ConfigError("[grid]: " + err);
    s.finish();
}

void read_readout(Section s, sde::ReadoutSpec& r) {
    r.planes = s.numbers("planes", r.planes);
    r.window_start = s.number("window_start_inv_gamma", r.window_start);
    r.window_length = s.number("window_length_inv_gamma", r.window_length);
    r.input_window_start = s.number("input_window_start_inv_gamma", r.input_window_start);
    r.grid_z_stride = static_cast<int>(s.integer("grid_z_stride", r.grid_z_stride));
    r.grid_t_stride = static_cast<int>(s.integer("grid_t_stride", r.grid_t_stride));
    if (!(r.window_length > 0.0)) s.bad("window_length_inv_gamma", "must be positive");
    if (s.has("omegas_gamma") && s.has("omega_harmonics"))
        s.bad("omega_harmonics", "omegas_gamma and omega_harmonics are mutually exclusive");
    if (s.has("omega_harmonics")) {
        for (double k : s.numbers("omega_harmonics", {})) {
            if (k != std::floor(k)) s.bad("omega_harmonics", "harmonic indices must be integers");
            r.omegas.push_back(2.0 * kPi * k / r.window_length);
        }
    } else {
        r.omegas = s.numbers("omegas_gamma", r.omegas);
    }
    for (double z : r.planes)
        if (!(z >= 0.0 && z <= 1.0)) s.bad("planes", "planes must lie in [0, 1]");
    s.finish();
}

void read_storage(Section s, StorageSettings& st) {
    st.mode = guarded(s, "mode", [&] { return storage::parse_mode(s.string("mode", storage::to_string(st.mode))); });
    st.hold = s.number("hold_inv_gamma", st.hold);
    st.dt = s.number("dt_inv_gamma", st.dt);
    st.kernel.padding = static_cast<int>(s.integer("padding", st.kernel.padding));
    st.kernel.band_half_width = s.number("band_half_width_gamma", st.kernel.band_half_width);
    st.kernel.nzeta = static_cast<int>(s.integer("nzeta", st.kernel.nzeta));
    st.kernel.delta_omega = s.number("delta_omega_gamma", st.kernel.delta_omega);
    if (st.kernel.padding < 4) s.bad("padding", "must be at least 4");
    if (!(st.dt > 0.0)) s.bad("dt_inv_gamma", "must be positive");
    if (!(st.hold >= 0.0)) s.bad("hold_inv_gamma", "must be non-negative");
    s.finish();
}

void read_analytic(Section s, AnalyticSettings& a) {
    a.sweep = s.string("sweep", a.sweep);
    if (a.sweep != "omega" && a.sweep != "z" && a.sweep != "gamma0" && a.sweep != "gammac")
        s.bad("sweep", "must be omega, z, gamma0 or gammac");
    a.from = s.number("from", a.from);
    a.to = s.number("to", a.to);
    a.n = static_cast<int>(s.integer("n", a.n));
    a.omega = s.number("omega_gamma", a.omega);
    a.z = s.number("z", a.z);
    a.s_in = s.number("s_in", a.s_in);
    if (a.n < 1) s.bad("n", "must be at least 1");
    s.finish();
}

void read_benchmark(Section s, BenchmarkSettings& b) {
    b.eta = s.number("eta", b.eta);
    b.v_noise = s.number("v_noise", b.v_noise);
    b.alpha = s.number("alpha", b.alpha);
    b.plane = s.string("plane", b.plane);
    guarded(s, "plane", [&] { return qbench::parse_plane(b.plane); });
    auto& g = b.grid;
    g.x_min = s.number("x_min", g.x_min);
    g.x_max = s.number("x_max", g.x_max);
    g.y_min = s.number("y_min", g.y_min);
    g.y_max = s.number("y_max", g.y_max);
    g.nx = static_cast<int>(s.integer("nx", g.nx));
    g.ny = static_cast<int>(s.integer("ny", g.ny));
    g.z = s.number("z", g.z);
    if (g.nx < 2 || g.ny < 2) s.bad("nx", "grid needs at least 2x2 cells");
    s.finish();
}

const toml::table* sub(const toml::table& root, const char* name) {
    const auto* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail_at(std::string(name) + " must be a table", n->source());
    return n->as_table();
}

}  // namespace

Engine parse_engine(const std::string& s) {
    if (s == "sde") return Engine::Sde;
    if (s == "analytic") return Engine::Analytic;
    if (s == "storage") return Engine::Storage;
    if (s == "benchmark") return Engine::Benchmark;
    throw std::invalid_argument("unknown engine '" + s + "' (sde|analytic|storage|benchmark)");
}

std::string to_string(Engine e) {
    switch (e) {
        case Engine::Sde: return "sde";
        case Engine::Analytic: return "analytic";
        case Engine::Storage: return "storage";
        case Engine::Benchmark: return "benchmark";
    }
    return "sde";
}

// Thread count only schedules work and does not change results.
bool RunConfig::same_effective(const RunConfig& o) const {
    auto g = o.grid;
    g.threads = grid.threads;
    return engine == o.engine && margin_factor == o.margin_factor && physics == o.physics &&
           pulse == o.pulse && grid == g && readout == o.readout && storage == o.storage &&
           analytic == o.analytic && benchmark == o.benchmark && output == o.output;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ConfigError("empty configuration in " + source, 1, 1);
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string(e.description()), static_cast<int>(e.source().begin.line),
                          static_cast<int>(e.source().begin.column));
    }
    RunConfig c;
    c.source_text = text;
    Section top(&root, "");
    c.engine = guarded(top, "engine", [&] { return parse_engine(top.string("engine", "sde")); });
    c.margin_factor = top.number("margin_factor", c.margin_factor);
    if (!(c.margin_factor > 0.0)) top.bad("margin_factor", "must be positive");

    const char* sections[] = {"physics", "schedule", "pulse", "grid", "readout",
                              "storage", "analytic", "benchmark", "output"};
    for (const char* s : sections) top.take(s);
    top.finish();

    read_physics(Section(sub(root, "physics"), "physics"), Section(sub(root, "schedule"), "schedule"), c);
    read_pulse(Section(sub(root, "pulse"), "pulse"), c.pulse);
    read_grid(Section(sub(root, "grid"), "grid"), c.grid);
    read_readout(Section(sub(root, "readout"), "readout"), c.readout);
    read_storage(Section(sub(root, "storage"), "storage"), c.storage);
    read_analytic(Section(sub(root, "analytic"), "analytic"), c.analytic);
    read_benchmark(Section(sub(root, "benchmark"), "benchmark"), c.benchmark);
    Section out(sub(root, "output"), "output");
    c.output.dat_mirror = out.boolean("dat_mirror", false);
    out.finish();

    if (c.engine == Engine::Sde && !sub(root, "pulse"))
        throw ConfigError("engine sde needs a [pulse] section");
    if (c.engine == Engine::Storage && !sub(root, "pulse"))
        throw ConfigError("engine storage needs a [pulse] section");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string to_toml(const RunConfig& c) {
    std::ostringstream o;
    o << "engine = " << quoted(to_string(c.engine)) << "\n";
    o << "margin_factor = " << fmt(c.margin_factor) << "\n";
    const auto& p = c.physics;
    const bool medium = p.atom_number > 0.0;
    if (medium) {
        o << "\n[physics]\n";
        o << "gamma_hz = " << fmt(p.gamma_per_second) << "\n";
        o << "gamma0_gamma = " << fmt(p.gamma0) << "\n";
        o << "gammac_gamma = " << fmt(p.gammac) << "\n";
        o << "density_cm3 = " << fmt(p.density) << "\n";
        o << "area_cm2 = " << fmt(p.area) << "\n";
        o << "length_cm = " << fmt(p.length) << "\n";
        o << "c_light_cm_per_s = " << fmt(p.c_light) << "\n";
        o << "g_per_second = " << fmt(p.g) << "\n";
        o << "\n[schedule]\n";
        o << "omega_c_gamma = " << fmt(p.coupling.omega_on) << "\n";
        o << "switching = " << (p.coupling.switching ? "true" : "false") << "\n";
        o << "t_off_inv_gamma = " << fmt(p.coupling.t_off) << "\n";
        o << "t_on_inv_gamma = " << fmt(p.coupling.t_on) << "\n";
    }
    const auto& u = c.pulse;
    o << "\n[pulse]\n";
    o << "shape = " << quoted(shape_name(u.shape)) << "\n";
    o << "order = " << u.order << "\n";
    o << "duration_inv_gamma = " << fmt(u.duration) << "\n";
    o << "center_inv_gamma = " << fmt(u.center) << "\n";
    o << "carrier_amp = " << fmt(u.carrier_amp) << "\n";
    o << "mod_freq_gamma = " << fmt(u.mod_freq) << "\n";
    o << "mod_depth_plus = " << fmt(u.mod_depth_plus) << "\n";
    o << "mod_depth_minus = " << fmt(u.mod_depth_minus) << "\n";
    const auto& g = c.grid;
    o << "\n[grid]\n";
    o << "nz = " << g.nz << "\n";
    o << "dt_inv_gamma = " << fmt(g.dt) << "\n";
    o << "t_total_inv_gamma = " << fmt(g.t_total) << "\n";
    o << "n_traj = " << g.n_traj << "\n";
    if (g.seed <= static_cast<std::uint64_t>(std::numeric_limits<int64_t>::max()))
        o << "seed = " << g.seed << "\n";
    else
        o << "seed = \"" << g.seed << "\"\n";
    o << "overflow_guard = " << fmt(g.overflow_guard) << "\n";
    o << "max_diverged = " << fmt(g.max_diverged) << "\n";
    o << "noise = " << (g.noise ? "true" : "false") << "\n";
    o << "noise_model = " << quoted(noise_model_name(g.noise_model)) << "\n";
    const auto& r = c.readout;
    o << "\n[readout]\n";
    o << "planes = " << list(r.planes) << "\n";
    o << "omegas_gamma = " << list(r.omegas) << "\n";
    o << "window_start_inv_gamma = " << fmt(r.window_start) << "\n";
    o << "window_length_inv_gamma = " << fmt(r.window_length) << "\n";
    o << "input_window_start_inv_gamma = " << fmt(r.input_window_start) << "\n";
    o << "grid_z_stride = " << r.grid_z_stride << "\n";
    o << "grid_t_stride = " << r.grid_t_stride << "\n";
    const auto& s = c.storage;
    o << "\n[storage]\n";
    o << "mode = " << quoted(storage::to_string(s.mode)) << "\n";
    o << "hold_inv_gamma = " << fmt(s.hold) << "\n";
    o << "dt_inv_gamma = " << fmt(s.dt) << "\n";
    o << "padding = " << s.kernel.padding << "\n";
    o << "band_half_width_gamma = " << fmt(s.kernel.band_half_width) << "\n";
    o << "nzeta = " << s.kernel.nzeta << "\n";
    o << "delta_omega_gamma = " << fmt(s.kernel.delta_omega) << "\n";
    const auto& a = c.analytic;
    o << "\n[analytic]\n";
    o << "sweep = " << quoted(a.sweep) << "\n";
    o << "from = " << fmt(a.from) << "\n";
    o << "to = " << fmt(a.to) << "\n";
    o << "n = " << a.n << "\n";
    o << "omega_gamma = " << fmt(a.omega) << "\n";
    o << "z = " << fmt(a.z) << "\n";
    o << "s_in = " << fmt(a.s_in) << "\n";
    const auto& b = c.benchmark;
    o << "\n[benchmark]\n";
    o << "eta = " << fmt(b.eta) << "\n";
    o << "v_noise = " << fmt(b.v_noise) << "\n";
    o << "alpha = " << fmt(b.alpha) << "\n";
    o << "plane = " << quoted(b.plane) << "\n";
    o << "x_min = " << fmt(b.grid.x_min) << "\n";
    o << "x_max = " << fmt(b.grid.x_max) << "\n";
    o << "y_min = " << fmt(b.grid.y_min) << "\n";
    o << "y_max = " << fmt(b.grid.y_max) << "\n";
    o << "nx = " << b.grid.nx << "\n";
    o << "ny = " << b.grid.ny << "\n";
    o << "z = " << fmt(b.grid.z) << "\n";
    o << "\n[output]\n";
    o << "dat_mirror = " << (c.output.dat_mirror ? "true" : "false") << "\n";
    return o.str();
}

ValidityReport validity(const RunConfig& c) {
    return validate(c.physics, c.pulse, c.margin_factor);
}

}  // namespace eitmem::config
