#include "eitmem/storage.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace eitmem::storage {

namespace {

constexpr cplx I{0.0, 1.0};

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place DFT; sign -1 computes sum x_k e^{-2 pi i m k / n}, +1 the conjugate kernel.
void dft(std::vector<cplx>& x, int sign) {
    const int n = static_cast<int>(x.size());
    auto* data = reinterpret_cast<fftw_complex*>(x.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, data, data, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

double grid_omega(std::size_t m, std::size_t n, double dt) {
    const double k = m < (n + 1) / 2 ? static_cast<double>(m)
                                     : static_cast<double>(m) - static_cast<double>(n);
    return 2.0 * kPi * k / (static_cast<double>(n) * dt);
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Parameters with the coupling held at its on value.
PhysicalParams coupling_on(const PhysicalParams& p) {
    PhysicalParams q = p;
    q.coupling = CouplingSchedule::constant(p.coupling.omega_on);
    return q;
}

struct Medium {
    double d_prime, Gamma_p, chi, v_g, gamma_d;
    cplx nu;
    cplx lambda(double omega) const { return d_prime - chi * nu / cplx(Gamma_p, -omega); }
};

Medium medium(const PhysicalParams& p) {
    const auto dq = derive(coupling_on(p));
    if (dq.coupling_off || !(dq.v_g > 0.0))
        throw std::invalid_argument("storage: coupling must be on with positive group velocity");
    return {dq.d_prime, dq.Gamma_p, dq.chi, dq.v_g, dq.gamma_d, dq.nu};
}

// Linear interpolation of an envelope, zero outside its support.
cplx interpolate(const Envelope& e, double t) {
    if (e.samples.empty()) return {};
    const double x = (t - e.t0) / e.dt;
    if (x < 0.0 || x > static_cast<double>(e.samples.size() - 1)) return {};
    const auto k = static_cast<std::size_t>(std::floor(x));
    if (k + 1 >= e.samples.size()) return e.samples.back();
    const double f = x - static_cast<double>(k);
    return (1.0 - f) * e.samples[k] + f * e.samples[k + 1];
}

// Linear convolution h * sum_j K(x_i - x_j) f_j on a uniform grid, via zero-padded FFT.
std::vector<cplx> sinc_convolve(const std::vector<cplx>& f, double h, double width, int padding) {
    const std::size_t n = f.size();
    const std::size_t m = std::max<std::size_t>(static_cast<std::size_t>(std::max(padding, 4)) * n,
                                                 3 * n);
    std::vector<cplx> a(m), k(m);
    std::copy(f.begin(), f.end(), a.begin());
    // Unit-area kernel (width / pi) sinc(width x), lags -(n-1)..(n-1) wrapped.
    for (std::size_t j = 0; j < n; ++j) {
        const double x = static_cast<double>(j) * h;
        const double v = width / kPi * sinc(width * x) * h;
        k[j] = v;
        if (j > 0) k[m - j] = v;
    }
    dft(a, -1);
    dft(k, -1);
    for (std::size_t i = 0; i < m; ++i) a[i] *= k[i];
    dft(a, +1);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / static_cast<double>(m);
    return out;
}

double uniform_step(const std::vector<double>& x) {
    return x.size() >= 2 ? std::abs(x[1] - x[0]) : 1.0;
}

// Spectrum of the input, E(omega) = int E(t) e^{i omega t} dt, on a padded grid.
struct Spectrum {
    std::vector<double> omega;
    std::vector<cplx> value;
    double domega = 0.0;
};

Spectrum input_spectrum(const Envelope& in, int padding) {
    const std::size_t n = in.samples.size();
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::max(padding, 1)) * n);
    std::vector<cplx> a(m);
    std::copy(in.samples.begin(), in.samples.end(), a.begin());
    dft(a, +1);
    Spectrum s;
    s.omega.resize(m);
    s.value.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        s.omega[i] = grid_omega(i, m, in.dt);
        s.value[i] = a[i] * std::polar(1.0, s.omega[i] * in.t0) * in.dt;
    }
    s.domega = 2.0 * kPi / (static_cast<double>(m) * in.dt);
    return s;
}

bool is_uniform(const std::vector<double>& x) {
    if (x.size() < 3) return true;
    const double h = x[1] - x[0];
    for (std::size_t i = 2; i < x.size(); ++i)
        if (std::abs(x[i] - x[i - 1] - h) > 1e-9 * std::abs(h)) return false;
    return true;
}

// out[j] += a e^{s x_j}, by recurrence on uniform grids.
void geometric_accumulate(cplx a, cplx s, const std::vector<double>& x, std::vector<cplx>& out) {
    if (x.empty()) return;
    if (!is_uniform(x)) {
        for (std::size_t j = 0; j < x.size(); ++j) out[j] += a * std::exp(s * x[j]);
        return;
    }
    const cplx r = std::exp(s * (x.size() > 1 ? x[1] - x[0] : 0.0));
    cplx v = a * std::exp(s * x[0]);
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] += v;
        v *= r;
    }
}

// sum_j e^{s (1 - x_j)} f_j.
cplx geometric_sum(cplx s, const std::vector<double>& x, const std::vector<cplx>& f) {
    cplx acc{};
    if (x.empty()) return acc;
    if (!is_uniform(x)) {
        for (std::size_t j = 0; j < x.size(); ++j) acc += std::exp(s * (1.0 - x[j])) * f[j];
        return acc;
    }
    const cplx r = std::exp(-s * (x.size() > 1 ? x[1] - x[0] : 0.0));
    cplx v = std::exp(s * (1.0 - x[0]));
    for (std::size_t j = 0; j < x.size(); ++j) {
        acc += v * f[j];
        v *= r;
    }
    return acc;
}

}  // namespace

Mode parse_mode(const std::string& s) {
    if (s == "ideal") return Mode::Ideal;
    if (s == "kernel") return Mode::Kernel;
    if (s == "downsampling") return Mode::Downsampling;
    throw std::invalid_argument("unknown storage mode '" + s + "'");
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Ideal: return "ideal";
        case Mode::Kernel: return "kernel";
        case Mode::Downsampling: return "downsampling";
    }
    return "ideal";
}

double Envelope::energy() const {
    double e = 0.0;
    for (const auto& v : samples) e += std::norm(v);
    return e * dt;
}

Envelope sample_pulse(const PulseSpec& pulse, double t_end, double dt) {
    Envelope e;
    e.t0 = 0.0;
    e.dt = dt;
    const auto n = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
    e.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) e.samples[k] = pulse.field(e.time(k));
    return e;
}

double StoredCoherence::norm2() const {
    double s = 0.0;
    for (const auto& v : sigma) s += std::norm(v);
    return s * uniform_step(zeta);
}

double KSpaceCoherence::norm2() const {
    double s = 0.0;
    for (const auto& v : sigma) s += std::norm(v);
    return s * uniform_step(k) / (2.0 * kPi);
}

KSpaceCoherence to_k_space(const StoredCoherence& c) {
    const std::size_t n = c.sigma.size();
    const double h = uniform_step(c.zeta);
    std::vector<cplx> a = c.sigma;
    dft(a, +1);
    KSpaceCoherence r;
    r.k.resize(n);
    r.sigma.resize(n);
    const double z0 = c.zeta.empty() ? 0.0 : c.zeta.front();
    const double sgn = c.zeta.size() >= 2 && c.zeta[1] < c.zeta[0] ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.k[i] = sgn * grid_omega(i, n, h);
        r.sigma[i] = a[i] * std::polar(1.0, r.k[i] * z0) * h;
    }
    return r;
}

StoredCoherence from_k_space(const KSpaceCoherence& k, const StoredCoherence& like) {
    const std::size_t n = k.sigma.size();
    const double h = uniform_step(like.zeta);
    const double z0 = like.zeta.empty() ? 0.0 : like.zeta.front();
    std::vector<cplx> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = k.sigma[i] * std::polar(1.0, -k.k[i] * z0);
    dft(a, -1);
    StoredCoherence r = like;
    for (std::size_t i = 0; i < n; ++i) r.sigma[i] = a[i] / (static_cast<double>(n) * h);
    return r;
}

std::vector<cplx> write_kernel_at(const Envelope& in, const PhysicalParams& p, double t_off,
                                  const std::vector<double>& zeta, const KernelOptions& opt) {
    const Medium m = medium(p);
    const auto sp = input_spectrum(in, opt.padding);
    const double elapsed = t_off - in.t0;
    std::vector<cplx> out(zeta.size());
    for (std::size_t i = 0; i < sp.omega.size(); ++i) {
        const double w = sp.omega[i];
        if (opt.band_half_width > 0.0 && std::abs(w) > opt.band_half_width) continue;
        const cplx den(m.Gamma_p, -w);
        const cplx loading = (1.0 - std::exp(-den * elapsed)) / den;
        const cplx a = sp.domega / (2.0 * kPi) * m.nu * sp.value[i] * std::polar(1.0, -w * t_off) *
                       loading;
        geometric_accumulate(a, -m.lambda(w), zeta, out);
    }
    return out;
}

WriteResult write(const Envelope& in, const PhysicalParams& p, double t_off, Mode mode,
                  const KernelOptions& opt) {
    const Medium m = medium(p);
    WriteResult r;
    r.coherence.time_tag = t_off;
    r.coherence.v_g_at_write = m.v_g;
    const double e_in = in.energy();

    if (mode == Mode::Ideal) {
        // Node j holds the sample that entered at t_k, now at zeta = v_g (t_off - t_k).
        double outside = 0.0;
        for (std::size_t k = in.samples.size(); k-- > 0;) {
            const double t = in.time(k);
            const double z = m.v_g * (t_off - t);
            if (z < -1e-12 || z > 1.0 + 1e-12) {
                outside += std::norm(in.samples[k]) * in.dt;
                continue;
            }
            r.coherence.zeta.push_back(z);
            r.coherence.sigma.push_back(m.nu / m.Gamma_p * in.samples[k]);
        }
        r.truncation_loss = e_in > 0.0 ? outside / e_in : 0.0;
    } else {
        const int nz = std::max(opt.nzeta, 2);
        const double h = 1.0 / nz;
        for (int j = 0; j < nz; ++j) r.coherence.zeta.push_back((j + 0.5) * h);
        if (mode == Mode::Kernel) {
            r.coherence.sigma = write_kernel_at(in, p, t_off, r.coherence.zeta, opt);
        } else {
            std::vector<cplx> f(nz);
            for (int j = 0; j < nz; ++j) f[j] = interpolate(in, t_off - r.coherence.zeta[j] / m.v_g);
            const double dw = opt.delta_omega > 0.0 ? opt.delta_omega
                                                    : 1.0 / (static_cast<double>(in.samples.size()) * in.dt);
            const double width = dw / m.v_g;
            auto g = sinc_convolve(f, h, width, opt.padding);
            for (auto& v : g) v *= m.nu / m.Gamma_p;
            r.coherence.sigma = std::move(g);
        }
        // Input energy that never fits between zeta = 0 and 1.
        double outside = 0.0;
        for (std::size_t k = 0; k < in.samples.size(); ++k) {
            const double z = m.v_g * (t_off - in.time(k));
            if (z < 0.0 || z > 1.0) outside += std::norm(in.samples[k]) * in.dt;
        }
        r.truncation_loss = e_in > 0.0 ? outside / e_in : 0.0;
    }
    if (r.truncation_loss > 1e-3)
        r.warning = "pulse does not fit inside the medium at t_off; truncated energy fraction " +
                    std::to_string(r.truncation_loss);
    return r;
}

StoredCoherence hold(const StoredCoherence& c, double dt_hold, const PhysicalParams& p) {
    if (dt_hold < 0.0) throw std::invalid_argument("hold: negative duration");
    StoredCoherence r = c;
    const double f = std::exp(-p.gamma_d() * dt_hold);
    for (auto& v : r.sigma) v *= f;
    r.time_tag += dt_hold;
    return r;
}

ResidualDecay residual_probe_decay(const PhysicalParams& p) {
    const double pop = 1.0 - 3.0 * p.gammac;
    ResidualDecay r;
    r.tau = 1.0 / (p.optical_depth() * p.light_speed_bar() * pop);
    r.guard = 3.0 * r.tau;
    return r;
}

std::vector<cplx> read_kernel_at(const StoredCoherence& c, const PhysicalParams& p,
                                 const std::vector<double>& times, const KernelOptions& opt) {
    const Medium m = medium(p);
    const double h = uniform_step(c.zeta);
    // Spectral grid wide enough for the stored length and fine enough for the pumping rate.
    const double span = std::max(1.0 / m.v_g, 1.0) * std::max(opt.padding, 2);
    const double dt = h / m.v_g;
    const auto n = static_cast<std::size_t>(std::ceil(span / dt));
    const double domega = 2.0 * kPi / (static_cast<double>(n) * dt);
    std::vector<cplx> out(times.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double w = grid_omega(i, n, dt);
        if (opt.band_half_width > 0.0 && std::abs(w) > opt.band_half_width) continue;
        const cplx acc = geometric_sum(-m.lambda(w), c.zeta, c.sigma);
        const cplx e = m.chi / cplx(m.Gamma_p, -w) * acc * h * domega / (2.0 * kPi);
        for (std::size_t k = 0; k < times.size(); ++k) out[k] += e * std::polar(1.0, -w * times[k]);
    }
    return out;
}

ReadResult read(const StoredCoherence& c, const PhysicalParams& p, Mode mode,
                const KernelOptions& opt, double read_dt, double read_length) {
    const Medium m = medium(p);
    ReadResult r;
    const double amp = m.chi / m.d_prime;
    if (c.sigma.empty()) return r;
    const double h = uniform_step(c.zeta);
    if (mode == Mode::Ideal) {
        // Nodes leave in order of decreasing zeta; spacing h maps to h / v_g.
        std::vector<std::size_t> order(c.sigma.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return c.zeta[a] > c.zeta[b]; });
        r.out.dt = h / m.v_g;
        r.out.t0 = (1.0 - c.zeta[order.front()]) / m.v_g;
        for (auto j : order) r.out.samples.push_back(amp * c.sigma[j]);
        return r;
    }
    if (read_dt <= 0.0) read_dt = h / m.v_g;
    if (read_length <= 0.0) read_length = 1.5 / m.v_g + 20.0 / m.Gamma_p;
    const auto n = static_cast<std::size_t>(std::ceil(read_length / read_dt));
    r.out.dt = read_dt;
    r.out.t0 = 0.0;
    if (mode == Mode::Kernel) {
        std::vector<double> times(n);
        for (std::size_t k = 0; k < n; ++k) times[k] = r.out.time(k);
        r.out.samples = read_kernel_at(c, p, times, opt);
    } else {
        // Downsampling: sinc in time applied to sigma(1 - v_g t) on the read grid.
        std::vector<cplx> f(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double z = 1.0 - m.v_g * r.out.time(k);
            cplx v{};
            if (z >= c.zeta.front() - 0.5 * h && z <= c.zeta.back() + 0.5 * h) {
                const double x = (z - c.zeta.front()) / h;
                const auto j = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0,
                                                                   double(c.sigma.size() - 1)));
                const std::size_t j1 = std::min(j + 1, c.sigma.size() - 1);
                const double fr = std::clamp(x - static_cast<double>(j), 0.0, 1.0);
                v = (1.0 - fr) * c.sigma[j] + fr * c.sigma[j1];
            }
            f[k] = v;
        }
        const double dw = opt.delta_omega > 0.0
                              ? opt.delta_omega
                              : m.v_g / (static_cast<double>(c.sigma.size()) * h);
        auto g = sinc_convolve(f, read_dt, dw, opt.padding);
        for (auto& v : g) v *= amp;
        r.out.samples = std::move(g);
    }
    return r;
}

TransferReport end_to_end(const PhysicalParams& p, double dt_hold, double pulse_duration) {
    const Medium m = medium(p);
    TransferReport r;
    r.hold = dt_hold;
    r.d_prime = m.d_prime;
    r.amplitude_factor =
        m.nu * m.chi / (m.Gamma_p * m.d_prime) * std::exp(-m.gamma_d * dt_hold);
    const double dw = 1.0 / pulse_duration;
    r.margin_fits = dw / m.v_g;
    r.margin_window = m.Gamma_p / dw;
    r.tb_product = m.Gamma_p / m.v_g;
    return r;
}

Pipeline run(const PhysicalParams& p, const PulseSpec& pulse, double t_off, double dt_hold,
             Mode mode, double dt, const KernelOptions& opt) {
    KernelOptions o = opt;
    if (o.delta_omega <= 0.0) o.delta_omega = pulse.bandwidth();
    Pipeline r;
    r.t_off = t_off;
    r.t_on = t_off + dt_hold;
    r.input = sample_pulse(pulse, t_off, dt);
    r.written = write(r.input, p, t_off, mode, o);
    r.held = hold(r.written.coherence, dt_hold, p);
    r.output = read(r.held, p, mode, o, mode == Mode::Ideal ? 0.0 : dt);
    r.report = end_to_end(p, dt_hold, pulse.duration);
    return r;
}

}  // namespace eitmem::storage
