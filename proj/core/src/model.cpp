#include "eitmem/model.hpp"

#include <cmath>
#include <limits>

namespace eitmem {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio(double num, double den) {
    if (den == 0.0) return num > 0.0 ? kInf : 0.0;
    return num / den;
}
}  // namespace

double hz_to_gamma(double rate_per_second, double gamma_per_second) {
    return rate_per_second / gamma_per_second;
}

double gamma_to_hz(double rate_gamma, double gamma_per_second) {
    return rate_gamma * gamma_per_second;
}

double CouplingSchedule::value(double t) const {
    if (!switching) return omega_on;
    return (t < t_off || t >= t_on) ? omega_on : 0.0;
}

bool CouplingSchedule::is_valid() const {
    if (!(omega_on >= 0.0)) return false;
    if (!switching) return true;
    return t_off >= 0.0 && t_on > t_off;
}

CouplingSchedule CouplingSchedule::constant(double omega) {
    CouplingSchedule s;
    s.omega_on = omega;
    return s;
}

CouplingSchedule CouplingSchedule::storage(double omega, double t_off, double t_on) {
    CouplingSchedule s;
    s.omega_on = omega;
    s.t_off = t_off;
    s.t_on = t_on;
    s.switching = true;
    return s;
}

PhysicalParams PhysicalParams::from_optical_depth(double d, double density_cm3, double area_cm2,
                                                  double length_cm, double omega_c,
                                                  double gamma0, double gammac,
                                                  double gamma_per_second) {
    PhysicalParams p;
    p.gamma_per_second = gamma_per_second;
    p.gamma0 = gamma0;
    p.gammac = gammac;
    p.density = density_cm3;
    p.area = area_cm2;
    p.length = length_cm;
    p.atom_number = density_cm3 * area_cm2 * length_cm;
    p.g = std::sqrt(d * gamma_per_second * p.c_light / (p.atom_number * length_cm));
    p.coupling = CouplingSchedule::constant(omega_c);
    return p;
}

double PhysicalParams::optical_depth() const {
    return g * g * atom_number * length / (gamma_per_second * c_light);
}

double PhysicalParams::coupling_bar() const { return std::sqrt(optical_depth() / atom_number); }

double PhysicalParams::light_speed_bar() const { return c_light / (length * gamma_per_second); }

std::string PhysicalParams::check() const {
    if (!(gamma_per_second > 0.0)) return "gamma must be positive";
    if (!(gamma0 >= 0.0)) return "gamma0 must be non-negative";
    if (!(gammac >= 0.0)) return "gammac must be non-negative";
    if (!(length > 0.0)) return "length must be positive";
    if (!(atom_number > 0.0)) return "atom number must be positive";
    if (!(c_light > 0.0)) return "speed of light must be positive";
    if (!(g >= 0.0)) return "coupling g must be non-negative";
    if (!coupling.is_valid()) return "coupling schedule invalid (need omega >= 0, t_on > t_off >= 0)";
    const double nal = density * area * length;
    if (std::abs(atom_number - nal) > 1e-12 * atom_number) return "N != n A L";
    return {};
}

DerivedQuantities derive(const PhysicalParams& p, double at_time) {
    DerivedQuantities q;
    q.d = p.optical_depth();
    q.gamma_d = p.gamma_d();
    const double gc = p.gammac;
    const double pop = 1.0 - 3.0 * gc;           // sigma11 - sigma33
    const double qq = 1.0 + 0.5 * q.gamma_d;     // optical coherence decay
    const double om = p.omega_c(at_time);
    const double gbar = p.coupling_bar();
    q.omega_c = om;
    q.d_prime = q.d * pop / qq;
    q.tau = 1.0 / (q.d * p.light_speed_bar() * pop);
    if (om <= 0.0) {
        q.coupling_off = true;
        q.Gamma_p = q.gamma_d;
        return q;
    }
    const double om2 = om * om;
    q.Gamma_p = q.gamma_d + om2 / qq;
    q.chi = -p.atom_number * gbar * om / qq;
    // sigma32 = -i gammac / Omega, so -i gbar sigma32 = -gbar gammac / Omega.
    q.nu = cplx(-gbar * (gc / om + om * pop / qq), 0.0);
    const double n0 = q.gamma_d * pop - gc;
    q.v_g = om2 * om2 / (q.d * (pop * om2 - qq * n0));
    q.alpha0 = q.d * p.gamma0 / om2;
    q.a_gain = q.d * gc / om2;
    return q;
}

double PulseSpec::envelope(double t) const {
    const double x = (t - center) / (0.5 * duration);
    if (shape == PulseShape::FlatTop) return std::abs(x) <= 1.0 ? 1.0 : 0.0;
    const double ax = std::abs(x);
    if (ax > 4.0) return 0.0;
    return std::exp(-std::log(2.0) * std::pow(ax, 2 * order));
}

cplx PulseSpec::field(double t) const {
    const double env = envelope(t);
    if (env == 0.0) return {};
    const double m = std::cos(mod_freq * (t - center));
    return env * cplx(carrier_amp + mod_depth_plus * m, mod_depth_minus * m);
}

bool ValidityReport::all_passed() const {
    for (const auto& it : items)
        if (!it.advisory && !it.passed) return false;
    return true;
}

const ValidityItem* ValidityReport::find(const std::string& name) const {
    for (const auto& it : items)
        if (it.name == name) return &it;
    return nullptr;
}

ValidityReport validate(const PhysicalParams& p, const PulseSpec& pulse, double margin_factor) {
    ValidityReport r;
    r.margin_factor = margin_factor;
    const auto dq = derive(p, 0.0);
    const double om2 = dq.omega_c * dq.omega_c;
    const double thr = margin_factor * (1.0 - 1e-12);
    auto add = [&](const char* name, double margin, double threshold, bool advisory = false) {
        r.items.push_back({name, margin, margin >= threshold, advisory});
    };
    add("coupling_vs_dephasing", ratio(om2, p.gamma0), thr);
    add("coupling_vs_exchange", ratio(om2, p.gammac), thr);
    add("pump_depletion", ratio(ratio(om2, p.gammac), 2.0 * dq.d), thr);
    const double dw = pulse.bandwidth();
    add("pulse_fits_medium", ratio(dw, dq.v_g), thr);
    add("pulse_within_window", ratio(dq.Gamma_p, dw), thr);
    add("decoherence_during_pulse", ratio(1.0, dq.gamma_d * pulse.duration), thr);
    add("noise_factor_positive", ratio(2.0 + p.gamma0, 3.0 * p.gammac), 1.0 + 1e-15);
    const double nal = p.density * p.area * p.length;
    const double rel = std::abs(p.atom_number - nal) / p.atom_number;
    add("atom_number_consistency", ratio(1e-12, rel), 1.0);
    add("modulation_above_fourier_width", pulse.mod_freq * pulse.duration, 1.0, true);
    return r;
}

}  // namespace eitmem
