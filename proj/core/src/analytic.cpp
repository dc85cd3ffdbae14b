#include "eitmem/analytic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eitmem::analytic {

namespace {

// Rescales the decoherence rates by eps and omega by sqrt(eps).
PhysicalParams scaled(const PhysicalParams& p, double eps) {
    PhysicalParams q = p;
    q.gamma0 = p.gamma0 * eps;
    q.gammac = p.gammac * eps;
    return q;
}

// f'(0) of a polynomial of degree <= 3 sampled at 0, 1, 2, 3.
double slope_cubic(const double f[4]) {
    return (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / 6.0;
}

// f(0) + f'(0) of a polynomial of degree <= 2 sampled at 0, 1, 2.
double first_order_quadratic(double f0, double f1, double f2) {
    return f0 + (-3.0 * f0 + 4.0 * f1 - f2) / 2.0;
}

}  // namespace

SteadyStates steady_states(const PhysicalParams& p, cplx probe, double t) {
    SteadyStates s;
    const double gc = p.gammac;
    s.s11 = 1.0 - 2.0 * gc;
    s.s22 = gc;
    s.s33 = gc;
    const double om = p.omega_c(t);
    if (om <= 0.0) return s;
    const double gbar = p.coupling_bar();
    s.s12 = -gbar * probe / om;
    s.s13 = cplx(0.0, 1.0) * gbar * p.gamma0 * probe / (om * om);
    s.s23 = cplx(0.0, gc / om);
    s.s32 = std::conj(s.s23);
    return s;
}

Susceptibility susceptibility(const PhysicalParams& p, double omega, double t) {
    const auto s = steady_states(p, {}, t);
    const double d = p.optical_depth();
    const double om = p.omega_c(t);
    const double gd = p.gamma_d();
    const double q = 1.0 + 0.5 * gd;
    const double pop = s.s11 - s.s33;
    const cplx I(0.0, 1.0);
    Susceptibility r;
    r.mu = cplx(om * om, -omega * q);
    r.lambda = d * ((gd - I * omega) * pop - I * s.s32 * om) / r.mu;
    if (omega == 0.0) {
        // Small-omega limit of -omega / Im Lambda.
        const double n0 = std::real(gd * pop - I * s.s32 * om);
        const double den = d * (pop * om * om - q * n0);
        r.group_velocity = den != 0.0 ? std::pow(om, 4) / den
                                      : std::numeric_limits<double>::infinity();
    } else {
        r.group_velocity = -omega / r.lambda.imag();
    }
    return r;
}

LangevinTable langevin_table(const PhysicalParams& p, const SteadyStates& s) {
    const double g0 = p.gamma0, gc = p.gammac;
    LangevinTable t;
    t.f13_f13d = (1.0 + gc + g0) * s.s33 + 2.0 * s.s11 - gc * (s.s11 - s.s22);
    t.f13d_f13 = 2.0 * s.s33 - 2.0 * (1.0 + g0 + gc) * s.s33;
    t.f13d_f12 = (gc + g0) * s.s32;
    t.f12d_f13 = (gc + g0) * s.s23;
    t.f12_f12d = (1.0 + gc + g0) * s.s33 + gc * (s.s22 + s.s11) + 2.0 * g0 * s.s11;
    t.f12d_f12 = s.s33 + gc * (s.s22 + s.s11) + 2.0 * g0 * s.s22;
    return t;
}

LangevinTable langevin_table_first_order(const PhysicalParams& p) {
    // Every row is a polynomial of degree <= 2 in a common scale of the rates.
    LangevinTable r[3];
    for (int k = 0; k < 3; ++k) {
        const auto q = scaled(p, k);
        r[k] = langevin_table(q, steady_states(q));
    }
    auto fo = [](double a, double b, double c) { return first_order_quadratic(a, b, c); };
    LangevinTable t;
    t.f13_f13d = fo(r[0].f13_f13d, r[1].f13_f13d, r[2].f13_f13d);
    t.f13d_f13 = fo(r[0].f13d_f13, r[1].f13d_f13, r[2].f13d_f13);
    t.f12_f12d = fo(r[0].f12_f12d, r[1].f12_f12d, r[2].f12_f12d);
    t.f12d_f12 = fo(r[0].f12d_f12, r[1].f12d_f12, r[2].f12d_f12);
    t.f13d_f12 = cplx(fo(r[0].f13d_f12.real(), r[1].f13d_f12.real(), r[2].f13d_f12.real()),
                      fo(r[0].f13d_f12.imag(), r[1].f13d_f12.imag(), r[2].f13d_f12.imag()));
    t.f12d_f13 = cplx(fo(r[0].f12d_f13.real(), r[1].f12d_f13.real(), r[2].f12d_f13.real()),
                      fo(r[0].f12d_f13.imag(), r[1].f12d_f13.imag(), r[2].f12d_f13.imag()));
    return t;
}

FdtResult fdt_check(const PhysicalParams& p, double omega) {
    const double d = p.optical_depth();
    const double om2 = p.omega_c() * p.omega_c();
    FdtResult r;
    {
        const auto sus = susceptibility(p, omega);
        const auto lt = langevin_table(p, steady_states(p));
        const double m2 = std::norm(sus.mu);
        r.lhs = 2.0 * sus.lambda.real();
        r.rhs = d * (om2 * lt.commutator12() + omega * omega * lt.commutator13()) / m2;
        const double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
        r.residual_exact = scale > 0.0 ? std::abs(r.lhs - r.rhs) / scale : 0.0;
    }
    // Scaling gamma0, gammac by eps and omega^2 by eps turns both sides, multiplied
    // by |mu|^2, into cubic polynomials in eps; compare their linear coefficients.
    double fl[4], fr[4];
    for (int k = 0; k < 4; ++k) {
        const auto q = scaled(p, k);
        const double w = omega * std::sqrt(static_cast<double>(k));
        const auto sus = susceptibility(q, w);
        const auto lt = langevin_table(q, steady_states(q));
        const double m2 = std::norm(sus.mu);
        fl[k] = 2.0 * sus.lambda.real() * m2;
        fr[k] = d * (om2 * lt.commutator12() + w * w * lt.commutator13());
    }
    const double l1 = slope_cubic(fl), r1 = slope_cubic(fr);
    const double scale = std::max(std::abs(l1), std::abs(r1));
    r.residual = scale > 0.0 ? std::abs(l1 - r1) / scale : 0.0;
    return r;
}

double noise_factor(const PhysicalParams& p, double omega) {
    const double om2 = p.omega_c() * p.omega_c();
    const double num = 4.0 * p.gammac * om2;
    const double den = 2.0 * p.gamma0 * om2 + omega * omega * (2.0 + p.gamma0 - 3.0 * p.gammac);
    if (num == 0.0) return 0.0;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

DelayResult delay_spectrum(const PhysicalParams& p, double z, double omega, double s_in) {
    if (s_in < 0.0) throw std::invalid_argument("delay_spectrum: s_in must be non-negative");
    DelayResult r;
    const auto sus = susceptibility(p, omega);
    r.channel.eta = std::exp(-2.0 * sus.lambda.real() * z);
    if (p.gamma0 == 0.0 && omega == 0.0 && p.gammac > 0.0) {
        r.dc_limit = true;
        r.channel.nf = std::numeric_limits<double>::infinity();
        r.channel.noise = dc_noise(p, z);
        r.S = r.channel.eta * s_in + r.channel.noise;
        return r;
    }
    r.channel.nf = noise_factor(p, omega);
    r.channel.noise = (1.0 - r.channel.eta) * r.channel.nf;
    r.S = r.channel.eta * s_in + (1.0 - r.channel.eta) + r.channel.noise;
    return r;
}

DcCoefficients dc_coefficients(const PhysicalParams& p) {
    const auto dq = derive(p);
    // Amplitude coefficients a = alpha_c and alpha_0 doubled to power coefficients.
    return {2.0 * dq.a_gain, 2.0 * (dq.alpha0 + dq.a_gain)};
}

double dc_noise(const PhysicalParams& p, double z) {
    if (p.gammac == 0.0) return 0.0;
    const auto c = dc_coefficients(p);
    if (p.gamma0 == 0.0) return 2.0 * c.gain * z;
    return 2.0 * (p.gammac / p.gamma0) * (1.0 - std::exp((c.gain - c.loss) * z));
}

PumpDepletion pump_depletion(const PhysicalParams& p, double z) {
    PumpDepletion r;
    const double om = p.omega_c();
    const double d = p.optical_depth();
    r.omega_sq_0 = om * om;
    r.omega_sq_z = om * om + 2.0 * d * p.gammac * z;
    r.margin = p.gammac > 0.0 ? (om * om / p.gammac) / (2.0 * d)
                              : std::numeric_limits<double>::infinity();
    return r;
}

double amp_chain(double a, double alpha, double z, double s_in, long m) {
    if (a < 0.0 || alpha < 0.0) throw std::invalid_argument("amp_chain: negative coefficient");
    if (m <= 0) {
        if (a == alpha) return s_in + 2.0 * a * z;
        const double eta = std::exp((a - alpha) * z);
        return eta * s_in + (1.0 - eta) * (1.0 + 2.0 * a / (alpha - a));
    }
    const double dz = z / static_cast<double>(m);
    const double r = 1.0 + (a - alpha) * dz;
    // Horner form of sum_{j=1}^{m} r^{m-j}, slice by slice.
    double sum = 0.0, rm = 1.0;
    for (long j = 0; j < m; ++j) {
        sum = sum * r + 1.0;
        rm *= r;
    }
    return rm * (s_in - 1.0) + 1.0 + 2.0 * a * dz * sum;
}

ChannelPoint amp_chain_channel(double a, double alpha, double z) {
    ChannelPoint c;
    if (a == alpha) {
        c.eta = 1.0;
        c.noise = 2.0 * a * z;
        c.nf = std::numeric_limits<double>::infinity();
        return c;
    }
    c.eta = std::exp((a - alpha) * z);
    c.nf = 2.0 * a / (alpha - a);
    c.noise = (1.0 - c.eta) * c.nf;
    return c;
}

double snr(double alpha_amp, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("snr: variance must be positive");
    return 4.0 * alpha_amp * alpha_amp / variance;
}

}  // namespace eitmem::analytic
