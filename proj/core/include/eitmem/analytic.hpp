#pragma once

// Linearised Heisenberg-Langevin solutions of the EIT medium.

#include "eitmem/model.hpp"

namespace eitmem::analytic {

struct SteadyStates {
    double s11 = 1.0, s22 = 0.0, s33 = 0.0;
    cplx s12{}, s13{}, s23{}, s32{};
};

// First-order steady states; probe is the mean flux amplitude <E>.
SteadyStates steady_states(const PhysicalParams& p, cplx probe = {}, double t = 0.0);

struct Susceptibility {
    cplx lambda{};
    cplx mu{};
    double group_velocity = 0.0;  // units of L * gamma
};

Susceptibility susceptibility(const PhysicalParams& p, double omega, double t = 0.0);

// Langevin correlation coefficients, in units of gamma / (n A).
struct LangevinTable {
    double f13_f13d = 0.0;  // <F13 F13^dagger>
    double f13d_f13 = 0.0;  // <F13^dagger F13>
    cplx f13d_f12{};        // <F13^dagger F12>
    cplx f12d_f13{};        // <F12^dagger F13>
    double f12_f12d = 0.0;  // <F12 F12^dagger>
    double f12d_f12 = 0.0;  // <F12^dagger F12>

    double commutator13() const { return f13_f13d - f13d_f13; }
    double commutator12() const { return f12_f12d - f12d_f12; }
};

LangevinTable langevin_table(const PhysicalParams& p, const SteadyStates& s);
// Same rows truncated to first order in gamma0 and gammac.
LangevinTable langevin_table_first_order(const PhysicalParams& p);

struct FdtResult {
    double residual = 0.0;        // first-order consistent residual
    double residual_exact = 0.0;  // both sides with exact steady-state rows
    double lhs = 0.0;             // 2 Re Lambda
    double rhs = 0.0;             // d (Omega^2 C12 + omega^2 C13) / |mu|^2
};

FdtResult fdt_check(const PhysicalParams& p, double omega);

struct ChannelPoint {
    double eta = 1.0;
    double noise = 0.0;  // V_noise
    double nf = 0.0;     // N_f
};

struct DelayResult {
    double S = 1.0;
    ChannelPoint channel;
    bool dc_limit = false;
};

// z in units of L.
DelayResult delay_spectrum(const PhysicalParams& p, double z, double omega, double s_in);
double noise_factor(const PhysicalParams& p, double omega);

// Power gain and loss coefficients (per L) of the medium close to omega = 0.
struct DcCoefficients {
    double gain = 0.0;
    double loss = 0.0;
};
DcCoefficients dc_coefficients(const PhysicalParams& p);
double dc_noise(const PhysicalParams& p, double z);

struct PumpDepletion {
    double omega_sq_0 = 0.0;
    double omega_sq_z = 0.0;
    double margin = 0.0;  // (Omega^2 / gammac) / (2 d)
};
PumpDepletion pump_depletion(const PhysicalParams& p, double z);

// Power-gain a and power-loss alpha per unit length; m = 0 selects the continuum.
double amp_chain(double a, double alpha, double z, double s_in, long m = 0);
ChannelPoint amp_chain_channel(double a, double alpha, double z);

double snr(double alpha_amp, double variance);

}  // namespace eitmem::analytic
