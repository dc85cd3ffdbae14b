#pragma once

// Write, hold and read of a probe envelope through the collective ground-state
// coherence, in the linear adiabatic regime.
//
// Coordinates: zeta = z / L in [0, 1], time in 1/gamma.  The input envelope is
// sampled on t_k = k dt, k = 0..n-1, with the coupling switched off at t_off.

#include <string>
#include <vector>

#include "eitmem/model.hpp"

namespace eitmem::storage {

enum class Mode { Ideal, Kernel, Downsampling };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

struct Envelope {
    double t0 = 0.0;  // time of the first sample
    double dt = 0.1;
    std::vector<cplx> samples;

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double energy() const;
};

Envelope sample_pulse(const PulseSpec& pulse, double t_end, double dt);

struct StoredCoherence {
    std::vector<double> zeta;
    std::vector<cplx> sigma;  // sigma12
    double time_tag = 0.0;
    double v_g_at_write = 0.0;

    // sum |sigma|^2 dzeta with the uniform spacing of zeta.
    double norm2() const;
};

// Spatial Fourier representation sigma(k) = int sigma(zeta) e^{i k zeta} dzeta on
// the DFT grid of a uniform zeta sampling.
struct KSpaceCoherence {
    std::vector<double> k;
    std::vector<cplx> sigma;
    double norm2() const;  // sum |sigma(k)|^2 dk / (2 pi)
};
KSpaceCoherence to_k_space(const StoredCoherence& c);
StoredCoherence from_k_space(const KSpaceCoherence& k, const StoredCoherence& like);

struct KernelOptions {
    int padding = 4;            // zero padding factor of the spectral grid
    double band_half_width = 0; // 0 integrates the full sampled band
    int nzeta = 400;            // zeta nodes for kernel and downsampling writes
    double delta_omega = 0;     // downsampling bandwidth; 0 uses the record length
    bool operator==(const KernelOptions&) const = default;
};

struct WriteResult {
    StoredCoherence coherence;
    double truncation_loss = 0.0;  // input energy fraction outside the medium
    std::string warning;
};

WriteResult write(const Envelope& in, const PhysicalParams& p, double t_off, Mode mode,
                  const KernelOptions& opt = {});

StoredCoherence hold(const StoredCoherence& c, double dt_hold, const PhysicalParams& p);

struct ResidualDecay {
    double tau = 0.0;
    double guard = 0.0;  // 3 tau
};
ResidualDecay residual_probe_decay(const PhysicalParams& p);

struct ReadResult {
    Envelope out;  // output at zeta = 1, times measured from t_on
    double truncation_loss = 0.0;
    std::string warning;
};

// Ideal mode returns one output sample per stored node, spaced by dzeta / v_g.
ReadResult read(const StoredCoherence& c, const PhysicalParams& p, Mode mode,
                const KernelOptions& opt = {}, double read_dt = 0.0, double read_length = 0.0);

// Kernel-mode output evaluated at arbitrary times after t_on.
std::vector<cplx> read_kernel_at(const StoredCoherence& c, const PhysicalParams& p,
                                 const std::vector<double>& times, const KernelOptions& opt = {});

// Kernel-mode coherence evaluated at arbitrary zeta.
std::vector<cplx> write_kernel_at(const Envelope& in, const PhysicalParams& p, double t_off,
                                  const std::vector<double>& zeta, const KernelOptions& opt = {});

struct TransferReport {
    cplx amplitude_factor{};
    double margin_fits = 0.0;    // delta_omega / (v_g / L)
    double margin_window = 0.0;  // Gamma_p / delta_omega
    double tb_product = 0.0;     // Gamma_p L / v_g
    double d_prime = 0.0;
    double hold = 0.0;
};

TransferReport end_to_end(const PhysicalParams& p, double dt_hold, double pulse_duration);

// Full pipeline on a sampled envelope.
struct Pipeline {
    Envelope input;
    WriteResult written;
    StoredCoherence held;
    ReadResult output;
    TransferReport report;
    double t_off = 0.0, t_on = 0.0;
};

Pipeline run(const PhysicalParams& p, const PulseSpec& pulse, double t_off, double dt_hold,
             Mode mode, double dt = 0.1, const KernelOptions& opt = {});

}  // namespace eitmem::storage
