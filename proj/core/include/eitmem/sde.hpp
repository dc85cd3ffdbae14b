#pragma once

// Positive-P stochastic integration of the three-level medium coupled to the
// co-moving Maxwell equations.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/model.hpp"
#include "eitmem/spectrum.hpp"

namespace eitmem::sde {

// Full: the complete 18-noise set.  Linearized: the normally ordered Langevin
// correlations of the dipole and ground coherence only, one independent
// complex pair per nonzero entry.
enum class NoiseModel { Full, Linearized };

struct GridSpec {
    int nz = 50;
    double dt = 0.2;
    double t_total = 1000.0;
    long n_traj = 500;
    std::uint64_t seed = 1;
    double overflow_guard = 1e6;
    double max_diverged = 0.01;
    bool noise = true;
    NoiseModel noise_model = NoiseModel::Full;
    int threads = 0;  // 0 selects hardware concurrency

    long nt() const;
    double dz() const { return 1.0 / nz; }
    std::string check() const;
    bool operator==(const GridSpec&) const = default;
};

struct ReadoutSpec {
    std::vector<double> planes{1.0};  // zeta of the detection planes
    std::vector<double> omegas;       // analysis frequencies
    double window_start = 0.0;        // output window [start, start + length)
    double window_length = 500.0;
    double input_window_start = 0.0;  // reference window for the injected field
    int grid_z_stride = 0;            // 0 disables the (z, t) mean-field grid
    int grid_t_stride = 0;
    bool operator==(const ReadoutSpec&) const = default;
};

// One slice of atomic c-numbers: sigma3..sigma7 and sigma9..sigma11.
struct Atoms {
    cplx s3{}, s4{}, s5{}, s6{1.0, 0.0}, s7{}, s9{}, s10{}, s11{};
};

inline constexpr int kNoises = 18;
using NoiseVector = std::array<double, kNoises>;
using NoiseMatrix = std::array<std::array<cplx, kNoises>, 8>;

struct TrajectoryState {
    std::vector<cplx> alpha, beta;  // nz + 1 nodes; alpha pairs with sigma3
    std::vector<Atoms> atoms;       // nz slices
    double t = 0.0;
    bool diverged = false;

    cplx sigma8(int j) const { return 1.0 - atoms[j].s6 - atoms[j].s7; }
};

// Slice constants for a given coupling value.
struct SliceCoefficients {
    double gamma0 = 0.0, gammac = 0.0, Gamma = 1.0, gd = 0.0, gm = 0.0;
    double E = 0.0;       // Omega_c / gamma
    double G = 0.0;       // normalised single-atom coupling
    double h = 0.0;       // sqrt(G / 2)
    double gc_root = 0.0; // gammac / sqrt(2 G)
    double E_over_G = 0.0;
};

SliceCoefficients slice_coefficients(const PhysicalParams& p, double omega_c);

// Drift and the noise increment B * n for one slice.  Fields are the flux
// normalised amplitudes; Rabi variables are alpha_R = i G alpha, beta_R = -i G beta.
void atomic_drift(const Atoms& x, cplx alpha, cplx beta, const SliceCoefficients& c, Atoms& drift);
void atomic_noise(const Atoms& x, cplx alpha, cplx beta, const SliceCoefficients& c,
                  const double* n, Atoms& out);

inline constexpr int kLinearNoises = 8;

// Increments from the linearized correlation table; n holds kLinearNoises values.
void linearized_noise(const Atoms& x, const SliceCoefficients& c, const double* n, Atoms& out);

struct DriftDiffusion {
    std::array<cplx, 8> drift{};
    NoiseMatrix noise{};  // rows: s3, s4, s5, s6, s7, s9, s10, s11
};

DriftDiffusion drift_and_diffusion(const Atoms& x, cplx alpha, cplx beta,
                                   const PhysicalParams& p, double t);

TrajectoryState init_trajectory(const PhysicalParams& p, const GridSpec& grid, const PulseSpec& pulse,
                                bool signal_on = true);

// Counter-keyed generator stream of one trajectory.
class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, std::uint64_t index);
    ~NormalStream();
    NormalStream(const NormalStream&) = delete;
    NormalStream& operator=(const NormalStream&) = delete;
    void fill(double* out, int n);

private:
    struct Impl;
    Impl* impl_;
};

// Advances the state by one dt.  rng may be null for deterministic runs.
void step(TrajectoryState& s, const PhysicalParams& p, const GridSpec& grid, const PulseSpec& pulse,
          bool signal_on, NormalStream* rng);

struct EnsembleResult {
    std::vector<spectrum::PlaneSpectrum> spectra;  // one per plane
    spectrum::PlaneSpectrum input;                 // injected field, deterministic
    // Mean quadratures on the decimated grid, row-major [t][z].
    std::vector<double> grid_z, grid_t;
    std::vector<double> mean_Xplus, mean_Xminus;
    long diverged_count = 0;
    long traj_used = 0;
    double wall_seconds = 0.0;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long diverged, long total)
        : std::runtime_error(what), diverged(diverged), total(total) {}
    long diverged, total;
};

EnsembleResult run_ensemble(const PhysicalParams& p, const GridSpec& grid, const PulseSpec& pulse,
                            const ReadoutSpec& readout, bool signal_on = true);

// Write, hold and read with the given schedule replacing the coupling of p.
EnsembleResult storage_protocol(const PhysicalParams& p, const GridSpec& grid,
                                const PulseSpec& pulse, const CouplingSchedule& schedule,
                                const ReadoutSpec& readout, bool signal_on = true);

}  // namespace eitmem::sde
