#pragma once

// Quantum-information figures of merit for a memory channel: Gaussian
// fidelity, signal transfer and conditional variance (T, V), limit curves and
// region maps.  Quadrature variances are in shot-noise units; a coherent
// amplitude alpha gives a quadrature mean of 2 alpha.

#include <optional>
#include <string>
#include <vector>

#include "eitmem/model.hpp"

namespace eitmem::qbench {

struct GaussianState {
    double alpha_plus = 0.0, alpha_minus = 0.0;
    double S_plus = 1.0, S_minus = 1.0;

    bool uncertainty_ok() const { return S_plus * S_minus >= 1.0 - 1e-12; }
};

enum class Region { Classical, A, B, C, D };
std::string to_string(Region r);

struct TVPoint {
    double T = 0.0;
    double V = 0.0;
    double eta = 0.0, v_noise = 0.0;  // generating channel, when known
};

// Closed form for a coherent input through gain g and added noise V_noise.
double fidelity(double alpha_plus, double alpha_minus, double gain_plus, double gain_minus,
                double v_noise_plus, double v_noise_minus);
inline double fidelity(double alpha, double gain, double v_noise) {
    return fidelity(alpha, alpha, gain, gain, v_noise, v_noise);
}

struct OverlapOptions {
    double tolerance = 1e-11;
    double extent = 12.0;  // integration half-width in standard deviations
};

// Numerical Wigner-function overlap 4 pi int W_in W_out.
double fidelity_overlap(const GaussianState& in, const GaussianState& out,
                        const OverlapOptions& opt = {});

// Output state of a coherent input through the channel (gain, V_noise).
GaussianState channel_output(const GaussianState& in, double gain_plus, double gain_minus,
                             double v_noise_plus, double v_noise_minus);

// Correlations default to sqrt(eta) V_in with eta from the amplitude ratio.
TVPoint tv_metrics(const GaussianState& in, const GaussianState& out,
                   std::optional<double> corr_plus = std::nullopt,
                   std::optional<double> corr_minus = std::nullopt);
TVPoint tv_channel(double eta, double v_noise);

enum class Curve { Classical, PassiveLoss, Amplifier, UnityGain };
Curve parse_curve(const std::string& s);
TVPoint curve_point(Curve c, double parameter);
std::vector<TVPoint> limit_curve(Curve c, double from, double to, int n);

Region classify(const TVPoint& p);
bool is_classical(const TVPoint& p);

enum class Plane { LossNoise, GainLoss };
Plane parse_plane(const std::string& s);

struct GridSpec2 {
    double x_min = 0.0, x_max = 1.0;  // eta, or gain per unit length
    double y_min = 0.0, y_max = 2.0;  // V_noise, or loss per unit length
    int nx = 101, ny = 101;
    double z = 1.0;                   // medium length for the gain-loss plane
    bool operator==(const GridSpec2&) const = default;
};

struct RegionCell {
    double x = 0.0, y = 0.0;
    TVPoint tv;
    Region region = Region::Classical;
};

struct BoundaryPoint {
    double x = 0.0, y = 0.0;
    Region from = Region::Classical, to = Region::Classical;
};

struct RegionMap {
    Plane plane = Plane::LossNoise;
    GridSpec2 grid;
    std::vector<RegionCell> cells;  // row-major, y outer
    std::vector<BoundaryPoint> boundary;
};

RegionMap regime_map(Plane plane, const GridSpec2& grid);

enum class SweepRate { Gamma0, GammaC };

struct TrajectoryPoint {
    double rate = 0.0;
    TVPoint tv;
    Region region = Region::Classical;
};

struct TVTrajectory {
    std::vector<TrajectoryPoint> points;
    bool T_non_increasing = true;
};

// Analytic memory channel at omega: delay-line transmission and noise plus
// ground-state decay during the hold.
TVPoint memory_channel(const PhysicalParams& p, double omega, double hold);

TVTrajectory tv_trajectory(const PhysicalParams& base, SweepRate which,
                           const std::vector<double>& rates, double omega, double hold);

}  // namespace eitmem::qbench
