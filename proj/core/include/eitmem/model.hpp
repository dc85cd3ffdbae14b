#pragma once

// Physical parameters, derived quantities and validity checks.
//
// Units: time in 1/gamma, rates in gamma, propagation coordinate zeta = z/L in
// [0, 1].  Lengths given in cm at the configuration boundary only.  The probe
// field is flux normalised so that [a(t), a^dagger(t')] = delta(t - t').

#include <complex>
#include <string>
#include <vector>

namespace eitmem {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLightCmPerS = 2.99792458e10;
// 87Rb D line natural width (2 pi x 6.07 MHz) expressed in s^-1.
inline constexpr double kDefaultGammaPerSecond = 2.0 * kPi * 6.07e6;

double hz_to_gamma(double rate_per_second, double gamma_per_second);
double gamma_to_hz(double rate_gamma, double gamma_per_second);

// Abrupt switching of the coupling field.  With switching disabled the field
// stays at omega_on for all times.
struct CouplingSchedule {
    double omega_on = 0.0;
    double t_off = 0.0;
    double t_on = 0.0;
    bool switching = false;

    double value(double t) const;
    bool is_valid() const;
    static CouplingSchedule constant(double omega);
    static CouplingSchedule storage(double omega, double t_off, double t_on);
    bool operator==(const CouplingSchedule&) const = default;
};

struct PhysicalParams {
    double gamma_per_second = kDefaultGammaPerSecond;  // reference unit
    double gamma0 = 0.0;                               // pure dephasing
    double gammac = 0.0;                               // population exchange
    double g = 0.0;                                    // single-atom coupling, s^-1
    double atom_number = 0.0;                          // N = n A L
    double density = 0.0;                              // cm^-3
    double area = 0.0;                                 // cm^2
    double length = 0.0;                               // cm
    double c_light = kSpeedOfLightCmPerS;              // cm/s
    CouplingSchedule coupling;

    // Builds a parameter set from an optical depth; g is solved for.
    static PhysicalParams from_optical_depth(double d, double density_cm3, double area_cm2,
                                             double length_cm, double omega_c,
                                             double gamma0, double gammac,
                                             double gamma_per_second = kDefaultGammaPerSecond);

    double optical_depth() const;   // d = g^2 N L / (gamma c)
    double coupling_bar() const;    // sqrt(d / N)
    double light_speed_bar() const; // c / (L gamma)
    double gamma_d() const { return gamma0 + gammac; }
    double omega_c(double t = 0.0) const { return coupling.value(t); }

    // Empty string when valid, otherwise the first violated invariant.
    std::string check() const;
    bool operator==(const PhysicalParams&) const = default;
};

struct DerivedQuantities {
    double d = 0.0;
    double d_prime = 0.0;
    double gamma_d = 0.0;
    double Gamma_p = 0.0;
    double chi = 0.0;
    cplx nu{};
    double v_g = 0.0;     // units of L * gamma
    double alpha0 = 0.0;  // per L, amplitude coefficient
    double a_gain = 0.0;  // per L, amplitude coefficient
    double tau = 0.0;     // units of 1/gamma
    double omega_c = 0.0;
    bool coupling_off = false;
};

DerivedQuantities derive(const PhysicalParams& p, double at_time = 0.0);

enum class PulseShape { SuperGaussian, FlatTop };

struct PulseSpec {
    double duration = 50.0;       // T, units of 1/gamma
    double carrier_amp = 0.0;     // flux amplitude of the envelope
    double mod_freq = 0.0;        // omega_m, units of gamma
    double mod_depth_plus = 0.0;  // amplitude-quadrature sideband depth
    double mod_depth_minus = 0.0; // phase-quadrature sideband depth
    PulseShape shape = PulseShape::SuperGaussian;
    int order = 4;                // super-Gaussian order
    double center = 50.0;         // envelope centre time

    double bandwidth() const { return 1.0 / duration; }
    double envelope(double t) const;
    // Complex probe amplitude injected at zeta = 0.
    cplx field(double t) const;
    // Cycles of the sideband modulation inside the pulse length.
    double modulation_cycles() const { return mod_freq * duration / (2.0 * kPi); }
    bool operator==(const PulseSpec&) const = default;
};

struct ValidityItem {
    std::string name;
    double margin = 0.0;  // ratio that has to exceed the threshold
    bool passed = false;
    bool advisory = false;  // reported but not part of the overall verdict
};

struct ValidityReport {
    double margin_factor = 10.0;
    std::vector<ValidityItem> items;
    bool all_passed() const;
    const ValidityItem* find(const std::string& name) const;
};

ValidityReport validate(const PhysicalParams& p, const PulseSpec& pulse,
                        double margin_factor = 10.0);

}  // namespace eitmem
