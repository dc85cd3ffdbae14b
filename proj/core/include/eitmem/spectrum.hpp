#pragma once

// Quadrature spectra from windowed Fourier transforms of c-number fields.

#include <vector>

#include "eitmem/model.hpp"

namespace eitmem::spectrum {

// Windowed transforms of one record: X(+w) and X(-w) for both quadratures.
struct Transforms {
    std::vector<cplx> xp_pos, xp_neg, xm_pos, xm_neg;
    void resize(std::size_t n);
};

struct PlaneSpectrum {
    double z = 0.0;
    double window = 0.0;
    std::vector<double> omega;
    std::vector<double> S_plus, S_minus;    // symmetric spectra, shot noise = 1
    std::vector<double> V_plus, V_minus;    // noise floor (coherent part removed)
    std::vector<double> se_plus, se_minus;  // standard errors of S
    std::vector<double> se_V_plus, se_V_minus;  // standard errors of V
    std::vector<double> signal_plus, signal_minus;  // 4 alpha^2
    std::vector<double> alpha_plus, alpha_minus;
    long samples = 0;
};

// Accumulates independent records in a fixed order.
class Estimator {
public:
    Estimator(std::vector<double> omega, double window, double z = 0.0);
    void add(const Transforms& t);
    PlaneSpectrum finish() const;

private:
    std::vector<double> omega_;
    double window_, z_;
    long n_ = 0;
    std::vector<double> sp_, sp2_, sm_, sm2_;
    std::vector<cplx> mp_pos_, mp_neg_, mm_pos_, mm_neg_;
    std::vector<Transforms> records_;
};

// Transforms of a deterministic record alpha(t), beta(t) sampled at t0 + k dt.
Transforms transform_record(const std::vector<cplx>& alpha, const std::vector<cplx>& beta,
                            double t0, double dt, const std::vector<double>& omega);

}  // namespace eitmem::spectrum
