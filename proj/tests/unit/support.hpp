#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "eitmem/model.hpp"

namespace testing {

// Reference vapour cell used across the tests.
inline eitmem::PhysicalParams cell(double d, double omega_sq, double gamma0 = 0.0, double gammac = 0.0) {
    return eitmem::PhysicalParams::from_optical_depth(d, 1e12, 0.01, 12.0, std::sqrt(omega_sq), gamma0,
                                                      gammac);
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
};

inline double rel(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

}  // namespace testing
