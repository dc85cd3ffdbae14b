#pragma once

// Engine orchestration from a RunConfig.

#include <vector>

#include "eitmem/config.hpp"
#include "eitmem/qbench.hpp"
#include "eitmem/sde.hpp"
#include "eitmem/storage.hpp"

namespace eitmem::runs {

struct AnalyticRow {
    double x = 0.0;  // swept value
    double omega = 0.0, z = 0.0, gamma0 = 0.0, gammac = 0.0;
    double S_plus = 0.0, S_minus = 0.0;
    double V_plus = 0.0, V_minus = 0.0;
    double alpha_plus = 0.0, alpha_minus = 0.0;
    double eta = 0.0, nf = 0.0, v_noise = 0.0;
};

std::vector<AnalyticRow> analytic_sweep(const config::RunConfig& c);

// Switch-off time: the schedule value when switching, otherwise the time at
// which the pulse centre sits mid-medium.
double storage_t_off(const config::RunConfig& c);

storage::Pipeline storage_run(const config::RunConfig& c);

// Storage protocol when the schedule switches, otherwise a delay line.
sde::EnsembleResult simulate(const config::RunConfig& c, bool signal_on);

struct BenchmarkPoint {
    double alpha = 0.0, eta = 0.0, v_noise = 0.0;
    double fidelity = 0.0;
    qbench::TVPoint tv;
    qbench::Region region = qbench::Region::Classical;
};

BenchmarkPoint benchmark_point(double alpha, double eta, double v_noise);

}  // namespace eitmem::runs
