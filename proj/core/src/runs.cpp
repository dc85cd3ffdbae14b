#include "eitmem/runs.hpp"

#include <cmath>
#include <stdexcept>

#include "eitmem/analytic.hpp"

namespace eitmem::runs {

std::vector<AnalyticRow> analytic_sweep(const config::RunConfig& c) {
    const auto& a = c.analytic;
    std::vector<AnalyticRow> rows;
    rows.reserve(a.n);
    for (int i = 0; i < a.n; ++i) {
        const double x = a.n == 1 ? a.from : a.from + (a.to - a.from) * i / (a.n - 1);
        PhysicalParams p = c.physics;
        double omega = a.omega, z = a.z;
        if (a.sweep == "omega") omega = x;
        else if (a.sweep == "z") z = x;
        else if (a.sweep == "gamma0") p.gamma0 = x;
        else if (a.sweep == "gammac") p.gammac = x;
        else throw std::invalid_argument("unknown sweep '" + a.sweep + "'");
        const auto on = analytic::delay_spectrum(p, z, omega, a.s_in);
        const auto floor = analytic::delay_spectrum(p, z, omega, 1.0);
        AnalyticRow r;
        r.x = x;
        r.omega = omega;
        r.z = z;
        r.gamma0 = p.gamma0;
        r.gammac = p.gammac;
        r.S_plus = r.S_minus = on.S;
        r.V_plus = r.V_minus = floor.S;
        const double g = std::sqrt(std::max(0.0, on.channel.eta));
        r.alpha_plus = g * c.pulse.mod_depth_plus;
        r.alpha_minus = g * c.pulse.mod_depth_minus;
        r.eta = on.channel.eta;
        r.nf = on.channel.nf;
        r.v_noise = on.channel.noise;
        rows.push_back(r);
    }
    return rows;
}

double storage_t_off(const config::RunConfig& c) {
    if (c.physics.coupling.switching) return c.physics.coupling.t_off;
    const auto dq = derive(c.physics, 0.0);
    return c.pulse.center + 0.5 / dq.v_g;
}

storage::Pipeline storage_run(const config::RunConfig& c) {
    PhysicalParams p = c.physics;
    p.coupling = CouplingSchedule::constant(p.coupling.omega_on);
    return storage::run(p, c.pulse, storage_t_off(c), c.storage.hold, c.storage.mode, c.storage.dt,
                        c.storage.kernel);
}

sde::EnsembleResult simulate(const config::RunConfig& c, bool signal_on) {
    if (c.physics.coupling.switching)
        return sde::storage_protocol(c.physics, c.grid, c.pulse, c.physics.coupling, c.readout, signal_on);
    return sde::run_ensemble(c.physics, c.grid, c.pulse, c.readout, signal_on);
}

BenchmarkPoint benchmark_point(double alpha, double eta, double v_noise) {
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
    BenchmarkPoint b;
    b.alpha = alpha;
    b.eta = eta;
    b.v_noise = v_noise;
    b.fidelity = qbench::fidelity(alpha, std::sqrt(eta), v_noise);
    b.tv = qbench::tv_channel(eta, v_noise);
    b.region = qbench::classify(b.tv);
    return b;
}

}  // namespace eitmem::runs
