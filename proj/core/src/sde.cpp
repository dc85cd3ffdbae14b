#include "eitmem/sde.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace eitmem::sde {

namespace {

constexpr cplx I{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

bool bad(cplx v, double guard) {
    return !(std::abs(v.real()) <= guard && std::abs(v.imag()) <= guard);
}

bool bad(const Atoms& a, double guard) {
    return bad(a.s3, guard) || bad(a.s4, guard) || bad(a.s5, guard) || bad(a.s6, guard) ||
           bad(a.s7, guard) || bad(a.s9, guard) || bad(a.s10, guard) || bad(a.s11, guard);
}

}  // namespace

long GridSpec::nt() const { return static_cast<long>(std::ceil(t_total / dt - 1e-9)); }

std::string GridSpec::check() const {
    if (nz < 2) return "grid.nz must be at least 2";
    if (!(dt > 0.0)) return "grid.dt must be positive";
    if (!(t_total > 0.0)) return "grid.t_total must be positive";
    if (n_traj < 1) return "grid.n_traj must be at least 1";
    if (!(overflow_guard > 0.0)) return "grid.overflow_guard must be positive";
    if (!(max_diverged >= 0.0 && max_diverged <= 1.0)) return "grid.max_diverged must be in [0, 1]";
    return {};
}

SliceCoefficients slice_coefficients(const PhysicalParams& p, double omega_c) {
    SliceCoefficients c;
    c.gamma0 = p.gamma0;
    c.gammac = p.gammac;
    c.Gamma = 1.0 + 0.5 * p.gamma0 + 0.5 * p.gammac;
    c.gd = p.gamma0 + p.gammac;
    c.gm = p.gammac + 0.5 * p.gamma0;
    c.E = omega_c;
    c.G = p.coupling_bar();
    c.h = std::sqrt(0.5 * c.G);
    c.gc_root = p.gammac / std::sqrt(2.0 * c.G);
    c.E_over_G = omega_c / c.G;
    return c;
}

void atomic_drift(const Atoms& x, cplx alpha, cplx beta, const SliceCoefficients& c, Atoms& f) {
    const cplx aR = I * c.G * alpha;
    const cplx bR = -I * c.G * beta;
    const cplx s33 = 1.0 - x.s6 - x.s7;
    const cplx inv = 1.0 - 2.0 * x.s6 - x.s7;
    f.s3 = -c.Gamma * x.s3 + c.E * x.s5 - aR * inv;
    f.s4 = -c.Gamma * x.s4 + aR * x.s9 + c.E * (x.s6 + 2.0 * x.s7 - 1.0);
    f.s5 = -c.gd * x.s5 - aR * x.s10 - c.E * x.s3;
    f.s6 = s33 - c.gammac * (x.s6 - x.s7) - aR * x.s11 - bR * x.s3;
    f.s7 = s33 - c.gammac * (x.s7 - x.s6) - c.E * (x.s4 + x.s10);
    f.s9 = -c.gd * x.s9 - bR * x.s4 - c.E * x.s11;
    f.s10 = -c.Gamma * x.s10 + bR * x.s5 + c.E * (2.0 * x.s7 + x.s6 - 1.0);
    f.s11 = -c.Gamma * x.s11 + c.E * x.s9 - bR * inv;
}

void atomic_noise(const Atoms& x, cplx alpha, cplx beta, const SliceCoefficients& c,
                  const double* n, Atoms& o) {
    const cplx aR = I * c.G * alpha;
    const cplx bR = -I * c.G * beta;
    const cplx aG = I * alpha;   // alpha_R / G
    const cplx bG = -I * beta;   // beta_R / G
    const cplx s33 = 1.0 - x.s6 - x.s7;
    const cplx pop = x.s6 + x.s7;
    const double h = c.h, gm = c.gm, gc = c.gammac, g0 = c.gamma0;

    const cplx Y = aR * x.s11 + bR * x.s3 + s33;
    const cplx X9 = Y + gc * pop + g0 * x.s7;
    const cplx X5 = Y + 2.0 * g0 * x.s7 + gc * pop;
    const cplx rY = std::sqrt(Y);
    const cplx rY1 = std::sqrt(Y + gc * pop);
    const cplx rX9 = std::sqrt(X9);
    const cplx rX5 = std::sqrt(X5);
    const cplx rD = std::sqrt(gm * s33);
    const cplx rP = std::sqrt(0.5 * gc * pop);
    const cplx r7 = std::sqrt(c.E * (x.s4 + x.s10) + s33);

    const cplx n34 = cplx(n[2], -n[3]);    // n3 - i n4
    const cplx n34p = cplx(n[2], n[3]);    // n3 + i n4
    const cplx n56 = cplx(n[4], n[5]);     // n5 + i n6
    const cplx n1516 = cplx(n[15], n[14]); // n16 + i n15
    const cplx n1314 = cplx(n[13], -n[12]);// n14 - i n13
    const cplx n12p = cplx(n[0], n[1]);    // n1 + i n2
    const cplx n1718 = cplx(n[17], -n[16]);// n18 - i n17

    o.s3 = h * (aG - x.s3) * n[0] + I * h * (aG + x.s3) * n[1] - (aR * x.s4 + c.E * x.s3) * n34 +
           0.5 * rD * cplx(kSqrt2 * n[9], n[6] + n[11]) + kSqrt2 * gm * x.s4 * n1314;

    o.s4 = h * (x.s4 - c.E_over_G) * n[0] - I * h * (x.s4 + c.E_over_G) * n[1] + n34p +
           0.25 * gm * s33 * n1516;

    o.s5 = -h * x.s5 * cplx(n[0], -n[1]) + 0.5 * (aR * (x.s6 - x.s7) + gm * x.s3) * n34 +
           cplx(n[4], -n[5]) / (2.0 * kSqrt2) + 0.5 * rX5 * cplx(kSqrt2 * n[8], n[7] + n[10]);

    o.s6 = -c.gc_root * n12p - 0.5 * aR * x.s9 * n34 + rY * rY1 * n56 + rP * (n[6] - n[11]) -
           rY * n[8] + rY * rX9 * n1314 - 0.5 * bR * x.s5 * n1516 - gc * n1718;

    o.s7 = c.gc_root * n12p + 0.5 * aR * x.s9 * n34 + kSqrt2 * (aR * x.s10 + c.E * x.s3) * n56 +
           rP * (n[11] - n[6]) + r7 * ((n[7] - n[10]) / kSqrt2) +
           kSqrt2 * (bR * x.s4 + c.E * x.s11) * n1314 + 0.5 * bR * x.s5 * n1516 +
           c.gc_root * n1718;

    o.s9 = 0.5 * rX9 * cplx(kSqrt2 * n[8], -(n[7] + n[10])) + cplx(n[13], n[12]) / (2.0 * kSqrt2) +
           0.5 * (bR * (x.s6 - x.s7) + gm * x.s11) * n1516 - h * x.s9 * cplx(n[17], n[16]);

    o.s10 = 0.25 * gm * s33 * n34 + cplx(n[15], -n[14]) + I * h * (x.s10 + c.E_over_G) * n[16] +
            h * (x.s10 - c.E_over_G) * n[17];

    o.s11 = kSqrt2 * (0.5 * g0 + gc) * x.s10 * n56 + 0.5 * rD * cplx(kSqrt2 * n[9], -(n[6] + n[11])) -
            (bR * x.s10 + c.E * x.s11) * n1516 - I * h * (bG + x.s11) * n[16] +
            h * (bG - x.s11) * n[17];
}

void linearized_noise(const Atoms& x, const SliceCoefficients& c, const double* n, Atoms& o) {
    const cplx s33 = 1.0 - x.s6 - x.s7;
    const cplx s23 = I * x.s4, s32 = -I * x.s10;
    const double g = c.gamma0 + c.gammac;
    // D(s31, s13), D(s31, s12), D(s21, s13), D(s21, s12).
    const cplx m[4] = {-2.0 * g * s33, g * s32, g * s23,
                       s33 + c.gammac * (x.s6 + x.s7) + 2.0 * c.gamma0 * x.s7};
    cplx d13{}, d12{}, d31{}, d21{};
    for (int k = 0; k < 4; ++k) {
        const cplx r = std::sqrt(0.5 * m[k]);
        const cplx w(n[2 * k], n[2 * k + 1]);
        (k < 2 ? d31 : d21) += r * std::conj(w);
        ((k & 1) ? d12 : d13) += r * w;
    }
    o = Atoms{cplx{}, cplx{}, cplx{}, cplx{}, cplx{}, cplx{}, cplx{}, cplx{}};
    o.s3 = d13;
    o.s5 = I * d12;
    o.s11 = d31;
    o.s9 = -I * d21;
}

DriftDiffusion drift_and_diffusion(const Atoms& x, cplx alpha, cplx beta, const PhysicalParams& p,
                                   double t) {
    const auto c = slice_coefficients(p, p.omega_c(t));
    DriftDiffusion r;
    Atoms f;
    atomic_drift(x, alpha, beta, c, f);
    r.drift = {f.s3, f.s4, f.s5, f.s6, f.s7, f.s9, f.s10, f.s11};
    for (int k = 0; k < kNoises; ++k) {
        double n[kNoises] = {};
        n[k] = 1.0;
        Atoms o;
        atomic_noise(x, alpha, beta, c, n, o);
        const cplx col[8] = {o.s3, o.s4, o.s5, o.s6, o.s7, o.s9, o.s10, o.s11};
        for (int v = 0; v < 8; ++v) r.noise[v][k] = col[v];
    }
    return r;
}

TrajectoryState init_trajectory(const PhysicalParams&, const GridSpec& grid, const PulseSpec& pulse,
                                bool signal_on) {
    TrajectoryState s;
    s.alpha.assign(grid.nz + 1, {});
    s.beta.assign(grid.nz + 1, {});
    s.atoms.assign(grid.nz, Atoms{});
    s.t = 0.0;
    if (signal_on) {
        s.alpha[0] = pulse.field(0.0);
        s.beta[0] = std::conj(s.alpha[0]);
    }
    return s;
}

struct NormalStream::Impl {
    boost::random::mt19937_64 engine;
    boost::random::normal_distribution<double> normal;
};

NormalStream::NormalStream(std::uint64_t master_seed, std::uint64_t index)
    : impl_(new Impl{boost::random::mt19937_64(splitmix64(master_seed ^ splitmix64(index))),
                     boost::random::normal_distribution<double>(0.0, 1.0)}) {}

NormalStream::~NormalStream() { delete impl_; }

void NormalStream::fill(double* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = impl_->normal(impl_->engine);
}

void step(TrajectoryState& s, const PhysicalParams& p, const GridSpec& grid, const PulseSpec& pulse,
          bool signal_on, NormalStream* rng) {
    const int nz = grid.nz;
    const double dt = grid.dt;
    const double dz = grid.dz();
    const auto c = slice_coefficients(p, p.omega_c(s.t));
    const double d = p.optical_depth();
    const double NG = p.atom_number * c.G;
    const double kappa = 0.5 * d * dz * dt;
    const double scale = std::sqrt(dt / (p.atom_number * dz));
    const double t_new = s.t + dt;

    cplx a_old = s.alpha[0], b_old = s.beta[0];
    s.alpha[0] = signal_on ? pulse.field(t_new) : cplx{};
    s.beta[0] = std::conj(s.alpha[0]);

    double n[kNoises];
    Atoms f, nz_incr;
    for (int j = 0; j < nz; ++j) {
        Atoms& x = s.atoms[j];
        const cplx a_in = s.alpha[j], b_in = s.beta[j];
        const cplx a_next_old = s.alpha[j + 1], b_next_old = s.beta[j + 1];
        if (rng) {
            if (grid.noise_model == NoiseModel::Linearized) {
                rng->fill(n, kLinearNoises);
                for (int k = 0; k < kLinearNoises; ++k) n[k] *= scale;
                linearized_noise(x, c, n, nz_incr);
            } else {
                rng->fill(n, kNoises);
                for (double& v : n) v *= scale;
                atomic_noise(x, 0.5 * (a_old + a_next_old), 0.5 * (b_old + b_next_old), c, n,
                             nz_incr);
            }
        } else {
            nz_incr = Atoms{cplx{}, cplx{}, cplx{}, cplx{}, cplx{}, cplx{}, cplx{}, cplx{}};
        }
        // The dipoles see the mid-slice field, which contains their own
        // contribution; that part of the coupling is taken at the new time.
        const cplx inv = 2.0 * x.s6 + x.s7 - 1.0;
        const cplx den = 1.0 + kappa * inv;
        const cplx s3 = (x.s3 + dt * (-c.Gamma * x.s3 + c.E * x.s5 + I * c.G * a_in * inv) + nz_incr.s3) / den;
        const cplx s11 = (x.s11 + dt * (-c.Gamma * x.s11 + c.E * x.s9 - I * c.G * b_in * inv) + nz_incr.s11) / den;
        const cplx a_mid = a_in + 0.5 * dz * I * NG * s3;
        const cplx b_mid = b_in - 0.5 * dz * I * NG * s11;
        atomic_drift(x, a_mid, b_mid, c, f);
        x.s4 += dt * f.s4 + nz_incr.s4;
        x.s5 += dt * f.s5 + nz_incr.s5;
        x.s6 += dt * f.s6 + nz_incr.s6;
        x.s7 += dt * f.s7 + nz_incr.s7;
        x.s9 += dt * f.s9 + nz_incr.s9;
        x.s10 += dt * f.s10 + nz_incr.s10;
        x.s3 = s3;
        x.s11 = s11;
        a_old = a_next_old;
        b_old = b_next_old;
        s.alpha[j + 1] = a_in + dz * I * NG * s3;
        s.beta[j + 1] = b_in - dz * I * NG * s11;
        if (bad(x, grid.overflow_guard) || bad(s.alpha[j + 1], grid.overflow_guard) ||
            bad(s.beta[j + 1], grid.overflow_guard)) {
            s.diverged = true;
            return;
        }
    }
    s.t = t_new;
}

EnsembleResult run_ensemble(const PhysicalParams& p, const GridSpec& grid, const PulseSpec& pulse,
                            const ReadoutSpec& readout, bool signal_on) {
    if (auto e = p.check(); !e.empty()) throw std::invalid_argument(e);
    if (auto e = grid.check(); !e.empty()) throw std::invalid_argument(e);
    const auto t_start = std::chrono::steady_clock::now();

    const long nt = grid.nt();
    const int nz = grid.nz;
    const auto& om = readout.omegas;
    const std::size_t nw = om.size();
    const std::size_t np = readout.planes.size();
    std::vector<int> plane_node(np);
    for (std::size_t i = 0; i < np; ++i)
        plane_node[i] = std::clamp(static_cast<int>(std::lround(readout.planes[i] * nz)), 0, nz);

    // Output window steps and phasors.
    std::vector<long> wsteps;
    for (long k = 1; k <= nt; ++k) {
        const double t = k * grid.dt;
        if (t >= readout.window_start - 1e-9 && t < readout.window_start + readout.window_length - 1e-9)
            wsteps.push_back(k);
    }
    const double window = static_cast<double>(wsteps.size()) * grid.dt;
    std::vector<cplx> phasor(wsteps.size() * nw);
    for (std::size_t i = 0; i < wsteps.size(); ++i)
        for (std::size_t k = 0; k < nw; ++k)
            phasor[i * nw + k] = std::polar(1.0, om[k] * wsteps[i] * grid.dt);
    const long w_first = wsteps.empty() ? nt + 1 : wsteps.front();
    const long w_last = wsteps.empty() ? 0 : wsteps.back();

    // Decimated mean-field grid.
    EnsembleResult res;
    const bool want_grid = readout.grid_z_stride > 0 && readout.grid_t_stride > 0;
    std::vector<int> gz_nodes;
    std::vector<long> gt_steps;
    if (want_grid) {
        for (int j = 0; j <= nz; j += readout.grid_z_stride) gz_nodes.push_back(j);
        for (long k = 0; k <= nt; k += readout.grid_t_stride) gt_steps.push_back(k);
        for (int j : gz_nodes) res.grid_z.push_back(static_cast<double>(j) / nz);
        for (long k : gt_steps) res.grid_t.push_back(k * grid.dt);
    }
    const std::size_t gsize = gz_nodes.size() * gt_steps.size();

    const long ntraj = grid.noise ? grid.n_traj : 1;
    const long block = 8;
    const long nblocks = (ntraj + block - 1) / block;
    std::vector<std::vector<spectrum::Transforms>> traj_tr(ntraj);
    std::vector<char> traj_bad(ntraj, 0);
    std::vector<std::vector<double>> block_gp(nblocks), block_gm(nblocks);

    auto run_traj = [&](long idx, std::vector<double>& gp, std::vector<double>& gm) {
        auto s = init_trajectory(p, grid, pulse, signal_on);
        std::unique_ptr<NormalStream> rng;
        if (grid.noise) rng = std::make_unique<NormalStream>(grid.seed, static_cast<std::uint64_t>(idx));
        std::vector<cplx> ap(np * nw), an(np * nw), bp(np * nw), bn(np * nw);
        std::size_t wi = 0, gi = 0;
        auto record_grid = [&](long k) {
            if (gi < gt_steps.size() && gt_steps[gi] == k) {
                for (std::size_t jz = 0; jz < gz_nodes.size(); ++jz) {
                    const cplx a = s.alpha[gz_nodes[jz]], b = s.beta[gz_nodes[jz]];
                    gp[gi * gz_nodes.size() + jz] += std::real(a + b);
                    gm[gi * gz_nodes.size() + jz] += std::real(-I * (a - b));
                }
                ++gi;
            }
        };
        if (want_grid) record_grid(0);
        for (long k = 1; k <= nt; ++k) {
            step(s, p, grid, pulse, signal_on, rng.get());
            if (s.diverged) return false;
            if (want_grid) record_grid(k);
            if (k >= w_first && k <= w_last && wi < wsteps.size() && wsteps[wi] == k) {
                for (std::size_t ip = 0; ip < np; ++ip) {
                    const cplx a = s.alpha[plane_node[ip]], b = s.beta[plane_node[ip]];
                    for (std::size_t q = 0; q < nw; ++q) {
                        const cplx e = phasor[wi * nw + q];
                        const cplx ec = std::conj(e);
                        ap[ip * nw + q] += a * e;
                        an[ip * nw + q] += a * ec;
                        bp[ip * nw + q] += b * e;
                        bn[ip * nw + q] += b * ec;
                    }
                }
                ++wi;
            }
        }
        auto& tr = traj_tr[idx];
        tr.resize(np);
        for (std::size_t ip = 0; ip < np; ++ip) {
            tr[ip].resize(nw);
            for (std::size_t q = 0; q < nw; ++q) {
                const std::size_t u = ip * nw + q;
                tr[ip].xp_pos[q] = (ap[u] + bp[u]) * grid.dt;
                tr[ip].xp_neg[q] = (an[u] + bn[u]) * grid.dt;
                tr[ip].xm_pos[q] = -I * (ap[u] - bp[u]) * grid.dt;
                tr[ip].xm_neg[q] = -I * (an[u] - bn[u]) * grid.dt;
            }
        }
        return true;
    };

    std::atomic<long> next{0};
    auto worker = [&]() {
        std::vector<double> gp(gsize), gm(gsize);
        for (;;) {
            const long b = next.fetch_add(1);
            if (b >= nblocks) break;
            block_gp[b].assign(gsize, 0.0);
            block_gm[b].assign(gsize, 0.0);
            for (long idx = b * block; idx < std::min(ntraj, (b + 1) * block); ++idx) {
                std::fill(gp.begin(), gp.end(), 0.0);
                std::fill(gm.begin(), gm.end(), 0.0);
                if (!run_traj(idx, gp, gm)) {
                    traj_bad[idx] = 1;
                    traj_tr[idx].clear();
                    continue;
                }
                for (std::size_t u = 0; u < gsize; ++u) {
                    block_gp[b][u] += gp[u];
                    block_gm[b][u] += gm[u];
                }
            }
        }
    };
    int nthreads = grid.threads > 0 ? grid.threads
                                    : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<int>(std::min<long>(nthreads, nblocks));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    res.diverged_count = std::count(traj_bad.begin(), traj_bad.end(), 1);
    res.traj_used = ntraj - res.diverged_count;
    if (static_cast<double>(res.diverged_count) > grid.max_diverged * static_cast<double>(ntraj) ||
        res.traj_used == 0) {
        throw DivergenceError("diverged trajectories: " + std::to_string(res.diverged_count) + " of " +
                                  std::to_string(ntraj),
                              res.diverged_count, ntraj);
    }

    for (std::size_t ip = 0; ip < np; ++ip) {
        spectrum::Estimator est(om, window, readout.planes[ip]);
        for (long idx = 0; idx < ntraj; ++idx)
            if (!traj_bad[idx]) est.add(traj_tr[idx][ip]);
        res.spectra.push_back(est.finish());
    }

    // Reference spectrum of the injected field over an equally long window.
    {
        std::vector<cplx> a(wsteps.size()), b(wsteps.size());
        const double t0 = readout.input_window_start;
        const long k0 = static_cast<long>(std::lround(t0 / grid.dt));
        for (std::size_t i = 0; i < wsteps.size(); ++i) {
            const double t = (k0 + static_cast<long>(i)) * grid.dt;
            a[i] = signal_on ? pulse.field(t) : cplx{};
            b[i] = std::conj(a[i]);
        }
        spectrum::Estimator est(om, window, 0.0);
        est.add(spectrum::transform_record(a, b, k0 * grid.dt, grid.dt, om));
        res.input = est.finish();
    }

    if (want_grid) {
        res.mean_Xplus.assign(gsize, 0.0);
        res.mean_Xminus.assign(gsize, 0.0);
        for (long b = 0; b < nblocks; ++b)
            for (std::size_t u = 0; u < gsize; ++u) {
                res.mean_Xplus[u] += block_gp[b][u];
                res.mean_Xminus[u] += block_gm[b][u];
            }
        for (std::size_t u = 0; u < gsize; ++u) {
            res.mean_Xplus[u] /= static_cast<double>(res.traj_used);
            res.mean_Xminus[u] /= static_cast<double>(res.traj_used);
        }
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

EnsembleResult storage_protocol(const PhysicalParams& p, const GridSpec& grid,
                                const PulseSpec& pulse, const CouplingSchedule& schedule,
                                const ReadoutSpec& readout, bool signal_on) {
    PhysicalParams q = p;
    q.coupling = schedule;
    return run_ensemble(q, grid, pulse, readout, signal_on);
}

}  // namespace eitmem::sde
