#include "eitmem/qbench.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eitmem/analytic.hpp"

namespace eitmem::qbench {

namespace {

double gaussian(double x, double mean, double var) {
    const double u = x - mean;
    return std::exp(-0.5 * u * u / var) / std::sqrt(2.0 * kPi * var);
}

}  // namespace

std::string to_string(Region r) {
    switch (r) {
        case Region::Classical: return "classical";
        case Region::A: return "A";
        case Region::B: return "B";
        case Region::C: return "C";
        case Region::D: return "D";
    }
    return "classical";
}

double fidelity(double alpha_plus, double alpha_minus, double gain_plus, double gain_minus,
                double v_noise_plus, double v_noise_minus) {
    if (v_noise_plus < 0.0 || v_noise_minus < 0.0)
        throw std::invalid_argument("fidelity: negative added noise");
    const double sp = 2.0 + v_noise_plus, sm = 2.0 + v_noise_minus;
    const double kp = 2.0 * alpha_plus * alpha_plus * (1.0 - gain_plus) * (1.0 - gain_plus) / sp;
    const double km = 2.0 * alpha_minus * alpha_minus * (1.0 - gain_minus) * (1.0 - gain_minus) / sm;
    return 2.0 * std::exp(-kp - km) / std::sqrt(sp * sm);
}

double fidelity_overlap(const GaussianState& in, const GaussianState& out, const OverlapOptions& opt) {
    if (!(in.S_plus > 0.0 && in.S_minus > 0.0 && out.S_plus > 0.0 && out.S_minus > 0.0))
        throw std::invalid_argument("fidelity_overlap: variances must be positive");
    using boost::math::quadrature::gauss_kronrod;
    const double mp_in = 2.0 * in.alpha_plus, mm_in = 2.0 * in.alpha_minus;
    const double mp_out = 2.0 * out.alpha_plus, mm_out = 2.0 * out.alpha_minus;
    // Integration box covering both states.
    auto box = [&](double m1, double s1, double m2, double s2) {
        const double w1 = opt.extent * std::sqrt(s1), w2 = opt.extent * std::sqrt(s2);
        return std::pair{std::min(m1 - w1, m2 - w2), std::max(m1 + w1, m2 + w2)};
    };
    const auto [xa, xb] = box(mp_in, in.S_plus, mp_out, out.S_plus);
    const auto [ya, yb] = box(mm_in, in.S_minus, mm_out, out.S_minus);
    double worst = 0.0;
    auto inner = [&](double x) {
        auto f = [&](double y) {
            return gaussian(x, mp_in, in.S_plus) * gaussian(y, mm_in, in.S_minus) *
                   gaussian(x, mp_out, out.S_plus) * gaussian(y, mm_out, out.S_minus);
        };
        double err = 0.0;
        const double v = gauss_kronrod<double, 61>::integrate(f, ya, yb, 15, opt.tolerance, &err);
        worst = std::max(worst, err);
        return v;
    };
    double err = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(inner, xa, xb, 15, opt.tolerance, &err);
    const double f = 4.0 * kPi * v;
    if (!(std::isfinite(f)) || 4.0 * kPi * err > 1e-6 || 4.0 * kPi * worst > 1e-6)
        throw std::runtime_error("fidelity_overlap: quadrature did not converge (box [" +
                                 std::to_string(xa) + ", " + std::to_string(xb) + "] x [" +
                                 std::to_string(ya) + ", " + std::to_string(yb) +
                                 "], error estimate " + std::to_string(4.0 * kPi * err) + ")");
    return f;
}

GaussianState channel_output(const GaussianState& in, double gain_plus, double gain_minus,
                             double v_noise_plus, double v_noise_minus) {
    GaussianState out;
    out.alpha_plus = gain_plus * in.alpha_plus;
    out.alpha_minus = gain_minus * in.alpha_minus;
    // Coherent input: attenuated vacuum plus (1 - g^2) vacuum plus the added noise.
    out.S_plus = gain_plus * gain_plus * (in.S_plus - 1.0) + 1.0 + v_noise_plus;
    out.S_minus = gain_minus * gain_minus * (in.S_minus - 1.0) + 1.0 + v_noise_minus;
    return out;
}

TVPoint tv_metrics(const GaussianState& in, const GaussianState& out, std::optional<double> corr_plus,
                   std::optional<double> corr_minus) {
    if (!(in.S_plus > 0.0 && in.S_minus > 0.0))
        throw std::invalid_argument("tv_metrics: input variances must be positive");
    auto ratio = [](double a, double b) { return b != 0.0 ? a / b : 0.0; };
    const double gp = ratio(out.alpha_plus, in.alpha_plus);
    const double gm = ratio(out.alpha_minus, in.alpha_minus);
    const double cp = corr_plus.value_or(gp * in.S_plus);
    const double cm = corr_minus.value_or(gm * in.S_minus);
    const double vcp = out.S_plus - cp * cp / in.S_plus;
    const double vcm = out.S_minus - cm * cm / in.S_minus;
    // Signal-to-noise ratios R = 4 alpha^2 / S.
    auto snr = [](double a, double s) { return 4.0 * a * a / s; };
    const double tp = ratio(snr(out.alpha_plus, out.S_plus), snr(in.alpha_plus, in.S_plus));
    const double tm = ratio(snr(out.alpha_minus, out.S_minus), snr(in.alpha_minus, in.S_minus));
    TVPoint p;
    p.T = tp + tm;
    p.V = std::sqrt(std::max(0.0, vcp * vcm));
    p.eta = 0.5 * (gp * gp + gm * gm);
    p.v_noise = 0.5 * ((out.S_plus - gp * gp * (in.S_plus - 1.0) - 1.0) +
                       (out.S_minus - gm * gm * (in.S_minus - 1.0) - 1.0));
    return p;
}

TVPoint tv_channel(double eta, double v_noise) {
    TVPoint p;
    p.eta = eta;
    p.v_noise = v_noise;
    p.T = 2.0 * eta / (1.0 + v_noise);
    p.V = 1.0 - eta + v_noise;
    return p;
}

Curve parse_curve(const std::string& s) {
    if (s == "classical") return Curve::Classical;
    if (s == "passive_loss" || s == "passive-loss") return Curve::PassiveLoss;
    if (s == "amplifier") return Curve::Amplifier;
    if (s == "unity_gain" || s == "unity-gain") return Curve::UnityGain;
    throw std::invalid_argument("unknown limit curve '" + s + "'");
}

TVPoint curve_point(Curve c, double x) {
    TVPoint p;
    switch (c) {
        case Curve::Classical:  // feedforward gain g, coherent input
            p.T = 2.0 * x * x / (2.0 * x * x + 1.0);
            p.V = 1.0 + x * x;
            break;
        case Curve::PassiveLoss:  // eta
            if (x < 0.0 || x > 1.0) throw std::invalid_argument("passive loss needs 0 <= eta <= 1");
            p = tv_channel(x, 0.0);
            break;
        case Curve::Amplifier:  // gain G
            if (x < 1.0) throw std::invalid_argument("amplifier needs G >= 1");
            p.T = 2.0 * x / (2.0 * x - 1.0);
            p.V = x - 1.0;
            break;
        case Curve::UnityGain:  // V_noise
            if (x < 0.0) throw std::invalid_argument("unity gain needs V_noise >= 0");
            p = tv_channel(1.0, x);
            break;
    }
    return p;
}

std::vector<TVPoint> limit_curve(Curve c, double from, double to, int n) {
    std::vector<TVPoint> r;
    if (n < 2) n = 2;
    for (int i = 0; i < n; ++i) r.push_back(curve_point(c, from + (to - from) * i / (n - 1)));
    return r;
}

bool is_classical(const TVPoint& p) {
    // Some feedforward gain reaches T_cl >= T with V_cl <= V.
    if (p.V < 1.0) return false;
    if (p.T >= 1.0) return false;
    return p.T / (2.0 * (1.0 - p.T)) <= p.V - 1.0;
}

Region classify(const TVPoint& p) {
    if (is_classical(p)) return Region::Classical;
    if (p.T > 1.0 && p.V < 1.0) return Region::C;
    if (p.V < 1.0) return Region::B;
    if (p.T > 1.0) return Region::D;
    return Region::A;
}

Plane parse_plane(const std::string& s) {
    if (s == "loss-noise" || s == "loss_noise") return Plane::LossNoise;
    if (s == "gain-loss" || s == "gain_loss") return Plane::GainLoss;
    throw std::invalid_argument("unknown plane '" + s + "'");
}

RegionMap regime_map(Plane plane, const GridSpec2& g) {
    if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("regime_map: grid needs at least 2x2 cells");
    RegionMap m;
    m.plane = plane;
    m.grid = g;
    m.cells.resize(static_cast<std::size_t>(g.nx) * g.ny);
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            auto& c = m.cells[static_cast<std::size_t>(iy) * g.nx + ix];
            c.x = g.x_min + (g.x_max - g.x_min) * ix / (g.nx - 1);
            c.y = g.y_min + (g.y_max - g.y_min) * iy / (g.ny - 1);
            if (plane == Plane::LossNoise) {
                c.tv = tv_channel(c.x, c.y);
            } else {
                const auto ch = analytic::amp_chain_channel(c.x, c.y, g.z);
                c.tv = tv_channel(ch.eta, ch.noise);
            }
            c.region = classify(c.tv);
        }
    }
    // Midpoints between neighbouring cells of different label.
    auto at = [&](int ix, int iy) -> const RegionCell& {
        return m.cells[static_cast<std::size_t>(iy) * g.nx + ix];
    };
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const auto& c = at(ix, iy);
            if (ix + 1 < g.nx && at(ix + 1, iy).region != c.region) {
                const auto& e = at(ix + 1, iy);
                m.boundary.push_back({0.5 * (c.x + e.x), c.y, c.region, e.region});
            }
            if (iy + 1 < g.ny && at(ix, iy + 1).region != c.region) {
                const auto& e = at(ix, iy + 1);
                m.boundary.push_back({c.x, 0.5 * (c.y + e.y), c.region, e.region});
            }
        }
    return m;
}

TVPoint memory_channel(const PhysicalParams& p, double omega, double hold) {
    const auto delay = analytic::delay_spectrum(p, 1.0, omega, 1.0);
    const double eta = delay.channel.eta * std::exp(-2.0 * p.gamma_d() * hold);
    return tv_channel(eta, delay.channel.noise);
}

TVTrajectory tv_trajectory(const PhysicalParams& base, SweepRate which,
                           const std::vector<double>& rates, double omega, double hold) {
    TVTrajectory t;
    for (double r : rates) {
        PhysicalParams p = base;
        (which == SweepRate::Gamma0 ? p.gamma0 : p.gammac) = r;
        TrajectoryPoint pt;
        pt.rate = r;
        pt.tv = memory_channel(p, omega, hold);
        pt.region = classify(pt.tv);
        if (!t.points.empty() && pt.tv.T > t.points.back().tv.T * (1.0 + 1e-12))
            t.T_non_increasing = false;
        t.points.push_back(pt);
    }
    return t;
}

}  // namespace eitmem::qbench
