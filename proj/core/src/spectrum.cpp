#include "eitmem/spectrum.hpp"

#include <cmath>

namespace eitmem::spectrum {

void Transforms::resize(std::size_t n) {
    xp_pos.assign(n, {});
    xp_neg.assign(n, {});
    xm_pos.assign(n, {});
    xm_neg.assign(n, {});
}

Estimator::Estimator(std::vector<double> omega, double window, double z)
    : omega_(std::move(omega)), window_(window), z_(z) {
    const auto n = omega_.size();
    sp_.assign(n, 0.0);
    sp2_.assign(n, 0.0);
    sm_.assign(n, 0.0);
    sm2_.assign(n, 0.0);
    mp_pos_.assign(n, {});
    mp_neg_.assign(n, {});
    mm_pos_.assign(n, {});
    mm_neg_.assign(n, {});
}

void Estimator::add(const Transforms& t) {
    for (std::size_t k = 0; k < omega_.size(); ++k) {
        const double pp = std::real(t.xp_pos[k] * t.xp_neg[k]) / window_;
        const double pm = std::real(t.xm_pos[k] * t.xm_neg[k]) / window_;
        sp_[k] += pp;
        sp2_[k] += pp * pp;
        sm_[k] += pm;
        sm2_[k] += pm * pm;
        mp_pos_[k] += t.xp_pos[k];
        mp_neg_[k] += t.xp_neg[k];
        mm_pos_[k] += t.xm_pos[k];
        mm_neg_[k] += t.xm_neg[k];
    }
    records_.push_back(t);
    ++n_;
}

PlaneSpectrum Estimator::finish() const {
    PlaneSpectrum r;
    r.z = z_;
    r.window = window_;
    r.omega = omega_;
    r.samples = n_;
    const auto m = omega_.size();
    for (auto* v : {&r.S_plus, &r.S_minus, &r.V_plus, &r.V_minus, &r.se_plus, &r.se_minus, &r.se_V_plus, &r.se_V_minus,
                    &r.signal_plus, &r.signal_minus, &r.alpha_plus, &r.alpha_minus})
        v->assign(m, 0.0);
    if (n_ == 0) return r;
    const double n = static_cast<double>(n_);
    auto stderr_of = [n](double s, double s2) {
        if (n < 2) return 0.0;
        const double mean = s / n;
        const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
        return std::sqrt(var / n);
    };
    for (std::size_t k = 0; k < m; ++k) {
        // Positive-P moments are normally ordered; the vacuum adds one unit.
        r.S_plus[k] = 1.0 + sp_[k] / n;
        r.S_minus[k] = 1.0 + sm_[k] / n;
        r.se_plus[k] = stderr_of(sp_[k], sp2_[k]);
        r.se_minus[k] = stderr_of(sm_[k], sm2_[k]);
        r.signal_plus[k] = std::real((mp_pos_[k] / n) * (mp_neg_[k] / n)) / window_;
        r.signal_minus[k] = std::real((mm_pos_[k] / n) * (mm_neg_[k] / n)) / window_;
        r.V_plus[k] = r.S_plus[k] - r.signal_plus[k];
        r.V_minus[k] = r.S_minus[k] - r.signal_minus[k];
        r.alpha_plus[k] = 0.5 * std::sqrt(std::max(0.0, r.signal_plus[k]));
        r.alpha_minus[k] = 0.5 * std::sqrt(std::max(0.0, r.signal_minus[k]));
        // V is the mean of the per-record centred products.
        const cplx cp_pos = mp_pos_[k] / n, cp_neg = mp_neg_[k] / n;
        const cplx cm_pos = mm_pos_[k] / n, cm_neg = mm_neg_[k] / n;
        double vp = 0.0, vp2 = 0.0, vm = 0.0, vm2 = 0.0;
        for (const auto& t : records_) {
            const double a = std::real((t.xp_pos[k] - cp_pos) * (t.xp_neg[k] - cp_neg)) / window_;
            const double b = std::real((t.xm_pos[k] - cm_pos) * (t.xm_neg[k] - cm_neg)) / window_;
            vp += a;
            vp2 += a * a;
            vm += b;
            vm2 += b * b;
        }
        r.se_V_plus[k] = stderr_of(vp, vp2);
        r.se_V_minus[k] = stderr_of(vm, vm2);
    }
    return r;
}

Transforms transform_record(const std::vector<cplx>& alpha, const std::vector<cplx>& beta,
                            double t0, double dt, const std::vector<double>& omega) {
    Transforms t;
    t.resize(omega.size());
    const cplx I(0.0, 1.0);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        cplx ap{}, an{}, bp{}, bn{};
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            const double tt = t0 + static_cast<double>(i) * dt;
            const cplx e = std::polar(1.0, omega[k] * tt);
            ap += alpha[i] * e;
            an += alpha[i] * std::conj(e);
            bp += beta[i] * e;
            bn += beta[i] * std::conj(e);
        }
        t.xp_pos[k] = (ap + bp) * dt;
        t.xp_neg[k] = (an + bn) * dt;
        t.xm_pos[k] = -I * (ap - bp) * dt;
        t.xm_neg[k] = -I * (an - bn) * dt;
    }
    return t;
}

}  // namespace eitmem::spectrum
