#include "hfdls/ramsey.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "hfdls/constants.hpp"
#include "hfdls/errors.hpp"
#include "hfdls/parallel.hpp"

namespace hfdls {

using cd = std::complex<double>;
using constants::pi;

PulseSpec PulseSpec::pi_half(double rabi_frequency, double phase) {
    PulseSpec p{rabi_frequency, 0.25 / rabi_frequency, phase};
    p.validate();
    return p;
}

PulseSpec PulseSpec::instantaneous(double phase) { return {1.0, 0.0, phase}; }

void PulseSpec::validate() const {
    if (!(rabi_frequency > 0.0) || !std::isfinite(rabi_frequency))
        throw DomainError("rabi frequency must be positive");
    if (!(duration >= 0.0) || !std::isfinite(duration))
        throw DomainError("pulse duration must be non-negative");
    if (!std::isfinite(phase)) throw DomainError("pulse phase must be finite");
}

EffectiveDrive effective_rabi(const TwoPhotonDrive& d) {
    if (d.intermediate_detuning == 0.0 || !std::isfinite(d.intermediate_detuning))
        throw DomainError("intermediate detuning must be non-zero");
    if (!(d.rabi_uw >= 0.0) || !(d.rabi_rf >= 0.0))
        throw DomainError("rabi frequencies must be non-negative");
    EffectiveDrive out;
    out.rabi = d.rabi_uw * d.rabi_rf / (2.0 * d.intermediate_detuning);
    out.differential_ac_shift =
        (d.rabi_uw * d.rabi_uw - d.rabi_rf * d.rabi_rf) / (4.0 * d.intermediate_detuning);
    out.weakly_detuned =
        std::abs(d.intermediate_detuning) < 10.0 * std::max(d.rabi_uw, d.rabi_rf);
    return out;
}

Eigen::Matrix2cd pulse_unitary(const PulseSpec& pulse, double detuning) {
    pulse.validate();
    const cd i(0.0, 1.0);
    const cd eip = std::polar(1.0, pulse.phase);
    Eigen::Matrix2cd u;
    if (pulse.duration == 0.0) {
        const double c = std::sqrt(0.5);
        u << c, -i * c * std::conj(eip), -i * c * eip, c;
        return u;
    }
    const double omega = pulse.rabi_frequency;
    const double w = std::hypot(omega, detuning);
    const double angle = pi * w * pulse.duration;
    const double c = std::cos(angle), s = std::sin(angle);
    const double nz = -detuning / w, nperp = omega / w;
    // cos - i sin (n . sigma)
    u << cd(c, -s * nz), -i * s * nperp * std::conj(eip), -i * s * nperp * eip, cd(c, s * nz);
    return u;
}

Eigen::Matrix2cd free_unitary(double detuning, double tau) {
    if (!(tau >= 0.0)) throw DomainError("hold time must be non-negative");
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
    u(0, 0) = std::polar(1.0, pi * detuning * tau);
    u(1, 1) = std::polar(1.0, -pi * detuning * tau);
    return u;
}

double ramsey_probability(double detuning, double tau, const PulsePair& pulses) {
    const Spinor ground(0.0, 1.0);
    const Spinor psi = pulse_unitary(pulses.second, detuning) * free_unitary(detuning, tau) *
                       pulse_unitary(pulses.first, detuning) * ground;
    return std::clamp(std::norm(psi(0)), 0.0, 1.0);
}

void RamseyEnsemble::validate() const {
    if (n_samples < 1) throw DomainError("ensemble needs at least one sample");
    if (!std::isfinite(detuning_nominal) || !std::isfinite(shift_scale))
        throw DomainError("ensemble parameters must be finite");
    switch (distribution) {
        case ShiftDistribution::Delta:
            break;
        case ShiftDistribution::Gaussian:
            if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be finite and >= 0");
            break;
        case ShiftDistribution::Uniform:
            if (!(half_width >= 0.0) || !std::isfinite(half_width))
                throw DomainError("half width must be finite and >= 0");
            break;
        case ShiftDistribution::LatticeSites:
            if (!(sites.waist > 0.0) || !(sites.cloud_sigma >= 0.0) || !(sites.peak_depth >= 0.0) ||
                !std::isfinite(sites.dls_per_recoil))
                throw DomainError("lattice-site model parameters out of range");
            break;
    }
}

std::vector<double> RamseyEnsemble::sample_shifts() const {
    validate();
    std::mt19937_64 rng(seed);
    // Explicit 53-bit conversion keeps streams identical across standard libraries.
    auto jitter = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    const double n = static_cast<double>(n_samples);
    std::vector<double> out(n_samples, 0.0);
    const boost::math::normal_distribution<double> unit;
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double u = (static_cast<double>(k) + jitter()) / n;
        double s = 0.0;
        switch (distribution) {
            case ShiftDistribution::Delta:
                break;
            case ShiftDistribution::Gaussian:
                s = sigma * boost::math::quantile(unit, u);
                break;
            case ShiftDistribution::Uniform:
                s = half_width * (2.0 * u - 1.0);
                break;
            case ShiftDistribution::LatticeSites: {
                const double r = sites.cloud_sigma * std::sqrt(-2.0 * std::log1p(-u));
                const double depth =
                    sites.peak_depth * std::exp(-2.0 * r * r / (sites.waist * sites.waist));
                s = sites.dls_per_recoil * depth;
                break;
            }
        }
        out[k] = shift_scale * s;
    }
    return out;
}

double compensated_sum(const std::vector<double>& values) {
    double sum = 0.0, c = 0.0;
    for (double v : values) {
        const double t = sum + v;
        c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + c;
}

ContrastCurve ensemble_contrast(const RamseyEnsemble& ensemble, const std::vector<double>& tau,
                                const ContrastOptions& options) {
    if (options.phase_points < 3) throw DomainError("need at least 3 phase points");
    for (double t : tau)
        if (!(t >= 0.0)) throw DomainError("hold times must be non-negative");
    const std::vector<double> shifts = ensemble.sample_shifts();
    const int k_phases = options.phase_points;

    struct Point {
        double contrast;
        bool degenerate;
    };
    const auto points = parallel_map(
        tau.size(),
        [&](std::size_t it) {
            std::vector<double> probs(shifts.size());
            double re = 0.0, im = 0.0;
            std::vector<double> cre, cim;
            for (int k = 0; k < k_phases; ++k) {
                const double phi = 2.0 * pi * k / k_phases;
                PulsePair pulses = options.pulses;
                pulses.second.phase += phi;
                for (std::size_t m = 0; m < shifts.size(); ++m)
                    probs[m] = ramsey_probability(ensemble.detuning_nominal + shifts[m], tau[it], pulses);
                const double mean = compensated_sum(probs) / static_cast<double>(shifts.size());
                cre.push_back(mean * std::cos(phi));
                cim.push_back(-mean * std::sin(phi));
            }
            re = compensated_sum(cre);
            im = compensated_sum(cim);
            const double amplitude = 2.0 / k_phases * std::hypot(re, im);
            const double contrast = 2.0 * amplitude;
            if (contrast < 1e-12) return Point{0.0, true};
            return Point{std::min(contrast, 1.0), false};
        },
        options.threads);

    ContrastCurve out;
    out.tau = tau;
    for (const Point& p : points) {
        out.contrast.push_back(p.contrast);
        out.degenerate.push_back(p.degenerate);
    }
    return out;
}

namespace {

struct LinearFit {
    double rss;
    Eigen::Vector3d coef;  // offset, cos, sin
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, double f) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d aty = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const Eigen::Vector3d row(1.0, std::cos(2 * pi * f * x[k]), std::sin(2 * pi * f * x[k]));
        ata += row * row.transpose();
        aty += row * y[k];
    }
    const Eigen::Vector3d coef = ata.ldlt().solve(aty);
    double rss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double m = coef(0) + coef(1) * std::cos(2 * pi * f * x[k]) +
                         coef(2) * std::sin(2 * pi * f * x[k]);
        rss += (y[k] - m) * (y[k] - m);
    }
    return {std::isfinite(rss) ? rss : 1e300, coef};
}

}  // namespace

FringeFit extract_frequency(const std::vector<std::pair<double, double>>& samples) {
    const std::size_t n = samples.size();
    if (n < 5) throw DomainError("underdetermined fit: need at least 5 samples");
    std::vector<double> xs, y;
    double x0 = 0.0, ym = 0.0;
    for (const auto& [x, p] : samples) {
        if (!std::isfinite(x) || !std::isfinite(p)) throw DomainError("samples must be finite");
        x0 += x;
        ym += p;
    }
    x0 /= n;
    ym /= n;
    double var = 0.0;
    for (const auto& [x, p] : samples) {
        xs.push_back(x - x0);
        y.push_back(p);
        var += (p - ym) * (p - ym);
    }
    if (var <= 1e-24 * std::max(1.0, ym * ym) * n) throw NumericalError("constant signal: no fringe to fit");

    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double span = sorted.back() - sorted.front();
    if (!(span > 0.0)) throw DomainError("samples must span a non-zero interval");
    double dmin = span;
    for (std::size_t k = 1; k < n; ++k)
        if (sorted[k] > sorted[k - 1]) dmin = std::min(dmin, sorted[k] - sorted[k - 1]);

    // Coarse periodogram up to the Nyquist frequency of the finest spacing.
    const double fmax = 0.5 / dmin;
    const double df = 1.0 / (10.0 * span);
    const std::size_t nf = std::min<std::size_t>(200000, static_cast<std::size_t>(std::ceil(fmax / df)));
    double best_f = df, best_rss = 1e300;
    for (std::size_t k = 1; k <= nf; ++k) {
        const double f = k * df;
        const double rss = linear_fit(xs, y, f).rss;
        if (rss < best_rss) best_rss = rss, best_f = f;
    }
    {
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = best_f - df, d = best_f + df;
        double f1 = d - r * (d - a), f2 = a + r * (d - a);
        double r1 = linear_fit(xs, y, f1).rss, r2 = linear_fit(xs, y, f2).rss;
        for (int it = 0; it < 80; ++it) {
            if (r1 <= r2) {
                d = f2, f2 = f1, r2 = r1, f1 = d - r * (d - a), r1 = linear_fit(xs, y, f1).rss;
            } else {
                a = f1, f1 = f2, r1 = r2, f2 = a + r * (d - a), r2 = linear_fit(xs, y, f2).rss;
            }
        }
        best_f = 0.5 * (a + d);
    }
    const LinearFit lin = linear_fit(xs, y, best_f);

    // Gauss-Newton on (offset, amplitude, frequency, phase) in centred coordinates.
    Eigen::Vector4d p(lin.coef(0), std::hypot(lin.coef(1), lin.coef(2)), best_f,
                      std::atan2(-lin.coef(2), lin.coef(1)));
    auto jacobian = [&](const Eigen::Vector4d& q, Eigen::MatrixXd& jac, Eigen::VectorXd& res) {
        jac.resize(n, 4);
        res.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double arg = 2 * pi * q(2) * xs[k] + q(3);
            const double c = std::cos(arg), s = std::sin(arg);
            res(k) = y[k] - (q(0) + q(1) * c);
            jac.row(k) << 1.0, c, -q(1) * s * 2 * pi * xs[k], -q(1) * s;
        }
    };
    Eigen::MatrixXd jac;
    Eigen::VectorXd res;
    for (int it = 0; it < 50; ++it) {
        jacobian(p, jac, res);
        const Eigen::Vector4d step = (jac.transpose() * jac).ldlt().solve(jac.transpose() * res);
        if (!step.allFinite()) break;
        p += step;
        if (std::abs(step(2)) <= 1e-15 * std::abs(p(2)) && step.cwiseAbs().maxCoeff() < 1e-15) break;
    }
    jacobian(p, jac, res);
    const double rss = res.squaredNorm();
    const double s2 = rss / static_cast<double>(n - 4);
    Eigen::Matrix4d cov = s2 * (jac.transpose() * jac).inverse();

    // Back to the caller's origin: phase_raw = phase_c - 2 pi f x0.
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t(3, 2) = -2 * pi * x0;
    cov = t * cov * t.transpose();

    FringeFit out;
    out.offset = p(0);
    out.amplitude = p(1);
    out.frequency = p(2);
    out.phase = p(3) - 2 * pi * p(2) * x0;
    if (out.amplitude < 0.0) {
        out.amplitude = -out.amplitude;
        out.phase += pi;
        out.covariance.row(1) *= -1.0;
        out.covariance.col(1) *= -1.0;
    }
    out.phase = std::remainder(out.phase, 2 * pi);
    out.covariance = cov;
    out.residual_rms = std::sqrt(rss / n);
    return out;
}

}  // namespace hfdls
