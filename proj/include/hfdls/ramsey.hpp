#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hfdls {

/// Resonant pulse with H/h = (1/2)[-delta sigma_z + Omega (cos(phi) sigma_x + sin(phi) sigma_y)].
/// duration == 0 encodes an instantaneous pi/2 pulse.
struct PulseSpec {
    double rabi_frequency = 1.0;  // Hz
    double duration = 0.0;        // s
    double phase = 0.0;           // rad

    static PulseSpec pi_half(double rabi_frequency, double phase = 0.0);
    static PulseSpec instantaneous(double phase = 0.0);
    void validate() const;
};

using PulsePair = std::pair<PulseSpec, PulseSpec>;

struct TwoPhotonDrive {
    double rabi_uw = 0.0;                   // Hz
    double rabi_rf = 0.0;                   // Hz
    double intermediate_detuning = 90e3;    // Hz
};

struct EffectiveDrive {
    double rabi = 0.0;                  // Hz
    double differential_ac_shift = 0.0; // Hz
    bool weakly_detuned = false;        // detuning < 10 x the larger Rabi frequency
};

/// Adiabatic elimination of the intermediate level.
EffectiveDrive effective_rabi(const TwoPhotonDrive& drive);

using Spinor = Eigen::Vector2cd;  // (excited, ground)

Eigen::Matrix2cd pulse_unitary(const PulseSpec& pulse, double detuning);
Eigen::Matrix2cd free_unitary(double detuning, double tau);

/// Excited-state probability after pulse - free evolution tau - pulse, starting in ground.
double ramsey_probability(double detuning, double tau, const PulsePair& pulses);

enum class ShiftDistribution { Delta, Gaussian, Uniform, LatticeSites };

/// Per-atom shifts from the radial position in a Gaussian beam: an atom at r sees depth
/// V0 exp(-2 r^2 / w^2) and a shift dls_per_recoil * depth. Positions follow a round
/// Gaussian cloud of rms width cloud_sigma per axis.
struct LatticeSiteModel {
    double peak_depth = 30.0;      // E_R
    double waist = 100e-6;         // m
    double cloud_sigma = 10e-6;    // m
    double dls_per_recoil = 0.0;   // Hz per E_R
};

struct RamseyEnsemble {
    double detuning_nominal = 1000.0;  // Hz
    ShiftDistribution distribution = ShiftDistribution::Delta;
    double sigma = 0.0;       // Hz, Gaussian rms
    double half_width = 0.0;  // Hz, uniform
    LatticeSiteModel sites;
    double shift_scale = 1.0;  // multiplies every sampled shift
    std::size_t n_samples = 1;
    std::uint64_t seed = 0;

    void validate() const;
    /// Stratified, seeded per-atom shifts in Hz, `shift_scale` applied.
    std::vector<double> sample_shifts() const;
};

struct ContrastCurve {
    std::vector<double> tau;
    std::vector<double> contrast;
    std::vector<bool> degenerate;  // flat averaged fringe
};

struct ContrastOptions {
    PulsePair pulses{PulseSpec::instantaneous(), PulseSpec::instantaneous()};
    int phase_points = 8;
    unsigned threads = 1;
};

/// Fringe contrast versus hold time: the second-pulse phase is stepped over one period, the
/// ensemble-averaged signal is fitted by its first Fourier component, contrast = 2 |c1|.
ContrastCurve ensemble_contrast(const RamseyEnsemble& ensemble, const std::vector<double>& tau,
                                const ContrastOptions& options = {});

struct FringeFit {
    double frequency = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double phase = 0.0;
    Eigen::Matrix4d covariance;  // (offset, amplitude, frequency, phase)
    double residual_rms = 0.0;

    double frequency_sigma() const { return std::sqrt(covariance(2, 2)); }
};

/// Least-squares fit of p = offset + amplitude cos(2 pi f x + phase). Throws DomainError
/// for fewer than 5 samples and NumericalError for a constant signal.
FringeFit extract_frequency(const std::vector<std::pair<double, double>>& samples);

/// Neumaier-compensated sum.
double compensated_sum(const std::vector<double>& values);

}  // namespace hfdls
