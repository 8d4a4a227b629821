#pragma once

#include <vector>

#include "hfdls/atom.hpp"
#include "hfdls/polarizability.hpp"
#include "hfdls/spin.hpp"

namespace hfdls {

struct DressedSystem {
    double field = 0.0;
    LightConfig light;
    ShiftCoefficients coeffs;
    ZeemanEigensystem eigensystem;
};

/// Least-squares line through the dressed transition frequency on an intensity grid.
struct IntensitySlope {
    double per_intensity = 0.0;  // Hz per W/m^2
    double per_recoil = 0.0;     // Hz per E_R of trap depth
    double intercept = 0.0;      // Hz
    double max_residual = 0.0;   // Hz, largest deviation from the fitted line
    double relative_nonlinearity = 0.0;  // max_residual / |nu(I_max) - nu(0)|
    bool noisy = false;          // non-monotonic samples with residual above the noise floor
    std::vector<double> intensities;
    std::vector<double> frequencies;
};

struct RatioReport {
    double ratio = 0.0;
    IntensitySlope two_photon;
    IntensitySlope clock;
};

/// Non-perturbative light-dressed ground-manifold engine.
///
/// H/h = H_HF + H_Z + I [sum_F kappa_s(F) P_F] + I A V, where P_F projects onto the
/// zero-field F manifolds and V is the vector coupling 2 J_z. In the hyperfine-resolved
/// model V = sum_{F,F'} kappa_v(F,F') P_F 2J_z P_F' with the mean coefficient on the
/// off-diagonal blocks; in the electronic model V = kappa_v(centroid) 2 J_z.
///
/// Immutable after construction; every method is const and safe to call concurrently.
class LightShiftEngine {
public:
    explicit LightShiftEngine(AtomSpec atom, VectorModel model = VectorModel::HyperfineResolved);

    const AtomSpec& atom() const noexcept { return atom_; }
    VectorModel model() const noexcept { return model_; }

    Hamiltonian hamiltonian(double field, const LightConfig& light) const;
    Hamiltonian hamiltonian(double field, const LightConfig& light,
                            const ShiftCoefficients& coeffs) const;

    DressedSystem dress(double field, const LightConfig& light) const;
    DressedSystem dress(double field, const LightConfig& light,
                        const ShiftCoefficients& coeffs) const;

    double transition(double field, const LightConfig& light, const TransitionSpec& t) const;

    /// Slope over the uniform grid {0, ..., light.intensity} (n_points >= 3).
    IntensitySlope dnu_dI(double field, const LightConfig& light, const TransitionSpec& t,
                          int n_points = 3) const;

    /// <2 J_z> of both transition states, dressed at `intensity` (0 gives the bare states).
    VectorMoments moments(double field, const LightConfig& light, const TransitionSpec& t,
                          double intensity) const;

    /// First-order sensitivity with moments taken in the states dressed at `intensity`.
    double perturbative_slope(double field, const LightConfig& light, const TransitionSpec& t,
                              double intensity) const;

    /// Two-photon slope at `field_two_photon` over clock slope at `field_clock`, both on the
    /// same intensity grid.
    RatioReport sensitivity_ratio(const LightConfig& light, double field_two_photon,
                                  double field_clock) const;

    /// Clock-transition shift at full intensity with the given circularity minus the same
    /// with linear light, Hz: the vector contamination of the reference transition.
    double clock_vector_residual(double field_clock, const LightConfig& light) const;

private:
    AtomSpec atom_;
    VectorModel model_;
    Eigen::MatrixXd p_lower_;
    Eigen::MatrixXd p_upper_;
    Eigen::MatrixXd two_jz_;
};

inline constexpr double kDefaultTwoPhotonField = 0.323e-3;  // T
inline constexpr double kDefaultClockField = 20e-6;         // T
inline constexpr double kDefaultDepth = 40.0;               // E_R
inline constexpr double kDefaultCircularity = 0.99;

/// Light of the given depth (in E_R of the equivalent lambda/2 lattice).
LightConfig light_from_depth(const AtomSpec& atom, double wavelength, double depth_er,
                             double circularity);

// Free-function forms.
Hamiltonian build_light_hamiltonian(const AtomSpec& atom, double field, const LightConfig& light);
double dressed_transition(const AtomSpec& atom, double field, const LightConfig& light,
                          const TransitionSpec& t);
IntensitySlope dnu_dI(const AtomSpec& atom, double field, const LightConfig& light,
                      const TransitionSpec& t);
RatioReport sensitivity_ratio(const AtomSpec& atom, double wavelength, double circularity,
                              double field_two_photon = kDefaultTwoPhotonField,
                              double field_clock = kDefaultClockField,
                              double depth_er = kDefaultDepth);

}  // namespace hfdls
