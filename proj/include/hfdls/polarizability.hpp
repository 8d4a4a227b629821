#pragma once

#include "hfdls/atom.hpp"
#include "hfdls/spin.hpp"

namespace hfdls {

/// Trapping light at the atom. `circularity` is the projection (i e* x e) . e_B of the
/// polarization pseudo-vector on the static-field axis; B_eff is taken collinear with B.
struct LightConfig {
    double wavelength = 0.0;  // m
    double intensity = 0.0;   // W/m^2, total local intensity
    double circularity = 0.0;

    void validate() const;
};

/// How the vector light shift couples to the ground manifold.
enum class VectorModel {
    /// Vector coefficient evaluated with detunings from each hyperfine level, so the
    /// two F manifolds see slightly different effective fields.
    HyperfineResolved,
    /// One vector coefficient at the hyperfine centroid: a pure electronic B_eff.
    Electronic,
};

/// Far-detuned D1/D2 light-shift coefficients, all in Hz per W/m^2.
///
/// For ground level F, polarization circularity P and electron projection m_J the
/// shift is I [kappa_s(F) + kappa_v(F) P 2m_J], with
///   kappa_s(F) = sum_L C_L w_L (1/Delta_L(F) - 1/Sigma_L(F)),
///   kappa_v(F) = C_D2 (1/Delta_D2 + 1/Sigma_D2) - C_D1 (1/Delta_D1 + 1/Sigma_D1),
/// C_L = pi c^2 Gamma_L / (2 omega_L^3 h), weights w_D2 = 2 and w_D1 = 1, Delta the
/// rotating and Sigma the counter-rotating angular detuning from level F.
struct ShiftCoefficients {
    double wavelength = 0.0;
    double kappa_s_lower = 0.0;  // F = I - 1/2
    double kappa_s_upper = 0.0;  // F = I + 1/2
    double kappa_v_lower = 0.0;
    double kappa_v_upper = 0.0;
    double kappa_s_centroid = 0.0;
    double kappa_v_centroid = 0.0;
    /// B_eff per unit intensity and unit circularity, T per W/m^2, from
    /// g_J mu_B B_eff J_z = kappa_v 2 J_z at the centroid.
    double b_eff_per_intensity = 0.0;
    /// (2F+1)-weighted mean scalar coefficient; sets the trap depth.
    double kappa_trap = 0.0;

    double kappa_s(const StateLabel& label, const AtomSpec& atom) const;
    double kappa_v(const StateLabel& label, const AtomSpec& atom,
                   VectorModel model = VectorModel::HyperfineResolved) const;
    /// Same coefficients with the scalar part removed.
    ShiftCoefficients without_scalar() const;
};

/// Throws DomainError("near-resonance") within 1000 linewidths of either D line.
ShiftCoefficients shift_coefficients(const AtomSpec& atom, double wavelength);

/// Intensity producing one recoil energy of trap depth, W/m^2 per E_R.
double intensity_per_recoil(const AtomSpec& atom, const ShiftCoefficients& coeffs);

struct VectorMoments {
    double lower = 0.0;  // <2 J.e_B> in the lower state
    double upper = 0.0;
};

/// First-order d nu / dI in Hz per W/m^2:
/// (kappa_s(F') - kappa_s(F)) + A (kappa_v(F') m' - kappa_v(F) m), with m the
/// electron-spin moments of the two states at the operating point.
double first_order_sensitivity(const ShiftCoefficients& coeffs, const AtomSpec& atom,
                       const TransitionSpec& t, double circularity, const VectorMoments& moments,
                       VectorModel model = VectorModel::HyperfineResolved);

}  // namespace hfdls
