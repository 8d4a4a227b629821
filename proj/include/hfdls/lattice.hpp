#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfdls/atom.hpp"
#include "hfdls/polarizability.hpp"

namespace hfdls {

/// Plane wave in the horizontal (x, y) plane.
struct Beam {
    Eigen::Vector3d direction;      // unit wavevector
    Eigen::Vector3cd polarization;  // unit, transverse
    double amplitude = 1.0;         // field amplitude relative to the input beam, in (0, 1]
    double phase = 0.0;             // rad
};

struct BeamSet {
    std::vector<Beam> beams;
    double wavelength = 0.0;  // m
    std::string fold_topology;

    /// Throws DomainError on a non-unit or longitudinal polarization, bad amplitude,
    /// out-of-plane wavevector or non-positive wavelength.
    void validate() const;
    /// Sum of beam intensities in units of the input beam intensity.
    double incoherent_intensity() const;
};

Eigen::Vector3cd field_at(const BeamSet& beams, double x, double y);
/// |E|^2 in units of the input beam intensity.
double intensity_of(const Eigen::Vector3cd& e);
/// (i E* x E) / |E|^2, a real vector of length <= 1; zero where the field vanishes.
Eigen::Vector3d circularity_vector(const Eigen::Vector3cd& e);
double circularity_along(const Eigen::Vector3cd& e, const Eigen::Vector3d& axis);

/// Folded, retro-reflected four-beam lattice: k1 = +x, k2 = +y, k3 = -x, k4 = -y, each with
/// polarization cos(theta) z + e^{i chi} sin(theta) (z x k). `fold_phase` is the extra
/// propagation phase on k2 and k4, `retro_phase` (chi) the polarization phase picked up by the
/// retro-reflected pair k3, k4. Each pass through the fold loses amplitude: beam i carries
/// pass_loss^(i-1).
BeamSet folded_lattice(double wavelength, double theta, double fold_phase, double retro_phase,
                       double pass_loss = 1.0);

struct FoldParameters {
    double theta = 1.0;
    double fold_phase = 1.9634954084936207;  // 5 pi / 8
    double retro_phase = 3.141592653589793;
    double pass_loss = 1.0;
};

/// Double-well configuration with two inequivalent site classes (R, L).
BeamSet double_well_lattice(double wavelength, const FoldParameters& p = {});

inline constexpr double kLossyPassFactor = 0.9;

/// Double-well example with per-pass amplitude loss, giving A ~ 0.99 on R sites along the
/// lossless circularity axis.
BeamSet lossy_double_well_lattice(double wavelength);

/// Two counter-propagating beams along x with identical linear (z) polarization.
BeamSet standing_wave(double wavelength, double retro_loss = 1.0);

enum class SiteClass { None, R, L };

struct SiteReport {
    double x = 0.0;  // m
    double y = 0.0;
    double intensity = 0.0;    // W/m^2
    double circularity = 0.0;  // along e_B
    SiteClass site_class = SiteClass::None;
    std::array<double, 3> potential{};  // Hz, F = I - 1/2, m_F = -1, 0, +1
};

struct UnitCellMap {
    int resolution = 0;
    double period = 0.0;  // m, side of the square cell sampled
    Eigen::Vector3d field_axis;
    std::vector<SiteReport> points;  // row-major, y outer
    std::vector<SiteReport> sites;   // refined intensity maxima, classified R or L

    const SiteReport& at(int ix, int iy) const { return points[iy * resolution + ix]; }
};

struct MapOptions {
    int resolution = 32;
    double beam_intensity = 1.0;  // W/m^2 of the input beam
    Eigen::Vector3d field_axis = Eigen::Vector3d::UnitZ();
    unsigned threads = 1;
};

/// Samples one lattice period in x and y. Potentials use first-order shifts
/// I [kappa_s + kappa_v A <2 J_z>] with <2 J_z> = -m_F / 2 in the lower manifold.
UnitCellMap unit_cell_map(const BeamSet& beams, const ShiftCoefficients& coeffs,
                          const AtomSpec& atom, const MapOptions& options = {});

/// Unit circularity axis at the most circular intensity maximum of the cell.
Eigen::Vector3d circularity_axis(const BeamSet& beams, int resolution = 32);

struct LatticeParams {
    double depth = 0.0;           // E_R
    double recoil = 0.0;          // Hz
    double vertical_depth = 30.0; // E_R

    static LatticeParams for_wavelength(const AtomSpec& atom, double wavelength, double depth,
                                        double vertical_depth = 30.0);
};

/// Peak intensity of the equivalent lambda/2 standing wave: depth * recoil = |kappa| I_peak.
double depth_to_intensity(const LatticeParams& params, const ShiftCoefficients& coeffs);
double intensity_to_depth(double intensity, const LatticeParams& params,
                          const ShiftCoefficients& coeffs);

/// Scalar DLS of the vertical lattice, a constant offset of the transition frequency in Hz.
double vertical_lattice_offset(const AtomSpec& atom, const LatticeParams& params,
                               const ShiftCoefficients& coeffs, const TransitionSpec& t);

inline constexpr double kZeroPointFractionPerAxis = 0.5;

struct ZeroPointCorrection {
    double fraction = 0.0;        // fractional reduction of the fitted |slope|
    bool outside_harmonic = false;
};

/// Harmonic zero-point energy per axis is recoil * sqrt(depth). Its differential part
/// scales as sqrt(depth) and bends the frequency-versus-depth line; returns
/// differential_fraction * axes * (least-squares slope of sqrt(depth) over the grid).
/// `differential_fraction` is d ln E_zp / d ln U, 1/2 for a harmonic well.
/// A single-point grid uses the local derivative.
ZeroPointCorrection zero_point_slope_correction(const std::vector<double>& depths,
                                                double differential_fraction = kZeroPointFractionPerAxis,
                                                int axes = 2);

struct FoldOptimum {
    FoldParameters params;
    double r_circularity = 0.0;  // |A| at R sites
    double intensity_ratio = 0.0;
    int evaluations = 0;
};

/// Coordinate search over the two fold phases maximizing R-site |A| while keeping two
/// inequivalent site classes.
FoldOptimum optimize_fold_phases(double wavelength, FoldParameters start = {}, int rounds = 3);

}  // namespace hfdls
