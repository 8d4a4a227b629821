#include "hfdls/lightshift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hfdls/errors.hpp"

namespace hfdls {

LightShiftEngine::LightShiftEngine(AtomSpec atom, VectorModel model)
    : atom_(std::move(atom)), model_(model) {
    const SpinBasis basis(atom_.nuclear_spin());
    p_lower_ = basis.manifold_projector(false);
    p_upper_ = basis.manifold_projector(true);
    two_jz_ = 2.0 * basis.j_z();
}

Hamiltonian LightShiftEngine::hamiltonian(double field, const LightConfig& light) const {
    light.validate();
    return hamiltonian(field, light, shift_coefficients(atom_, light.wavelength));
}

Hamiltonian LightShiftEngine::hamiltonian(double field, const LightConfig& light,
                                          const ShiftCoefficients& c) const {
    light.validate();
    if (!(field >= 0.0)) throw DomainError("field must be non-negative");
    Hamiltonian h = build_hf_zeeman(atom_, field);
    if (light.intensity == 0.0) return h;
    h += light.intensity * (c.kappa_s_lower * p_lower_ + c.kappa_s_upper * p_upper_);
    if (light.circularity == 0.0) return h;
    Eigen::MatrixXd v;
    if (model_ == VectorModel::Electronic) {
        v = c.kappa_v_centroid * two_jz_;
    } else {
        const double cross = 0.5 * (c.kappa_v_lower + c.kappa_v_upper);
        v = c.kappa_v_lower * p_lower_ * two_jz_ * p_lower_ +
            c.kappa_v_upper * p_upper_ * two_jz_ * p_upper_ +
            cross * (p_lower_ * two_jz_ * p_upper_ + p_upper_ * two_jz_ * p_lower_);
        v = 0.5 * (v + v.transpose()).eval();
    }
    h += light.intensity * light.circularity * v;
    return h;
}

DressedSystem LightShiftEngine::dress(double field, const LightConfig& light) const {
    light.validate();
    return dress(field, light, shift_coefficients(atom_, light.wavelength));
}

DressedSystem LightShiftEngine::dress(double field, const LightConfig& light,
                                      const ShiftCoefficients& coeffs) const {
    const ZeemanEigensystem bare = zeeman_eigensystem(atom_, field);
    ZeemanEigensystem dressed = diagonalize(hamiltonian(field, light, coeffs), atom_, field, &bare);
    return {field, light, coeffs, std::move(dressed)};
}

double LightShiftEngine::transition(double field, const LightConfig& light,
                                    const TransitionSpec& t) const {
    return transition_frequency(dress(field, light).eigensystem, t);
}

IntensitySlope LightShiftEngine::dnu_dI(double field, const LightConfig& light,
                                        const TransitionSpec& t, int n_points) const {
    light.validate();
    if (n_points < 3) throw DomainError("intensity grid needs at least 3 points");
    if (!(light.intensity > 0.0)) throw DomainError("maximum intensity must be positive");
    const ShiftCoefficients coeffs = shift_coefficients(atom_, light.wavelength);

    IntensitySlope out;
    for (int k = 0; k < n_points; ++k) {
        LightConfig at = light;
        at.intensity = light.intensity * k / (n_points - 1);
        out.intensities.push_back(at.intensity);
        out.frequencies.push_back(transition_frequency(dress(field, at, coeffs).eigensystem, t));
    }
    // Fit relative to nu(0) so the large hyperfine offset does not enter the sums.
    const double nu0 = out.frequencies.front();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = n_points;
    for (int k = 0; k < n_points; ++k) {
        const double x = out.intensities[k];
        const double y = out.frequencies[k] - nu0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    out.per_intensity = slope;
    out.intercept = nu0 + icept;
    out.per_recoil = slope * intensity_per_recoil(atom_, coeffs);

    bool increasing = true, decreasing = true;
    for (int k = 0; k < n_points; ++k) {
        const double r = out.frequencies[k] - nu0 - (icept + slope * out.intensities[k]);
        out.max_residual = std::max(out.max_residual, std::abs(r));
        if (k > 0) {
            increasing &= out.frequencies[k] >= out.frequencies[k - 1];
            decreasing &= out.frequencies[k] <= out.frequencies[k - 1];
        }
    }
    const double span = std::abs(out.frequencies.back() - nu0);
    out.relative_nonlinearity = span > 0.0 ? out.max_residual / span : 0.0;
    const double noise_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(nu0);
    out.noisy = !(increasing || decreasing) && out.max_residual > noise_floor;
    return out;
}

VectorMoments LightShiftEngine::moments(double field, const LightConfig& light,
                                        const TransitionSpec& t, double intensity) const {
    LightConfig at = light;
    at.intensity = intensity;
    const DressedSystem d = dress(field, at);
    const Eigen::VectorXd lo = d.eigensystem.state(t.lower);
    const Eigen::VectorXd up = d.eigensystem.state(t.upper);
    return {lo.dot(two_jz_ * lo), up.dot(two_jz_ * up)};
}

double LightShiftEngine::perturbative_slope(double field, const LightConfig& light,
                                            const TransitionSpec& t, double intensity) const {
    const ShiftCoefficients coeffs = shift_coefficients(atom_, light.wavelength);
    return first_order_sensitivity(coeffs, atom_, t, light.circularity,
                           moments(field, light, t, intensity), model_);
}

RatioReport LightShiftEngine::sensitivity_ratio(const LightConfig& light, double field_two_photon,
                                                double field_clock) const {
    RatioReport out;
    out.two_photon = dnu_dI(field_two_photon, light, TransitionSpec::two_photon(atom_));
    out.clock = dnu_dI(field_clock, light, TransitionSpec::clock(atom_));
    const double scale = std::max(std::abs(out.clock.intercept), 1.0);
    if (std::abs(out.clock.per_intensity * light.intensity) < 1e-12 * scale)
        throw NumericalError("clock-transition slope vanishes; ratio undefined");
    out.ratio = out.two_photon.per_intensity / out.clock.per_intensity;
    return out;
}

double LightShiftEngine::clock_vector_residual(double field_clock, const LightConfig& light) const {
    LightConfig linear = light;
    linear.circularity = 0.0;
    const TransitionSpec clock = TransitionSpec::clock(atom_);
    return transition(field_clock, light, clock) - transition(field_clock, linear, clock);
}

LightConfig light_from_depth(const AtomSpec& atom, double wavelength, double depth_er,
                             double circularity) {
    if (!(depth_er >= 0.0)) throw DomainError("depth must be non-negative");
    const ShiftCoefficients c = shift_coefficients(atom, wavelength);
    LightConfig light{wavelength, depth_er * intensity_per_recoil(atom, c), circularity};
    light.validate();
    return light;
}

Hamiltonian build_light_hamiltonian(const AtomSpec& atom, double field, const LightConfig& light) {
    return LightShiftEngine(atom).hamiltonian(field, light);
}

double dressed_transition(const AtomSpec& atom, double field, const LightConfig& light,
                          const TransitionSpec& t) {
    return LightShiftEngine(atom).transition(field, light, t);
}

IntensitySlope dnu_dI(const AtomSpec& atom, double field, const LightConfig& light,
                      const TransitionSpec& t) {
    return LightShiftEngine(atom).dnu_dI(field, light, t);
}

RatioReport sensitivity_ratio(const AtomSpec& atom, double wavelength, double circularity,
                              double field_two_photon, double field_clock, double depth_er) {
    const LightConfig light = light_from_depth(atom, wavelength, depth_er, circularity);
    return LightShiftEngine(atom).sensitivity_ratio(light, field_two_photon, field_clock);
}

}  // namespace hfdls
