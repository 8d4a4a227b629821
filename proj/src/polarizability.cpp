#include "hfdls/polarizability.hpp"

#include <cmath>
#include <string>

#include "hfdls/constants.hpp"
#include "hfdls/errors.hpp"

namespace hfdls {

void LightConfig::validate() const {
    if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
    if (!(intensity >= 0.0) || !std::isfinite(intensity))
        throw DomainError("intensity must be finite and non-negative");
    if (!(std::abs(circularity) <= 1.0)) throw DomainError("|circularity| must not exceed 1");
}

namespace {

struct LevelCoefficients {
    double scalar;
    double vector;
};

// Light shift of a ground level sitting `level_energy` Hz above the hyperfine centroid.
LevelCoefficients level_coefficients(const AtomSpec& atom, double laser_frequency,
                                     double level_energy) {
    using constants::pi;
    LevelCoefficients out{0.0, 0.0};
    for (const SpectralLine& line : atom.d_lines()) {
        const double omega0 = 2.0 * pi * line.frequency;
        const double gamma = 2.0 * pi * line.natural_linewidth;
        const double c = pi * constants::speed_of_light * constants::speed_of_light * gamma /
                         (2.0 * omega0 * omega0 * omega0) / constants::planck;
        const double resonance = line.frequency - level_energy;
        const double rotating = 2.0 * pi * (laser_frequency - resonance);
        const double counter = 2.0 * pi * (laser_frequency + resonance);
        const bool d2 = line.label == LineLabel::D2;
        out.scalar += c * (d2 ? 2.0 : 1.0) * (1.0 / rotating - 1.0 / counter);
        out.vector += c * (d2 ? 1.0 : -1.0) * (1.0 / rotating + 1.0 / counter);
    }
    return out;
}

bool is_upper(const StateLabel& label, const AtomSpec& atom) {
    return label.twice_f == static_cast<int>(std::lround(2.0 * atom.nuclear_spin())) + 1;
}

}  // namespace

double ShiftCoefficients::kappa_s(const StateLabel& label, const AtomSpec& atom) const {
    return is_upper(label, atom) ? kappa_s_upper : kappa_s_lower;
}

double ShiftCoefficients::kappa_v(const StateLabel& label, const AtomSpec& atom,
                                  VectorModel model) const {
    if (model == VectorModel::Electronic) return kappa_v_centroid;
    return is_upper(label, atom) ? kappa_v_upper : kappa_v_lower;
}

ShiftCoefficients ShiftCoefficients::without_scalar() const {
    ShiftCoefficients out = *this;
    out.kappa_s_lower = out.kappa_s_upper = out.kappa_s_centroid = 0.0;
    return out;
}

ShiftCoefficients shift_coefficients(const AtomSpec& atom, double wavelength) {
    if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
    const double nu = constants::speed_of_light / wavelength;
    for (const SpectralLine& line : atom.d_lines()) {
        if (std::abs(nu - line.frequency) < 1000.0 * line.natural_linewidth)
            throw DomainError("near-resonance: laser within 1000 linewidths of " +
                              std::string(line.label == LineLabel::D1 ? "D1" : "D2"));
    }
    const double i = atom.nuclear_spin();
    const double e_upper = atom.a_hf() * i / 2.0;
    const double e_lower = -atom.a_hf() * (i + 1.0) / 2.0;
    const LevelCoefficients lo = level_coefficients(atom, nu, e_lower);
    const LevelCoefficients up = level_coefficients(atom, nu, e_upper);
    const LevelCoefficients centroid = level_coefficients(atom, nu, 0.0);

    ShiftCoefficients out;
    out.wavelength = wavelength;
    out.kappa_s_lower = lo.scalar;
    out.kappa_s_upper = up.scalar;
    out.kappa_v_lower = lo.vector;
    out.kappa_v_upper = up.vector;
    out.kappa_s_centroid = centroid.scalar;
    out.kappa_v_centroid = centroid.vector;
    out.b_eff_per_intensity = 2.0 * centroid.vector / (atom.g_j() * constants::bohr_magneton_hz);
    const double g_lo = 2.0 * i;        // 2F + 1 for F = I - 1/2
    const double g_up = 2.0 * i + 2.0;  // 2F + 1 for F = I + 1/2
    out.kappa_trap = (g_lo * lo.scalar + g_up * up.scalar) / (g_lo + g_up);
    return out;
}

double intensity_per_recoil(const AtomSpec& atom, const ShiftCoefficients& coeffs) {
    if (!(coeffs.kappa_trap < 0.0))
        throw DomainError("blue-detuned light: no trap depth to convert");
    return recoil_energy(atom, coeffs.wavelength) / std::abs(coeffs.kappa_trap);
}

double first_order_sensitivity(const ShiftCoefficients& coeffs, const AtomSpec& atom,
                       const TransitionSpec& t, double circularity, const VectorMoments& moments,
                       VectorModel model) {
    const double scalar = coeffs.kappa_s(t.upper, atom) - coeffs.kappa_s(t.lower, atom);
    const double vector = coeffs.kappa_v(t.upper, atom, model) * moments.upper -
                          coeffs.kappa_v(t.lower, atom, model) * moments.lower;
    return scalar + circularity * vector;
}

}  // namespace hfdls
