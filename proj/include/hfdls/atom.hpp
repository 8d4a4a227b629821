#pragma once

#include <array>
#include <string>
#include <string_view>

namespace hfdls {

enum class LineLabel { D1, D2 };

struct SpectralLine {
    LineLabel label;
    double frequency;          // Hz
    double natural_linewidth;  // Hz, Gamma / 2pi
};

/// Ground-state parameters of a single-valence-electron atom (J = 1/2 ground term).
///
/// The nuclear Zeeman term enters the Hamiltonian as +g_I mu_N m_I B, so g_I is
/// negative for 87Rb (positive nuclear moment). All fields are fixed at
/// construction; the constructor enforces the physical invariants.
class AtomSpec {
public:
    AtomSpec(std::string species, double nuclear_spin, double g_j, double g_i, double a_hf,
             double mass, SpectralLine d1, SpectralLine d2);

    const std::string& species() const noexcept { return species_; }
    double nuclear_spin() const noexcept { return nuclear_spin_; }
    double g_j() const noexcept { return g_j_; }
    double g_i() const noexcept { return g_i_; }
    double a_hf() const noexcept { return a_hf_; }  // Hz
    double mass() const noexcept { return mass_; }  // kg
    const SpectralLine& line(LineLabel label) const noexcept {
        return label == LineLabel::D1 ? lines_[0] : lines_[1];
    }
    const std::array<SpectralLine, 2>& d_lines() const noexcept { return lines_; }

    /// Zero-field splitting between F = I + 1/2 and F = I - 1/2, A (I + 1/2), in Hz.
    double hyperfine_splitting() const noexcept { return a_hf_ * (nuclear_spin_ + 0.5); }

    /// Number of nuclear sublevels, 2I + 1.
    int nuclear_multiplicity() const noexcept {
        return static_cast<int>(2.0 * nuclear_spin_ + 0.5) + 1;
    }

private:
    std::string species_;
    double nuclear_spin_;
    double g_j_;
    double g_i_;
    double a_hf_;
    double mass_;
    std::array<SpectralLine, 2> lines_;
};

/// Looks up a species in the bundled registry. Throws DomainError for unknown names.
AtomSpec load_atom(std::string_view species);

/// Version string of the bundled atomic-data registry.
std::string registry_version();

/// Raw registry JSON, including per-value source citations.
std::string_view registry_text();

/// Recoil energy h / (2 m lambda^2), in Hz.
double recoil_energy(const AtomSpec& atom, double wavelength);

/// D2 minus D1 line frequency, in Hz.
double fine_structure_splitting(const AtomSpec& atom);

}  // namespace hfdls
