#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfdls/atom.hpp"

namespace hfdls {

/// Ground-manifold Hamiltonian divided by h, in Hz, expressed in a SpinBasis.
using Hamiltonian = Eigen::MatrixXd;

/// Hyperfine level label |F, m_F>. Stored as doubled quantum numbers so that
/// half-integer F (integer nuclear spin) is exact.
struct StateLabel {
    int twice_f = 0;
    int twice_m = 0;

    static StateLabel of(double f, double m_f);

    double f() const noexcept { return 0.5 * twice_f; }
    double m() const noexcept { return 0.5 * twice_m; }
    std::string str() const;

    friend bool operator==(const StateLabel&, const StateLabel&) = default;
};

struct TransitionSpec {
    StateLabel lower;
    StateLabel upper;
    int photon_order = 1;

    /// |F=1, m_F=-1> <-> |F=2, m_F=+1> for I = 3/2, and its analogue |I-1/2, -1> <-> |I+1/2, +1>.
    static TransitionSpec two_photon(const AtomSpec& atom);
    /// |I-1/2, 0> <-> |I+1/2, 0>.
    static TransitionSpec clock(const AtomSpec& atom);
};

/// Product basis |m_J, m_I> with J = 1/2, enumerated m_J descending then m_I descending.
class SpinBasis {
public:
    explicit SpinBasis(double nuclear_spin);

    double nuclear_spin() const noexcept { return nuclear_spin_; }
    int dimension() const noexcept { return static_cast<int>(states_.size()); }
    double m_j(int index) const { return states_.at(static_cast<std::size_t>(index)).first; }
    double m_i(int index) const { return states_.at(static_cast<std::size_t>(index)).second; }

    Eigen::MatrixXd j_z() const;
    Eigen::MatrixXd i_z() const;
    /// J.I = J_z I_z + (J+ I- + J- I+)/2.
    Eigen::MatrixXd j_dot_i() const;
    /// Projector onto the zero-field manifold F = I + 1/2 (upper = true) or I - 1/2.
    Eigen::MatrixXd manifold_projector(bool upper) const;
    /// Zero-field coupled state |F, m_F> from Clebsch-Gordan coefficients.
    Eigen::VectorXd coupled_state(const StateLabel& label) const;
    /// All valid labels, F ascending then m_F ascending.
    std::vector<StateLabel> labels() const;
    bool is_valid(const StateLabel& label) const noexcept;

private:
    double nuclear_spin_;
    std::vector<std::pair<double, double>> states_;
};

class ZeemanEigensystem {
public:
    ZeemanEigensystem(double field, Eigen::VectorXd energies, Eigen::MatrixXd vectors,
                      std::vector<StateLabel> labels);

    double field() const noexcept { return field_; }
    /// Energies in Hz, ordered like labels().
    const Eigen::VectorXd& energies() const noexcept { return energies_; }
    /// Column k is the eigenvector carrying labels()[k].
    const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }
    const std::vector<StateLabel>& labels() const noexcept { return labels_; }

    bool contains(const StateLabel& label) const noexcept;
    double energy(const StateLabel& label) const;
    Eigen::VectorXd state(const StateLabel& label) const;

private:
    int index_of(const StateLabel& label) const;

    double field_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXd vectors_;
    std::vector<StateLabel> labels_;
};

/// (H_HF + H_Z)/h in Hz for a field `field` (T) along the quantization axis.
Hamiltonian build_hf_zeeman(const AtomSpec& atom, double field);

/// Closed-form Breit-Rabi energy for J = 1/2, in Hz. Stretched states use their
/// exact linear expression so the branch stays continuous through x = 1.
double breit_rabi_energy(const AtomSpec& atom, const StateLabel& label, double field);

/// Diagonalizes `h` and attaches (F, m_F) labels.
///
/// With a reference eigensystem, each eigenvector takes the label of the reference
/// state it overlaps most; the assignment must be a permutation with every overlap
/// above 1/2 or a NumericalError is thrown. Without a reference, m_F is read from
/// the block the eigenvector lives in and F from energy order inside the block, which
/// is the ordering continued adiabatically from B = 0+.
ZeemanEigensystem diagonalize(const Hamiltonian& h, const AtomSpec& atom, double field,
                              const ZeemanEigensystem* reference = nullptr);

/// Bare hyperfine-Zeeman eigensystem at `field`.
ZeemanEigensystem zeeman_eigensystem(const AtomSpec& atom, double field);

/// E(upper) - E(lower), in Hz.
double transition_frequency(const ZeemanEigensystem& sys, const TransitionSpec& t);

struct Derivative {
    double value = 0.0;  // Richardson-extrapolated central difference
    double error = 0.0;  // |extrapolated - finest central difference|
    double step = 0.0;   // coarse step used
};

inline constexpr double kDefaultFieldStep = 1e-7;  // T

/// d nu / dB in Hz/T from central differences at steps h and h/2 with Richardson
/// extrapolation. `field` is the signed projection on the quantization axis and must
/// satisfy |field| >= step.
Derivative dnu_dB(const AtomSpec& atom, const TransitionSpec& t, double field,
                  double step = kDefaultFieldStep);

}  // namespace hfdls
