#include "hfdls/spin.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hfdls/constants.hpp"
#include "hfdls/eigensolver.hpp"
#include "hfdls/errors.hpp"

namespace hfdls {

namespace {

int doubled(double x) { return static_cast<int>(std::lround(2.0 * x)); }

std::string half_integer(int twice) {
    if (twice % 2 == 0) return std::to_string(twice / 2);
    return std::to_string(twice) + "/2";
}

}  // namespace

StateLabel StateLabel::of(double f, double m_f) {
    if (std::abs(2.0 * f - std::round(2.0 * f)) > 1e-9 ||
        std::abs(2.0 * m_f - std::round(2.0 * m_f)) > 1e-9)
        throw DomainError("F and m_F must be half-integers");
    StateLabel l{doubled(f), doubled(m_f)};
    if (l.twice_f < 0 || std::abs(l.twice_m) > l.twice_f || (l.twice_f - l.twice_m) % 2 != 0)
        throw DomainError("invalid label " + l.str());
    return l;
}

std::string StateLabel::str() const {
    return "|F=" + half_integer(twice_f) + ", mF=" + half_integer(twice_m) + ">";
}

TransitionSpec TransitionSpec::two_photon(const AtomSpec& atom) {
    const double i = atom.nuclear_spin();
    return {StateLabel::of(i - 0.5, -1.0), StateLabel::of(i + 0.5, 1.0), 2};
}

TransitionSpec TransitionSpec::clock(const AtomSpec& atom) {
    const double i = atom.nuclear_spin();
    return {StateLabel::of(i - 0.5, 0.0), StateLabel::of(i + 0.5, 0.0), 1};
}

SpinBasis::SpinBasis(double nuclear_spin) : nuclear_spin_(nuclear_spin) {
    const int n = doubled(nuclear_spin) + 1;
    for (double mj : {0.5, -0.5})
        for (int k = 0; k < n; ++k) states_.emplace_back(mj, nuclear_spin - k);
}

Eigen::MatrixXd SpinBasis::j_z() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dimension(), dimension());
    for (int k = 0; k < dimension(); ++k) m(k, k) = states_[k].first;
    return m;
}

Eigen::MatrixXd SpinBasis::i_z() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dimension(), dimension());
    for (int k = 0; k < dimension(); ++k) m(k, k) = states_[k].second;
    return m;
}

Eigen::MatrixXd SpinBasis::j_dot_i() const {
    const double jj = 0.75;
    const double ii = nuclear_spin_ * (nuclear_spin_ + 1.0);
    const int n = dimension();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < n; ++c) {
        const auto [mj, mi] = states_[c];
        m(c, c) = mj * mi;
        for (int r = 0; r < n; ++r) {
            const auto [rj, ri] = states_[r];
            // <r| J+ I- |c>
            if (rj == mj + 1.0 && ri == mi - 1.0)
                m(r, c) += 0.5 * std::sqrt(jj - mj * (mj + 1.0)) * std::sqrt(ii - mi * (mi - 1.0));
            // <r| J- I+ |c>
            if (rj == mj - 1.0 && ri == mi + 1.0)
                m(r, c) += 0.5 * std::sqrt(jj - mj * (mj - 1.0)) * std::sqrt(ii - mi * (mi + 1.0));
        }
    }
    return m;
}

Eigen::MatrixXd SpinBasis::manifold_projector(bool upper) const {
    const double i = nuclear_spin_;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dimension(), dimension());
    // J.I = I/2 on F = I + 1/2 and -(I + 1)/2 on F = I - 1/2.
    const Eigen::MatrixXd p_up = (j_dot_i() + 0.5 * (i + 1.0) * id) / (i + 0.5);
    return upper ? p_up : Eigen::MatrixXd(id - p_up);
}

bool SpinBasis::is_valid(const StateLabel& label) const noexcept {
    const int ti = doubled(nuclear_spin_);
    const bool f_ok = label.twice_f == ti + 1 || (label.twice_f == ti - 1 && ti >= 1);
    return f_ok && std::abs(label.twice_m) <= label.twice_f &&
           (label.twice_f - label.twice_m) % 2 == 0;
}

Eigen::VectorXd SpinBasis::coupled_state(const StateLabel& label) const {
    if (!is_valid(label)) throw DomainError("label " + label.str() + " not in this basis");
    const double i = nuclear_spin_;
    const double m = label.m();
    const bool upper = label.twice_f == doubled(i) + 1;
    const double a = std::sqrt((i + m + 0.5) / (2.0 * i + 1.0));
    const double b = std::sqrt((i - m + 0.5) / (2.0 * i + 1.0));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension());
    for (int k = 0; k < dimension(); ++k) {
        const auto [mj, mi] = states_[k];
        if (mj > 0 && mi == m - 0.5) v(k) = upper ? a : -b;
        if (mj < 0 && mi == m + 0.5) v(k) = upper ? b : a;
    }
    return v;
}

std::vector<StateLabel> SpinBasis::labels() const {
    std::vector<StateLabel> out;
    const int ti = doubled(nuclear_spin_);
    for (int tf : {ti - 1, ti + 1}) {
        if (tf < 0) continue;
        for (int tm = -tf; tm <= tf; tm += 2) out.push_back({tf, tm});
    }
    return out;
}

ZeemanEigensystem::ZeemanEigensystem(double field, Eigen::VectorXd energies,
                                     Eigen::MatrixXd vectors, std::vector<StateLabel> labels)
    : field_(field),
      energies_(std::move(energies)),
      vectors_(std::move(vectors)),
      labels_(std::move(labels)) {}

int ZeemanEigensystem::index_of(const StateLabel& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw DomainError("label " + label.str() + " not present");
    return static_cast<int>(it - labels_.begin());
}

bool ZeemanEigensystem::contains(const StateLabel& label) const noexcept {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

double ZeemanEigensystem::energy(const StateLabel& label) const {
    return energies_(index_of(label));
}

Eigen::VectorXd ZeemanEigensystem::state(const StateLabel& label) const {
    return vectors_.col(index_of(label));
}

Hamiltonian build_hf_zeeman(const AtomSpec& atom, double field) {
    const SpinBasis basis(atom.nuclear_spin());
    const double electron = atom.g_j() * constants::bohr_magneton_hz * field;
    const double nucleus = atom.g_i() * constants::nuclear_magneton_hz * field;
    return atom.a_hf() * basis.j_dot_i() + electron * basis.j_z() + nucleus * basis.i_z();
}

double breit_rabi_energy(const AtomSpec& atom, const StateLabel& label, double field) {
    const SpinBasis basis(atom.nuclear_spin());
    if (!basis.is_valid(label)) throw DomainError("invalid label " + label.str());
    const double i = atom.nuclear_spin();
    const double dw = atom.hyperfine_splitting();
    const double m = label.m();
    const double x = (atom.g_j() * constants::bohr_magneton_hz -
                      atom.g_i() * constants::nuclear_magneton_hz) *
                     field / dw;
    const double base = -dw / (2.0 * (2.0 * i + 1.0)) +
                        atom.g_i() * constants::nuclear_magneton_hz * m * field;
    const bool upper = label.twice_f == doubled(i) + 1;
    if (label.twice_m == doubled(i) + 1) return base + 0.5 * dw * (1.0 + x);
    if (label.twice_m == -(doubled(i) + 1)) return base + 0.5 * dw * (1.0 - x);
    const double root = std::sqrt(1.0 + 4.0 * m * x / (2.0 * i + 1.0) + x * x);
    return base + (upper ? 0.5 : -0.5) * dw * root;
}

namespace {

// Sign convention: the largest-magnitude component of each eigenvector is positive.
void canonicalize_sign(Eigen::MatrixXd& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        Eigen::Index r = 0;
        v.col(c).cwiseAbs().maxCoeff(&r);
        if (v(r, c) < 0.0) v.col(c) *= -1.0;
    }
}

std::vector<StateLabel> labels_by_block(const SymmetricEigen& eig, const SpinBasis& basis,
                                        double a_hf) {
    const int n = basis.dimension();
    std::map<int, std::vector<int>> blocks;  // 2 m_F -> eigen indices
    for (int k = 0; k < n; ++k) {
        std::map<int, double> weight;
        for (int r = 0; r < n; ++r)
            weight[doubled(basis.m_j(r) + basis.m_i(r))] += eig.vectors(r, k) * eig.vectors(r, k);
        const auto best = std::max_element(weight.begin(), weight.end(), [](auto& l, auto& r) {
            return l.second < r.second;
        });
        if (best->second < 1.0 - 1e-9)
            throw NumericalError("eigenvector mixes m_F blocks; labels undefined");
        blocks[best->first].push_back(k);
    }
    const int ti = doubled(basis.nuclear_spin());
    std::vector<StateLabel> out(static_cast<std::size_t>(n));
    for (auto& [tm, idx] : blocks) {
        std::sort(idx.begin(), idx.end(),
                  [&](int l, int r) { return eig.values(l) < eig.values(r); });
        if (std::abs(tm) == ti + 1) {
            if (idx.size() != 1) throw NumericalError("stretched m_F block has wrong size");
            out[idx[0]] = {ti + 1, tm};
        } else {
            if (idx.size() != 2) throw NumericalError("m_F block has wrong size");
            const bool normal = a_hf > 0.0;  // F = I - 1/2 lies lowest at B = 0+
            out[idx[normal ? 0 : 1]] = {ti - 1, tm};
            out[idx[normal ? 1 : 0]] = {ti + 1, tm};
        }
    }
    return out;
}

std::vector<StateLabel> labels_by_overlap(const SymmetricEigen& eig,
                                          const ZeemanEigensystem& ref) {
    const Eigen::MatrixXd overlap = (ref.vectors().transpose() * eig.vectors).cwiseAbs2();
    const auto n = static_cast<std::size_t>(overlap.cols());
    std::vector<StateLabel> out(n);
    std::vector<bool> taken(n, false);
    for (Eigen::Index k = 0; k < overlap.cols(); ++k) {
        Eigen::Index best = 0;
        const double w = overlap.col(k).maxCoeff(&best);
        if (w <= 0.5 || taken[static_cast<std::size_t>(best)]) {
            std::ostringstream msg;
            msg << "label continuation failure: eigenvector " << k << " best overlap " << w
                << " with " << ref.labels()[static_cast<std::size_t>(best)].str()
                << (taken[static_cast<std::size_t>(best)] ? " (already assigned)" : "");
            throw NumericalError(msg.str());
        }
        taken[static_cast<std::size_t>(best)] = true;
        out[static_cast<std::size_t>(k)] = ref.labels()[static_cast<std::size_t>(best)];
    }
    return out;
}

}  // namespace

ZeemanEigensystem diagonalize(const Hamiltonian& h, const AtomSpec& atom, double field,
                              const ZeemanEigensystem* reference) {
    const SpinBasis basis(atom.nuclear_spin());
    if (h.rows() != basis.dimension() || h.cols() != basis.dimension())
        throw DomainError("Hamiltonian dimension does not match the spin basis");
    SymmetricEigen eig = jacobi_eigen(h);
    canonicalize_sign(eig.vectors);

    const std::vector<StateLabel> found = reference ? labels_by_overlap(eig, *reference)
                                                    : labels_by_block(eig, basis, atom.a_hf());
    const std::vector<StateLabel> order = basis.labels();
    Eigen::VectorXd energies(basis.dimension());
    Eigen::MatrixXd vectors(basis.dimension(), basis.dimension());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto it = std::find(found.begin(), found.end(), order[k]);
        if (it == found.end()) throw NumericalError("label " + order[k].str() + " unassigned");
        const auto src = static_cast<Eigen::Index>(it - found.begin());
        energies(static_cast<Eigen::Index>(k)) = eig.values(src);
        vectors.col(static_cast<Eigen::Index>(k)) = eig.vectors.col(src);
    }
    return {field, std::move(energies), std::move(vectors), order};
}

ZeemanEigensystem zeeman_eigensystem(const AtomSpec& atom, double field) {
    return diagonalize(build_hf_zeeman(atom, field), atom, field);
}

double transition_frequency(const ZeemanEigensystem& sys, const TransitionSpec& t) {
    return sys.energy(t.upper) - sys.energy(t.lower);
}

Derivative dnu_dB(const AtomSpec& atom, const TransitionSpec& t, double field, double step) {
    if (!(step > 1e-13)) throw DomainError("field step underflow");
    if (std::abs(field) < step)
        throw DomainError("|field| must be at least one finite-difference step");
    auto nu = [&](double b) { return transition_frequency(zeeman_eigensystem(atom, b), t); };
    const double coarse = (nu(field + step) - nu(field - step)) / (2.0 * step);
    const double h2 = 0.5 * step;
    const double fine = (nu(field + h2) - nu(field - h2)) / (2.0 * h2);
    const double extrapolated = (4.0 * fine - coarse) / 3.0;
    return {extrapolated, std::abs(extrapolated - fine), step};
}

}  // namespace hfdls
