#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hfdls/constants.hpp"
#include "hfdls/eigensolver.hpp"
#include "hfdls/errors.hpp"
#include "hfdls/spin.hpp"

using namespace hfdls;

namespace {

const AtomSpec& rb() {
    static const AtomSpec atom = load_atom("Rb87");
    return atom;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); }

}  // namespace

TEST_CASE("basis ordering and dimension") {
    const SpinBasis basis(1.5);
    REQUIRE(basis.dimension() == 8);
    CHECK(basis.m_j(0) == 0.5);
    CHECK(basis.m_i(0) == 1.5);
    CHECK(basis.m_i(3) == -1.5);
    CHECK(basis.m_j(4) == -0.5);
    CHECK(basis.m_i(7) == -1.5);
    CHECK(SpinBasis(1.0).dimension() == 6);
    CHECK(basis.labels().size() == 8);
}

TEST_CASE("coupled states are eigenvectors of J.I with the right eigenvalue") {
    const SpinBasis basis(1.5);
    const Eigen::MatrixXd ji = basis.j_dot_i();
    for (const auto& l : basis.labels()) {
        const Eigen::VectorXd v = basis.coupled_state(l);
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-15));
        const double expected = l.twice_f == 4 ? 0.75 : -1.25;
        CHECK((ji * v - expected * v).norm() < 1e-14);
    }
    const Eigen::MatrixXd p2 = basis.manifold_projector(true);
    CHECK((p2 * p2 - p2).norm() < 1e-14);
    CHECK(p2.trace() == doctest::Approx(5.0));
}

TEST_CASE("zero-field Hamiltonian splits into F=1 (x3) and F=2 (x5)") {
    const Hamiltonian h = build_hf_zeeman(rb(), 0.0);
    CHECK((h - h.transpose()).norm() == 0.0);
    const ZeemanEigensystem sys = diagonalize(h, rb(), 0.0);
    const double a = rb().a_hf();
    for (std::size_t k = 0; k < sys.labels().size(); ++k) {
        const double expected = sys.labels()[k].twice_f == 2 ? -1.25 * a : 0.75 * a;
        CHECK(sys.energies()(static_cast<Eigen::Index>(k)) == doctest::Approx(expected).epsilon(1e-13));
    }
    const TransitionSpec clock = TransitionSpec::clock(rb());
    CHECK(transition_frequency(sys, clock) == doctest::Approx(2.0 * a).epsilon(1e-14));
}

TEST_CASE("Hamiltonian is block diagonal in m_F") {
    const SpinBasis basis(1.5);
    const Hamiltonian h = build_hf_zeeman(rb(), 3e-4);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            const double mr = basis.m_j(r) + basis.m_i(r);
            const double mc = basis.m_j(c) + basis.m_i(c);
            if (mr != mc) CHECK(h(r, c) == 0.0);
        }
    const ZeemanEigensystem sys = diagonalize(h, rb(), 3e-4);
    for (const auto& l : sys.labels()) {
        const Eigen::VectorXd v = sys.state(l);
        for (int r = 0; r < 8; ++r)
            if (basis.m_j(r) + basis.m_i(r) != l.m()) CHECK(v(r) == 0.0);
    }
}

TEST_CASE("diagonalization agrees with Breit-Rabi over 0..10 mT") {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double b = 10e-3 * k / 199.0;
        const ZeemanEigensystem sys = zeeman_eigensystem(rb(), b);
        double trace = 0.0;
        for (const auto& l : sys.labels()) {
            const double analytic = breit_rabi_energy(rb(), l, b);
            worst = std::max(worst, rel(sys.energy(l), analytic));
            trace += analytic;
        }
        CHECK(build_hf_zeeman(rb(), b).trace() == doctest::Approx(trace).epsilon(1e-12).scale(1e9));
        const Eigen::MatrixXd v = sys.vectors();
        CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("stretched states are linear in B") {
    const double slope = rb().g_j() * constants::bohr_magneton_hz / 2.0 +
                         1.5 * rb().g_i() * constants::nuclear_magneton_hz;
    for (double b : {0.0, 1e-4, 3.228917e-4, 5e-3, 0.5}) {
        const ZeemanEigensystem sys = zeeman_eigensystem(rb(), b);
        const double offset = 0.75 * rb().a_hf();
        CHECK(rel(sys.energy(StateLabel::of(2, 2)), offset + slope * b) < 1e-10);
        CHECK(rel(sys.energy(StateLabel::of(2, -2)), offset - slope * b) < 1e-10);
        CHECK(rel(breit_rabi_energy(rb(), StateLabel::of(2, -2), b), offset - slope * b) < 1e-12);
    }
}

TEST_CASE("label continuation with a reference is idempotent") {
    const double b = 3.228917e-4;
    const ZeemanEigensystem cold = zeeman_eigensystem(rb(), b);
    const ZeemanEigensystem warm = diagonalize(build_hf_zeeman(rb(), b), rb(), b, &cold);
    CHECK(warm.labels() == cold.labels());
    CHECK((warm.energies() - cold.energies()).norm() == 0.0);

    // scan continuation agrees with the cold-start ordering
    ZeemanEigensystem prev = zeeman_eigensystem(rb(), 0.0);
    for (int k = 1; k <= 50; ++k) {
        const double bk = 2e-2 * k / 50.0;
        ZeemanEigensystem next = diagonalize(build_hf_zeeman(rb(), bk), rb(), bk, &prev);
        const ZeemanEigensystem ref = zeeman_eigensystem(rb(), bk);
        CHECK((next.energies() - ref.energies()).cwiseAbs().maxCoeff() < 1e-3);
        prev = std::move(next);
    }
}

TEST_CASE("label continuation failure is reported") {
    // reference from a different block layout: swap two columns so overlaps collide
    const ZeemanEigensystem sys = zeeman_eigensystem(rb(), 1e-4);
    Eigen::MatrixXd v = sys.vectors();
    v.col(1) = v.col(0);
    const ZeemanEigensystem broken(1e-4, sys.energies(), v, sys.labels());
    CHECK_THROWS_AS(diagonalize(build_hf_zeeman(rb(), 1e-4), rb(), 1e-4, &broken), NumericalError);
}

TEST_CASE("transition frequency antisymmetry and missing labels") {
    const ZeemanEigensystem sys = zeeman_eigensystem(rb(), 2e-4);
    const TransitionSpec t = TransitionSpec::two_photon(rb());
    const TransitionSpec swapped{t.upper, t.lower, t.photon_order};
    CHECK(transition_frequency(sys, swapped) == -transition_frequency(sys, t));
    const TransitionSpec bogus{StateLabel{6, 0}, t.upper, 1};
    CHECK_THROWS_AS(transition_frequency(sys, bogus), DomainError);
    CHECK_THROWS_AS(breit_rabi_energy(rb(), StateLabel{6, 0}, 1e-4), DomainError);
    CHECK_THROWS_AS(StateLabel::of(1, 2), DomainError);
}

TEST_CASE("clock transition is quadratic at low field") {
    const TransitionSpec clock = TransitionSpec::clock(rb());
    // second-order Breit-Rabi expansion: nu = dW (1 + x^2/2)
    const double dw = rb().hyperfine_splitting();
    const double gx = (rb().g_j() * constants::bohr_magneton_hz -
                       rb().g_i() * constants::nuclear_magneton_hz) / dw;
    const double k2 = 0.5 * dw * gx * gx;  // Hz / T^2
    CHECK(k2 == doctest::Approx(575.15e8).epsilon(1e-3));  // 575.15 Hz/G^2
    for (double b : {1e-6, 5e-6, 2e-5}) {
        const double nu = breit_rabi_energy(rb(), clock.upper, b) - breit_rabi_energy(rb(), clock.lower, b);
        CHECK(nu - dw == doctest::Approx(k2 * b * b).epsilon(1e-6));
        const Derivative d = dnu_dB(rb(), clock, b);
        CHECK(d.value == doctest::Approx(2.0 * k2 * b).epsilon(1e-3));
    }
    // 20 uT bias pulls the clock transition up by ~23 Hz
    CHECK(k2 * 20e-6 * 20e-6 == doctest::Approx(23.0).epsilon(0.01));
}

TEST_CASE("two-photon transition is field-insensitive at the magic field") {
    const TransitionSpec t = TransitionSpec::two_photon(rb());
    const Derivative at_magic = dnu_dB(rb(), t, 3.228917e-4);
    CHECK(std::abs(at_magic.value) < 1e3 * 1.0);  // 1 Hz/mT
    const Derivative off = dnu_dB(rb(), t, 3.228917e-4 + 20e-6);
    CHECK(off.value * 1e-6 == doctest::Approx(1.7).epsilon(0.15));
    CHECK(off.error < 1e-3 * std::abs(off.value));
    CHECK_THROWS_AS(dnu_dB(rb(), t, 5e-8), DomainError);
    CHECK_THROWS_AS(dnu_dB(rb(), t, 1e-4, 0.0), DomainError);
}

TEST_CASE("dnu/dB of the m=1 two-photon pair changes sign once in (0, 2 mT)") {
    const TransitionSpec t = TransitionSpec::two_photon(rb());
    int changes = 0;
    double prev = dnu_dB(rb(), t, 1e-6).value;
    for (int k = 1; k <= 400; ++k) {
        const double v = dnu_dB(rb(), t, 2e-3 * k / 400.0).value;
        if ((v > 0) != (prev > 0)) ++changes;
        prev = v;
    }
    CHECK(changes == 1);
}

TEST_CASE("Jacobi eigensolver") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a(8, 8);
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c <= r; ++c) a(r, c) = a(c, r) = u(rng);
        const SymmetricEigen eig = jacobi_eigen(a);
        const Eigen::MatrixXd recon = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
        CHECK((recon - a).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::VectorXd mine = eig.values;
        std::sort(mine.data(), mine.data() + mine.size());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
        CHECK((mine - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    }
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(jacobi_eigen(asym), NumericalError);
    Eigen::MatrixXd hard(2, 2);
    hard << 1.0, 1.0, 1.0, 2.0;
    CHECK_THROWS_AS(jacobi_eigen(hard, 0.0, 0), NumericalError);
}
