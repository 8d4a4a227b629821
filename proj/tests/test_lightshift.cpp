#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "hfdls/constants.hpp"
#include "hfdls/errors.hpp"
#include "hfdls/lightshift.hpp"

using namespace hfdls;

namespace {

const AtomSpec& rb() {
    static const AtomSpec atom = load_atom("Rb87");
    return atom;
}

const LightShiftEngine& engine() {
    static const LightShiftEngine e(rb());
    return e;
}

double magic_field() {
    static const double bm = [] {
        const TransitionSpec t = TransitionSpec::two_photon(rb());
        double a = 0.1e-3, b = 1e-3;
        const double fa = dnu_dB(rb(), t, a).value;
        for (int k = 0; k < 60; ++k) {
            const double m = 0.5 * (a + b);
            ((dnu_dB(rb(), t, m).value > 0) == (fa > 0)) ? a = m : b = m;
        }
        return 0.5 * (a + b);
    }();
    return bm;
}

}  // namespace

TEST_CASE("zero intensity reproduces the bare Hamiltonian") {
    const LightConfig dark{806e-9, 0.0, 0.99};
    const Hamiltonian h = engine().hamiltonian(0.3e-3, dark);
    CHECK((h - build_hf_zeeman(rb(), 0.3e-3)).norm() == 0.0);
    const TransitionSpec t = TransitionSpec::two_photon(rb());
    CHECK(engine().transition(magic_field(), dark, t) ==
          transition_frequency(zeeman_eigensystem(rb(), magic_field()), t));
}

TEST_CASE("scalar light shifts a whole manifold rigidly at zero field") {
    const ShiftCoefficients c = shift_coefficients(rb(), 806e-9);
    const LightConfig light{806e-9, 1e4, 0.0};
    const ZeemanEigensystem bare = zeeman_eigensystem(rb(), 0.0);
    const ZeemanEigensystem dressed = engine().dress(0.0, light).eigensystem;
    for (const StateLabel& s : SpinBasis(1.5).labels()) {
        const double k = s.twice_f == 4 ? c.kappa_s_upper : c.kappa_s_lower;
        CHECK(std::abs(dressed.energy(s) - bare.energy(s) - k * 1e4) < 1e-5);
    }
}

TEST_CASE("vector term is Hermitian and reduces to the electronic form when F-resolution vanishes") {
    const LightConfig light{806e-9, 1e5, 0.7};
    const Hamiltonian h = engine().hamiltonian(0.2e-3, light);
    CHECK((h - h.transpose()).norm() == 0.0);

    ShiftCoefficients c = shift_coefficients(rb(), 806e-9);
    c.kappa_v_lower = c.kappa_v_upper = c.kappa_v_centroid;
    const LightShiftEngine electronic(rb(), VectorModel::Electronic);
    CHECK((engine().hamiltonian(0.2e-3, light, c) - electronic.hamiltonian(0.2e-3, light, c))
              .norm() < 1e-9);
}

TEST_CASE("clock transition slope at linear polarization matches first-order theory") {
    const LightConfig light = light_from_depth(rb(), 806e-9, 40.0, 0.0);
    const TransitionSpec clock = TransitionSpec::clock(rb());
    const IntensitySlope s = engine().dnu_dI(20e-6, light, clock);
    const ShiftCoefficients c = shift_coefficients(rb(), 806e-9);
    CHECK(s.per_intensity == doctest::Approx(c.kappa_s_upper - c.kappa_s_lower).epsilon(0.01));
    CHECK(s.per_recoil == doctest::Approx(s.per_intensity * intensity_per_recoil(rb(), c)));
    CHECK(s.intensities.size() == 3);
    CHECK_FALSE(s.noisy);
}

TEST_CASE("full diagonalization agrees with dressed-moment perturbation theory") {
    const TransitionSpec tp = TransitionSpec::two_photon(rb());
    const TransitionSpec clock = TransitionSpec::clock(rb());
    for (double lam : {802e-9, 806e-9, 815e-9}) {
        for (double depth : {10.0, 50.0}) {
            const LightConfig light = light_from_depth(rb(), lam, depth, 0.99);
            const double s2 = engine().dnu_dI(magic_field(), light, tp).per_intensity;
            const double e2 = engine().perturbative_slope(magic_field(), light, tp,
                                                          0.5 * light.intensity);
            CHECK(std::abs(s2 - e2) < 0.01 * std::abs(e2));
            const double s1 = engine().dnu_dI(20e-6, light, clock).per_intensity;
            const double e1 = engine().perturbative_slope(20e-6, light, clock,
                                                          0.5 * light.intensity);
            CHECK(std::abs(s1 - e1) < 0.01 * std::abs(e1));
        }
    }
}

TEST_CASE("dressed frequency is close to linear in intensity") {
    const LightConfig light = light_from_depth(rb(), 806e-9, 40.0, 0.99);
    const IntensitySlope clock = engine().dnu_dI(20e-6, light, TransitionSpec::clock(rb()));
    CHECK(clock.relative_nonlinearity < 1e-3);
    // The two-photon line keeps a small second-order term from the effective field; it
    // stays well below a hertz at this depth.
    const IntensitySlope tp = engine().dnu_dI(magic_field(), light, TransitionSpec::two_photon(rb()));
    CHECK(tp.max_residual < 1.0);
}

TEST_CASE("two-photon sensitivity is strongly suppressed near 806 nm") {
    const RatioReport r = sensitivity_ratio(rb(), 806e-9, 0.99);
    CHECK(r.ratio > 0.0);
    CHECK(r.ratio < 0.10);
    CHECK(sensitivity_ratio(rb(), 802e-9, 0.99).ratio > r.ratio);
    CHECK(sensitivity_ratio(rb(), 815e-9, 0.99).ratio > r.ratio);
}

TEST_CASE("reversing circularity adds scalar and vector shifts") {
    const TransitionSpec tp = TransitionSpec::two_photon(rb());
    const LightConfig plus = light_from_depth(rb(), 806e-9, 40.0, 0.99);
    LightConfig minus = plus;
    minus.circularity = -0.99;
    const double sp = engine().dnu_dI(magic_field(), plus, tp).per_intensity;
    const double sm = engine().dnu_dI(magic_field(), minus, tp).per_intensity;
    CHECK(std::abs(sm) > std::abs(sp));
    CHECK(std::abs(sm) > 5 * std::abs(sp));
}

TEST_CASE("linear polarization gives equal scalar slopes") {
    const RatioReport r = sensitivity_ratio(rb(), 806e-9, 0.0);
    CHECK(std::abs(r.ratio - 1.0) < 1e-6);
}

TEST_CASE("residual clock vector shift follows the quadratic Zeeman cross term") {
    // Oracle: the vector light acts as an extra field B_eff along B, so the clock line
    // moves by k2 ((B + B_eff)^2 - B^2), with k2 read off the bare clock curvature.
    const TransitionSpec clock = TransitionSpec::clock(rb());
    const double b0 = 20e-6;
    const double nu0 = transition_frequency(zeeman_eigensystem(rb(), 0.0), clock);
    const double k2 = (transition_frequency(zeeman_eigensystem(rb(), 1e-4), clock) - nu0) / 1e-8;
    for (double depth : {10.0, 40.0}) {
        const LightConfig light = light_from_depth(rb(), 806e-9, depth, 0.99);
        const ShiftCoefficients c = shift_coefficients(rb(), 806e-9);
        const double beff = c.b_eff_per_intensity * light.intensity * light.circularity;
        const double oracle = k2 * ((b0 + beff) * (b0 + beff) - b0 * b0);
        CHECK(engine().clock_vector_residual(b0, light) == doctest::Approx(oracle).epsilon(0.05));
    }
}

TEST_CASE("dressed labels follow the bare labels") {
    const LightConfig light = light_from_depth(rb(), 806e-9, 50.0, 0.99);
    for (double b : {0.0, 20e-6, 0.3e-3, 1e-3}) {
        const DressedSystem d = engine().dress(b, light);
        const ZeemanEigensystem bare = zeeman_eigensystem(rb(), b);
        for (const StateLabel& s : SpinBasis(1.5).labels())
            CHECK(std::abs(d.eigensystem.state(s).dot(bare.state(s))) > 0.99);
    }
}

TEST_CASE("engine is shareable across threads") {
    const LightConfig light = light_from_depth(rb(), 806e-9, 40.0, 0.99);
    const TransitionSpec tp = TransitionSpec::two_photon(rb());
    const double serial = engine().transition(magic_field(), light, tp);
    std::vector<double> out(4);
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < out.size(); ++k)
        pool.emplace_back([&, k] { out[k] = engine().transition(magic_field(), light, tp); });
    for (auto& th : pool) th.join();
    for (double v : out) CHECK(v == serial);
}

TEST_CASE("argument errors") {
    const LightConfig light{806e-9, 1e4, 0.5};
    const TransitionSpec tp = TransitionSpec::two_photon(rb());
    CHECK_THROWS_AS(engine().dnu_dI(0.3e-3, light, tp, 2), DomainError);
    CHECK_THROWS_AS(engine().dnu_dI(0.3e-3, LightConfig{806e-9, 0.0, 0.5}, tp), DomainError);
    CHECK_THROWS_AS(engine().hamiltonian(-1e-3, light), DomainError);
    CHECK_THROWS_AS(light_from_depth(rb(), 806e-9, -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(engine().transition(0.3e-3, LightConfig{780.241e-9, 1.0, 0.0}, tp),
                    DomainError);
}
