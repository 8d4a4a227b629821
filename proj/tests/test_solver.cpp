#include <doctest.h>

#include <atomic>
#include <cmath>

#include "hfdls/errors.hpp"
#include "hfdls/solver.hpp"

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

}  // namespace

TEST_CASE("root finder on closed-form functions") {
    const RootResult r = find_root([](double x) { return std::cos(x) - x; }, {0, 1}, 1e-14, 0);
    CHECK(r.x == doctest::Approx(0.7390851332151607).epsilon(1e-13));
    CHECK(r.bracket.lo <= r.x);
    CHECK(r.x <= r.bracket.hi);
    CHECK(r.iterations < 60);

    const RootResult cube = find_root([](double x) { return x * x * x - 2; }, {0, 4}, 1e-13, 0);
    CHECK(cube.x == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));

    CHECK(find_root([](double x) { return x; }, {0, 1}, 1e-9, 0).x == 0.0);
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1; }, {-1, 1}, 1e-9, 0), NoRootError);
    CHECK_THROWS_AS(find_root([](double x) { return x; }, {1, -1}, 1e-9, 0), DomainError);
}

TEST_CASE("secant fallback keeps bracketing on a flat-then-steep function") {
    auto f = [](double x) { return std::pow(x, 15) - 0.5; };
    const RootResult r = find_root(f, {0, 1.2}, 1e-13, 0);
    CHECK(r.x == doctest::Approx(std::pow(0.5, 1.0 / 15)).epsilon(1e-12));
}

TEST_CASE("golden section") {
    const MinimumResult m = golden_minimize([](double x) { return (x - 0.3) * (x - 0.3) + 2; },
                                            {-1, 2}, 1e-10);
    CHECK(std::abs(m.x - 0.3) < 1e-7);
    CHECK(m.f == doctest::Approx(2.0));
    CHECK(m.bracket.hi - m.bracket.lo <= 1e-10);
}

TEST_CASE("magic field of the two-photon transition") {
    const MagicField m = find_magic_field(rb(), TransitionSpec::two_photon(rb()));
    CHECK(m.field * 1e3 == doctest::Approx(0.3228917).epsilon(5e-7 / 0.3228917));
    CHECK(std::abs(m.dnu_dB) <= kMagicFieldFtol * 10);
    CHECK(m.curvature > 0);
    // Residual sensitivity 20 uT away follows from the curvature.
    CHECK(m.curvature * 20e-6 * 1e-6 == doctest::Approx(1.7).epsilon(0.15));
}

TEST_CASE("mirror transition shares the magic field") {
    // (1,+1) <-> (2,-1): m -> -m maps it onto the same structure with the field reversed.
    // Solved independently by diagonalization on the negative-field side.
    const TransitionSpec mirror{StateLabel::of(1, 1), StateLabel::of(2, -1), 2};
    const MagicField a = find_magic_field(rb(), TransitionSpec::two_photon(rb()));
    const MagicField b = find_magic_field(rb(), mirror, {-1e-3, -0.1e-3});
    CHECK(std::abs(a.field + b.field) < 1e-11);
    CHECK_THROWS_AS(find_magic_field(rb(), mirror), NoRootError);
}

TEST_CASE("clock transition has no nonzero magic field") {
    CHECK_THROWS_AS(find_magic_field(rb(), TransitionSpec::clock(rb()), {1e-5, 1e-3}), NoRootError);
}

TEST_CASE("zero-DLS field") {
    const TransitionSpec tp = TransitionSpec::two_photon(rb());
    const LightConfig light = light_from_depth(rb(), 806e-9, 30.0, 0.99);
    const ZeroDlsField z = find_zero_dls_field(engine(), light, tp);
    CHECK(z.field > 0.3228917e-3);
    CHECK(std::abs(z.field - 0.343e-3) < 0.010e-3);
    CHECK(std::abs(z.dnu_dI) < kZeroDlsFtol * 10);
    CHECK(z.dnu_dB > 0);

    SUBCASE("linear polarization cannot cancel the scalar shift") {
        LightConfig lin = light;
        lin.circularity = 0.0;
        CHECK_THROWS_AS(find_zero_dls_field(engine(), lin, tp), NoRootError);
    }
}

TEST_CASE("field scan: affine crossing through zero") {
    const TransitionSpec tp = TransitionSpec::two_photon(rb());
    const LightConfig light = light_from_depth(rb(), 806e-9, 30.0, 0.99);
    const ScanResult s = scan_field(engine(), light, tp, {0.30e-3, 0.38e-3}, 9);
    REQUIRE(s.grid.size() == 9);
    REQUIRE(s.extrema.size() == 1);
    CHECK(s.extrema[0].kind == Extremum::Kind::Root);
    CHECK(s.extrema[0].bracket.lo <= s.extrema[0].x);
    CHECK(s.extrema[0].x <= s.extrema[0].bracket.hi);
    // The vector term grows with B - B_m, pushing the slope from negative to positive.
    CHECK(s.values.front().dnu_dI_per_recoil < 0);
    CHECK(s.values.back().dnu_dI_per_recoil > 0);

    // Least-squares line through the curve; residual below 1% of the span.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = s.grid.size();
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        const double x = s.grid[k], y = s.values[k].dnu_dI_per_recoil;
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double m = (n * sxy - sx * sy) / (n * sxx - sx * sx), c = (sy - m * sx) / n;
    const double span = s.values.back().dnu_dI_per_recoil - s.values.front().dnu_dI_per_recoil;
    for (std::size_t k = 0; k < s.grid.size(); ++k)
        CHECK(std::abs(s.values[k].dnu_dI_per_recoil - (m * s.grid[k] + c)) < 0.01 * std::abs(span));

    CHECK_THROWS_AS(scan_field(engine(), light, tp, {0.38e-3, 0.30e-3}, 9), DomainError);
}

TEST_CASE("wavelength scan locates the near-magic minimum") {
    WavelengthScan w;
    w.n_points = 14;
    const ScanResult s = scan_wavelength(engine(), w, 2);
    REQUIRE(s.extrema.size() == 1);
    const Extremum& e = s.extrema[0];
    CHECK(std::abs(e.x - 806e-9) < 3e-9);
    CHECK(e.value < 0.10);
    CHECK(1 - e.value > 0.90);
    for (const SensitivityReport& r : s.values) REQUIRE(r.ratio.has_value());

    SUBCASE("refinement does not move the minimum by more than a coarse cell") {
        WavelengthScan fine = w;
        fine.n_points = 27;
        const ScanResult f = scan_wavelength(engine(), fine);
        REQUIRE(f.extrema.size() == 1);
        CHECK(std::abs(f.extrema[0].x - e.x) < s.grid[1] - s.grid[0]);
    }
    SUBCASE("threading does not change results") {
        const ScanResult serial = scan_wavelength(engine(), w, 1);
        for (std::size_t k = 0; k < s.values.size(); ++k)
            CHECK(serial.values[k].ratio == s.values[k].ratio);
    }
    SUBCASE("degenerate range") {
        WavelengthScan one = w;
        one.range = {806e-9, 806e-9};
        const ScanResult d = scan_wavelength(engine(), one);
        CHECK(d.grid.size() == 1);
        CHECK(d.extrema.empty());
    }
}

TEST_CASE("parallel_map keeps order and propagates errors") {
    const auto out = parallel_map(100, [](std::size_t k) { return k * k; }, 4);
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == k * k);
    CHECK_THROWS_AS(parallel_map(10,
                                 [](std::size_t k) -> int {
                                     if (k == 7) throw NumericalError("boom");
                                     return 0;
                                 },
                                 3),
                    NumericalError);
    CHECK(parallel_map(0, [](std::size_t) { return 1; }, 4).empty());
}

TEST_CASE("uniform grid") {
    const auto g = uniform_grid({1, 2}, 5);
    CHECK(g.size() == 5);
    CHECK(g.back() == 2.0);
    CHECK(g[2] == 1.5);
    CHECK_THROWS_AS(uniform_grid({1, 2}, 1), DomainError);
}
