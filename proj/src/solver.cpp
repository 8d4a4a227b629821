#include "hfdls/solver.hpp"

#include <cmath>

#include "hfdls/errors.hpp"

namespace hfdls {

RootResult find_root(const std::function<double(double)>& f, Bracket b, double xtol, double ftol,
                     int max_iterations) {
    if (!(b.lo < b.hi)) throw DomainError("bracket must satisfy lo < hi");
    double a = b.lo, c = b.hi;
    double fa = f(a), fc = f(c);
    if (fa == 0.0) return {a, fa, {a, a}, 0};
    if (fc == 0.0) return {c, fc, {c, c}, 0};
    if ((fa > 0) == (fc > 0)) throw NoRootError("no sign change in bracket");

    bool bisect_next = false;
    for (int it = 1; it <= max_iterations; ++it) {
        const double width = c - a;
        double x = 0.5 * (a + c);
        if (!bisect_next) {
            const double s = a - fa * (c - a) / (fc - fa);
            if (s > a && s < c) x = s;
        }
        const double fx = f(x);
        if (fx == 0.0 || std::abs(fx) < ftol) return {x, fx, {a, c}, it};
        if ((fx > 0) == (fa > 0)) {
            a = x;
            fa = fx;
        } else {
            c = x;
            fc = fx;
        }
        // Fall back to bisection whenever a secant step fails to halve the bracket.
        bisect_next = !bisect_next && (c - a) > 0.5 * width;
        if (c - a < xtol) {
            const double xr = std::abs(fa) < std::abs(fc) ? a : c;
            return {xr, std::abs(fa) < std::abs(fc) ? fa : fc, {a, c}, it};
        }
    }
    throw NumericalError("root finder did not converge");
}

MinimumResult golden_minimize(const std::function<double(double)>& f, Bracket b, double xtol,
                              int max_iterations) {
    if (!(b.lo < b.hi)) throw DomainError("bracket must satisfy lo < hi");
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = b.lo, d = b.hi;
    double x1 = d - r * (d - a), x2 = a + r * (d - a);
    double f1 = f(x1), f2 = f(x2);
    int it = 0;
    while (d - a > xtol && it < max_iterations) {
        ++it;
        if (f1 <= f2) {
            d = x2;
            x2 = x1;
            f2 = f1;
            x1 = d - r * (d - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (d - a);
            f2 = f(x2);
        }
    }
    if (f1 <= f2) return {x1, f1, {a, d}, it};
    return {x2, f2, {a, d}, it};
}

MagicField find_magic_field(const AtomSpec& atom, const TransitionSpec& t, Bracket bracket) {
    auto slope = [&](double b) { return dnu_dB(atom, t, b).value; };
    RootResult r;
    try {
        r = find_root(slope, bracket, kMagicFieldXtol, kMagicFieldFtol);
    } catch (const NoRootError&) {
        throw NoRootError("no magic point in bracket");
    }
    MagicField out;
    out.field = r.x;
    out.dnu_dB = r.f;
    out.iterations = r.iterations;
    const double h = 1e-6;
    out.curvature = (slope(r.x + h) - slope(r.x - h)) / (2 * h);
    return out;
}

ZeroDlsField find_zero_dls_field(const LightShiftEngine& engine, const LightConfig& light,
                                 const TransitionSpec& t, Bracket bracket) {
    auto objective = [&](double b) { return engine.dnu_dI(b, light, t).per_recoil; };
    RootResult r;
    try {
        r = find_root(objective, bracket, kZeroDlsXtol, kZeroDlsFtol);
    } catch (const NoRootError&) {
        throw NoRootError("no zero-DLS field in bracket");
    }
    return {r.x, r.f, dnu_dB(engine.atom(), t, r.x).value, r.iterations};
}

SensitivityReport sensitivity_report(const LightShiftEngine& engine, double field,
                                     const LightConfig& light, const TransitionSpec& t) {
    SensitivityReport out;
    out.species = engine.atom().species();
    out.field = field;
    out.light = light;
    out.transition = t;
    const IntensitySlope s = engine.dnu_dI(field, light, t, out.intensity_points);
    out.nu = s.frequencies.back();
    out.dnu_dI = s.per_intensity;
    out.dnu_dI_per_recoil = s.per_recoil;
    out.nonlinearity = s.max_residual;
    out.noisy = s.noisy;
    if (field >= out.field_step) {
        const Derivative d = dnu_dB(engine.atom(), t, field, out.field_step);
        out.dnu_dB = d.value;
        out.dnu_dB_error = d.error;
    }
    return out;
}

std::vector<double> uniform_grid(Bracket range, int n_points) {
    if (!(range.lo <= range.hi)) throw DomainError("range must be increasing");
    if (range.lo == range.hi) return {range.lo};
    if (n_points < 2) throw DomainError("scan needs at least 2 points");
    std::vector<double> g(n_points);
    for (int k = 0; k < n_points; ++k)
        g[k] = k + 1 == n_points ? range.hi
                                 : range.lo + (range.hi - range.lo) * k / (n_points - 1);
    return g;
}

ScanResult scan_wavelength(const LightShiftEngine& engine, const WavelengthScan& scan,
                           unsigned threads) {
    const AtomSpec& atom = engine.atom();
    const TransitionSpec tp = TransitionSpec::two_photon(atom);
    const TransitionSpec clock = TransitionSpec::clock(atom);
    auto evaluate = [&](double lam) {
        const LightConfig light = light_from_depth(atom, lam, scan.depth_er, scan.circularity);
        SensitivityReport rep = sensitivity_report(engine, scan.field_two_photon, light, tp);
        const double c = engine.dnu_dI(scan.field_clock, light, clock).per_intensity;
        if (c == 0.0) throw NumericalError("clock-transition slope vanishes; ratio undefined");
        rep.ratio = rep.dnu_dI / c;
        return rep;
    };

    ScanResult out;
    out.axis = ScanAxis::Wavelength;
    out.grid = uniform_grid(scan.range, scan.n_points);
    out.values = parallel_map(out.grid.size(), [&](std::size_t k) { return evaluate(out.grid[k]); },
                              threads);
    for (std::size_t k = 1; k + 1 < out.grid.size(); ++k) {
        const double r = *out.values[k].ratio;
        if (r < *out.values[k - 1].ratio && r < *out.values[k + 1].ratio) {
            const Bracket b{out.grid[k - 1], out.grid[k + 1]};
            const MinimumResult m =
                golden_minimize([&](double lam) { return *evaluate(lam).ratio; }, b, 1e-12);
            out.extrema.push_back({Extremum::Kind::Minimum, b, m.x, m.f});
        }
    }
    return out;
}

ScanResult scan_field(const LightShiftEngine& engine, const LightConfig& light,
                      const TransitionSpec& t, Bracket range, int n_points, unsigned threads) {
    ScanResult out;
    out.axis = ScanAxis::Field;
    out.grid = uniform_grid(range, n_points);
    if (out.grid.front() < 0.0) throw DomainError("field must be non-negative");
    out.values = parallel_map(
        out.grid.size(),
        [&](std::size_t k) { return sensitivity_report(engine, out.grid[k], light, t); }, threads);
    for (std::size_t k = 0; k + 1 < out.grid.size(); ++k) {
        const double f0 = out.values[k].dnu_dI_per_recoil;
        const double f1 = out.values[k + 1].dnu_dI_per_recoil;
        if (f0 == 0.0) {
            out.extrema.push_back({Extremum::Kind::Root, {out.grid[k], out.grid[k]}, out.grid[k], 0.0});
        } else if ((f0 > 0) != (f1 > 0) && f1 != 0.0) {
            const Bracket b{out.grid[k], out.grid[k + 1]};
            const ZeroDlsField z = find_zero_dls_field(engine, light, t, b);
            out.extrema.push_back({Extremum::Kind::Root, b, z.field, z.dnu_dI});
        }
    }
    if (out.values.back().dnu_dI_per_recoil == 0.0)
        out.extrema.push_back(
            {Extremum::Kind::Root, {out.grid.back(), out.grid.back()}, out.grid.back(), 0.0});
    return out;
}

}  // namespace hfdls
