#include "hfdls/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "hfdls/constants.hpp"
#include "hfdls/errors.hpp"
#include "hfdls/parallel.hpp"

namespace hfdls {

using cd = std::complex<double>;

void BeamSet::validate() const {
    if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
    if (beams.empty()) throw DomainError("beam set is empty");
    for (const Beam& b : beams) {
        if (std::abs(b.direction.norm() - 1.0) > 1e-12 || std::abs(b.direction.z()) > 1e-12)
            throw DomainError("beam direction must be a horizontal unit vector");
        if (std::abs(b.polarization.norm() - 1.0) > 1e-12)
            throw DomainError("polarization must be normalized");
        if (std::abs(b.direction.cast<cd>().dot(b.polarization)) > 1e-12)
            throw DomainError("polarization must be transverse");
        if (!(b.amplitude > 0.0 && b.amplitude <= 1.0))
            throw DomainError("beam amplitude must lie in (0, 1]");
    }
}

double BeamSet::incoherent_intensity() const {
    double s = 0.0;
    for (const Beam& b : beams) s += b.amplitude * b.amplitude;
    return s;
}

Eigen::Vector3cd field_at(const BeamSet& set, double x, double y) {
    const double k = 2.0 * constants::pi / set.wavelength;
    Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
    for (const Beam& b : set.beams) {
        const double arg = k * (b.direction.x() * x + b.direction.y() * y) + b.phase;
        e += b.amplitude * std::polar(1.0, arg) * b.polarization;
    }
    return e;
}

double intensity_of(const Eigen::Vector3cd& e) { return e.squaredNorm(); }

Eigen::Vector3d circularity_vector(const Eigen::Vector3cd& e) {
    const double n = e.squaredNorm();
    if (n < 1e-300) return Eigen::Vector3d::Zero();
    const Eigen::Vector3cd c = cd(0.0, 1.0) * e.conjugate().cross(e);
    return c.real() / n;
}

double circularity_along(const Eigen::Vector3cd& e, const Eigen::Vector3d& axis) {
    return circularity_vector(e).dot(axis);
}

BeamSet folded_lattice(double wavelength, double theta, double fold_phase, double retro_phase,
                       double pass_loss) {
    if (!(pass_loss > 0.0 && pass_loss <= 1.0)) throw DomainError("loss factor must lie in (0, 1]");
    const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
    const std::array<Eigen::Vector3d, 4> dirs{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                                              Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(0, -1, 0)};
    BeamSet set;
    set.wavelength = wavelength;
    set.fold_topology = "k1 -> fold -> k2 -> retro -> k3 -> fold -> k4";
    for (int i = 0; i < 4; ++i) {
        const bool retro = i >= 2;
        Beam b;
        b.direction = dirs[i];
        const Eigen::Vector3d perp = z.cross(dirs[i]);
        b.polarization = std::cos(theta) * z.cast<cd>() +
                         std::polar(std::sin(theta), retro ? retro_phase : 0.0) * perp.cast<cd>();
        b.amplitude = std::pow(pass_loss, i);
        b.phase = (i % 2 == 1) ? fold_phase : 0.0;
        set.beams.push_back(b);
    }
    set.validate();
    return set;
}

BeamSet double_well_lattice(double wavelength, const FoldParameters& p) {
    return folded_lattice(wavelength, p.theta, p.fold_phase, p.retro_phase, p.pass_loss);
}

BeamSet lossy_double_well_lattice(double wavelength) {
    FoldParameters p;
    p.pass_loss = kLossyPassFactor;
    return double_well_lattice(wavelength, p);
}

BeamSet standing_wave(double wavelength, double retro_loss) {
    BeamSet set;
    set.wavelength = wavelength;
    set.fold_topology = "k1 -> retro -> k2";
    const Eigen::Vector3cd pz = Eigen::Vector3d::UnitZ().cast<cd>();
    set.beams.push_back({Eigen::Vector3d(1, 0, 0), pz, 1.0, 0.0});
    set.beams.push_back({Eigen::Vector3d(-1, 0, 0), pz, retro_loss, 0.0});
    set.validate();
    return set;
}

namespace {

struct Sample {
    double x, y, intensity;
};

// Golden-section line search for the intensity maximum along one coordinate.
double refine_line(const BeamSet& set, double x, double y, bool along_x, double half_width) {
    auto f = [&](double t) {
        return -intensity_of(along_x ? field_at(set, t, y) : field_at(set, x, t));
    };
    const double c = along_x ? x : y;
    double a = c - half_width, d = c + half_width;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = d - r * (d - a), x2 = a + r * (d - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 <= f2) {
            d = x2, x2 = x1, f2 = f1, x1 = d - r * (d - a), f1 = f(x1);
        } else {
            a = x1, x1 = x2, f1 = f2, x2 = a + r * (d - a), f2 = f(x2);
        }
    }
    return 0.5 * (a + d);
}

std::vector<Sample> find_maxima(const BeamSet& set, int n) {
    const double period = set.wavelength;
    const double h = period / n;
    std::vector<double> grid(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) grid[iy * n + ix] = intensity_of(field_at(set, ix * h, iy * h));
    const double peak = *std::max_element(grid.begin(), grid.end());
    auto at = [&](int ix, int iy) { return grid[((iy + n) % n) * n + (ix + n) % n]; };

    std::vector<Sample> out;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double v = at(ix, iy);
            if (v < 1e-6 * peak) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1 && is_max; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const double w = at(ix + dx, iy + dy);
                    // Ties broken by index so plateaus yield one candidate.
                    const bool later = dy > 0 || (dy == 0 && dx > 0);
                    if (w > v || (w == v && later)) is_max = false;
                }
            if (!is_max) continue;
            double x = ix * h, y = iy * h;
            for (int round = 0; round < 4; ++round) {
                x = refine_line(set, x, y, true, 1.5 * h);
                y = refine_line(set, x, y, false, 1.5 * h);
            }
            x -= period * std::floor(x / period);
            y -= period * std::floor(y / period);
            bool duplicate = false;
            for (const Sample& s : out) {
                const double dx = std::remainder(s.x - x, period);
                const double dy = std::remainder(s.y - y, period);
                if (std::hypot(dx, dy) < 1e-3 * period) duplicate = true;
            }
            if (!duplicate) out.push_back({x, y, intensity_of(field_at(set, x, y))});
        }
    }
    std::sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return out;
}

std::array<double, 3> potentials(double intensity, double circularity,
                                 const ShiftCoefficients& c) {
    std::array<double, 3> u{};
    for (int k = 0; k < 3; ++k) {
        const int m = k - 1;
        u[k] = intensity * (c.kappa_s_lower + c.kappa_v_lower * circularity * (-0.5 * m));
    }
    return u;
}

void classify(std::vector<SiteReport>& sites) {
    if (sites.empty()) return;
    double lo = 2.0, hi = -1.0;
    for (const SiteReport& s : sites) {
        lo = std::min(lo, std::abs(s.circularity));
        hi = std::max(hi, std::abs(s.circularity));
    }
    const double mid = 0.5 * (lo + hi);
    for (SiteReport& s : sites)
        s.site_class = (hi - lo > 0.05 && std::abs(s.circularity) > mid) ? SiteClass::R : SiteClass::L;
}

}  // namespace

UnitCellMap unit_cell_map(const BeamSet& beams, const ShiftCoefficients& coeffs,
                          const AtomSpec& atom, const MapOptions& options) {
    (void)atom;
    beams.validate();
    if (options.resolution < 16) throw DomainError("resolution must be at least 16 per period");
    if (!(options.beam_intensity > 0.0)) throw DomainError("beam intensity must be positive");
    const double axis_norm = options.field_axis.norm();
    if (!(axis_norm > 0.0)) throw DomainError("field axis must be non-zero");
    const Eigen::Vector3d axis = options.field_axis / axis_norm;

    UnitCellMap map;
    map.resolution = options.resolution;
    map.period = beams.wavelength;
    map.field_axis = axis;
    const int n = options.resolution;
    const double h = map.period / n;
    auto report = [&](double x, double y) {
        const Eigen::Vector3cd e = field_at(beams, x, y);
        SiteReport s;
        s.x = x;
        s.y = y;
        s.intensity = options.beam_intensity * intensity_of(e);
        s.circularity = std::clamp(circularity_along(e, axis), -1.0, 1.0);
        s.potential = potentials(s.intensity, s.circularity, coeffs);
        return s;
    };
    const auto rows = parallel_map(
        static_cast<std::size_t>(n),
        [&](std::size_t iy) {
            std::vector<SiteReport> row;
            for (int ix = 0; ix < n; ++ix) row.push_back(report(ix * h, iy * h));
            return row;
        },
        options.threads);
    for (const auto& row : rows) map.points.insert(map.points.end(), row.begin(), row.end());

    for (const Sample& m : find_maxima(beams, n)) map.sites.push_back(report(m.x, m.y));
    classify(map.sites);
    return map;
}

Eigen::Vector3d circularity_axis(const BeamSet& beams, int resolution) {
    beams.validate();
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    for (const Sample& m : find_maxima(beams, resolution)) {
        const Eigen::Vector3d c = circularity_vector(field_at(beams, m.x, m.y));
        if (c.norm() > best.norm()) best = c;
    }
    if (best.norm() < 1e-12) return Eigen::Vector3d::UnitZ();
    return best / best.norm();
}

LatticeParams LatticeParams::for_wavelength(const AtomSpec& atom, double wavelength, double depth,
                                            double vertical_depth) {
    if (!(depth >= 0.0) || !(vertical_depth >= 0.0)) throw DomainError("depth must be non-negative");
    return {depth, recoil_energy(atom, wavelength), vertical_depth};
}

double depth_to_intensity(const LatticeParams& params, const ShiftCoefficients& coeffs) {
    if (!(params.depth >= 0.0)) throw DomainError("depth must be non-negative");
    if (!(coeffs.kappa_trap < 0.0)) throw DomainError("blue-detuned light: no trap depth to convert");
    return params.depth * params.recoil / std::abs(coeffs.kappa_trap);
}

double intensity_to_depth(double intensity, const LatticeParams& params,
                          const ShiftCoefficients& coeffs) {
    if (!(intensity >= 0.0)) throw DomainError("intensity must be non-negative");
    if (!(coeffs.kappa_trap < 0.0)) throw DomainError("blue-detuned light: no trap depth to convert");
    return intensity * std::abs(coeffs.kappa_trap) / params.recoil;
}

double vertical_lattice_offset(const AtomSpec& atom, const LatticeParams& params,
                               const ShiftCoefficients& coeffs, const TransitionSpec& t) {
    LatticeParams v = params;
    v.depth = params.vertical_depth;
    const double intensity = depth_to_intensity(v, coeffs);
    return intensity * (coeffs.kappa_s(t.upper, atom) - coeffs.kappa_s(t.lower, atom));
}

ZeroPointCorrection zero_point_slope_correction(const std::vector<double>& depths,
                                                double differential_fraction, int axes) {
    if (depths.empty()) throw DomainError("depth grid is empty");
    if (axes < 1 || axes > 3) throw DomainError("axes must be 1, 2 or 3");
    ZeroPointCorrection out;
    for (double d : depths) {
        if (!(d > 0.0)) throw DomainError("depths must be positive");
        if (d <= 1.0) out.outside_harmonic = true;
    }
    double slope = 0.0;
    const std::size_t n = depths.size();
    double mx = 0.0;
    for (double d : depths) mx += d;
    mx /= n;
    double sxx = 0.0, sxy = 0.0;
    for (double d : depths) {
        sxx += (d - mx) * (d - mx);
        sxy += (d - mx) * std::sqrt(d);
    }
    slope = sxx > 0.0 ? sxy / sxx : 0.5 / std::sqrt(mx);
    out.fraction = differential_fraction * axes * slope;
    return out;
}

namespace {

struct FoldScore {
    double r_circularity = 0.0;
    double ratio = 0.0;
};

FoldScore score(double wavelength, const FoldParameters& p) {
    const BeamSet set = double_well_lattice(wavelength, p);
    const std::vector<Sample> maxima = find_maxima(set, 24);
    if (maxima.size() < 2) return {};
    double imin = maxima.front().intensity, imax = imin, best = 0.0;
    for (const Sample& m : maxima) {
        imin = std::min(imin, m.intensity);
        imax = std::max(imax, m.intensity);
        best = std::max(best, circularity_vector(field_at(set, m.x, m.y)).norm());
    }
    const double ratio = imin / imax;
    // Require two genuinely inequivalent site classes.
    if (ratio > 0.98 || ratio < 0.2) return {0.0, ratio};
    return {best, ratio};
}

}  // namespace

FoldOptimum optimize_fold_phases(double wavelength, FoldParameters start, int rounds) {
    FoldOptimum out;
    out.params = start;
    FoldScore current = score(wavelength, start);
    ++out.evaluations;
    const int coarse = 32;
    for (int round = 0; round < rounds; ++round) {
        for (int which = 0; which < 2; ++which) {
            double& phase = which == 0 ? out.params.fold_phase : out.params.retro_phase;
            const double step = 2.0 * constants::pi / coarse;
            double best_phase = phase;
            for (int k = 0; k < coarse; ++k) {
                FoldParameters trial = out.params;
                (which == 0 ? trial.fold_phase : trial.retro_phase) = k * step;
                const FoldScore s = score(wavelength, trial);
                ++out.evaluations;
                if (s.r_circularity > current.r_circularity + 1e-12) {
                    current = s;
                    best_phase = k * step;
                }
            }
            phase = best_phase;
        }
    }
    out.r_circularity = current.r_circularity;
    out.intensity_ratio = current.ratio;
    return out;
}

}  // namespace hfdls
