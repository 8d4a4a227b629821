#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hfdls/lightshift.hpp"
#include "hfdls/parallel.hpp"

namespace hfdls {

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

struct RootResult {
    double x = 0.0;
    double f = 0.0;
    Bracket bracket;  // final bracket, still containing a sign change
    int iterations = 0;
};

/// Bracketed bisection/secant hybrid. Stops when the bracket is narrower than `xtol` or
/// |f| < `ftol`. Throws NoRootError when f(lo) and f(hi) share a sign.
RootResult find_root(const std::function<double(double)>& f, Bracket b, double xtol,
                     double ftol, int max_iterations = 200);

struct MinimumResult {
    double x = 0.0;
    double f = 0.0;
    Bracket bracket;
    int iterations = 0;
};

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
MinimumResult golden_minimize(const std::function<double(double)>& f, Bracket b, double xtol,
                              int max_iterations = 200);

struct MagicField {
    double field = 0.0;      // T
    double dnu_dB = 0.0;     // Hz/T at the root
    double curvature = 0.0;  // d^2 nu / dB^2, Hz/T^2
    int iterations = 0;
};

inline constexpr double kMagicFieldXtol = 1e-10;  // T
inline constexpr double kMagicFieldFtol = 20.0;   // Hz/T, near the finite-difference noise floor

MagicField find_magic_field(const AtomSpec& atom, const TransitionSpec& t,
                            Bracket bracket = {0.1e-3, 1e-3});

struct ZeroDlsField {
    double field = 0.0;          // T
    double dnu_dI = 0.0;         // Hz per E_R at the root
    double dnu_dB = 0.0;         // Hz/T at the root, bare Zeeman sensitivity
    int iterations = 0;
};

inline constexpr double kZeroDlsXtol = 1e-9;  // T
inline constexpr double kZeroDlsFtol = 1e-6;  // Hz per E_R

ZeroDlsField find_zero_dls_field(const LightShiftEngine& engine, const LightConfig& light,
                                 const TransitionSpec& t, Bracket bracket = {0.2e-3, 0.6e-3});

struct SensitivityReport {
    double nu = 0.0;                 // Hz, dressed at full intensity
    double dnu_dB = 0.0;             // Hz/T, bare
    double dnu_dB_error = 0.0;
    double dnu_dI = 0.0;             // Hz per W/m^2
    double dnu_dI_per_recoil = 0.0;  // Hz per E_R
    double nonlinearity = 0.0;       // Hz, largest fit residual
    bool noisy = false;
    std::optional<double> ratio;
    // Metadata
    std::string species;
    double field = 0.0;
    LightConfig light;
    TransitionSpec transition;
    double field_step = kDefaultFieldStep;
    int intensity_points = 3;
};

SensitivityReport sensitivity_report(const LightShiftEngine& engine, double field,
                                     const LightConfig& light, const TransitionSpec& t);

enum class ScanAxis { Wavelength, Field, Intensity };

struct Extremum {
    enum class Kind { Minimum, Root } kind = Kind::Minimum;
    Bracket bracket;
    double x = 0.0;
    double value = 0.0;
};

struct ScanResult {
    ScanAxis axis = ScanAxis::Wavelength;
    std::vector<double> grid;
    std::vector<SensitivityReport> values;
    std::vector<Extremum> extrema;
};

struct WavelengthScan {
    Bracket range{802e-9, 815e-9};
    int n_points = 40;
    double circularity = kDefaultCircularity;
    double field_two_photon = kDefaultTwoPhotonField;
    double field_clock = kDefaultClockField;
    double depth_er = kDefaultDepth;
};

/// Two-photon over clock slope ratio versus wavelength; interior grid minima are refined
/// by golden section. Reports carry the two-photon point with `ratio` set.
ScanResult scan_wavelength(const LightShiftEngine& engine, const WavelengthScan& scan,
                           unsigned threads = 1);

/// d nu / dI versus field at fixed light; sign changes are refined to roots.
ScanResult scan_field(const LightShiftEngine& engine, const LightConfig& light,
                      const TransitionSpec& t, Bracket range, int n_points, unsigned threads = 1);

/// Uniform grid over `range`; a degenerate range yields one point.
std::vector<double> uniform_grid(Bracket range, int n_points);

}  // namespace hfdls
