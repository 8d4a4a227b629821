#include "hfdls/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hfdls/atom.hpp"
#include "hfdls/errors.hpp"
#include "hfdls/lattice.hpp"
#include "hfdls/lightshift.hpp"
#include "hfdls/ramsey.hpp"
#include "hfdls/solver.hpp"
#include "hfdls/spin.hpp"

namespace hfdls::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands{"breit-rabi", "magic-field", "scan-wavelength",
                                         "scan-field", "slopes",      "lattice-map",
                                         "ramsey"};

void require_command(const std::string& command) {
    for (const auto& c : kCommands)
        if (c == command) return;
    throw ConfigError("unknown command '" + command + "'");
}

// Keys whose value may be null (computed automatically) or of a second JSON type.
bool nullable(const std::string& key) {
    return key == "lattice_beam_intensity_W_m2" || key == "sites_dls_per_recoil_Hz";
}

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

double num(const json& c, const char* key) {
    const json& v = c.at(key);
    if (!v.is_number()) throw ConfigError(std::string("key '") + key + "': expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(std::string("key '") + key + "': must be finite");
    return d;
}

long integer(const json& c, const char* key, long min_value) {
    const json& v = c.at(key);
    if (!v.is_number_integer())
        throw ConfigError(std::string("key '") + key + "': expected an integer");
    const long i = v.get<long>();
    if (i < min_value)
        throw ConfigError(std::string("key '") + key + "': must be >= " + std::to_string(min_value));
    return i;
}

Bracket range(const json& c, const char* key, bool positive) {
    const json& v = c.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(std::string("key '") + key + "': expected [lo, hi]");
    const Bracket b{v[0].get<double>(), v[1].get<double>()};
    if (!(b.lo <= b.hi)) throw ConfigError(std::string("key '") + key + "': lo must not exceed hi");
    if (positive && !(b.lo > 0.0)) throw ConfigError(std::string("key '") + key + "': must be positive");
    if (!positive && !(b.lo >= 0.0)) throw ConfigError(std::string("key '") + key + "': must be non-negative");
    return b;
}

TransitionSpec transition_of(const json& c, const AtomSpec& atom) {
    const json& t = c.at("transition");
    if (t.is_string()) {
        const auto s = t.get<std::string>();
        if (s == "two-photon") return TransitionSpec::two_photon(atom);
        if (s == "clock") return TransitionSpec::clock(atom);
        throw ConfigError("key 'transition': expected \"two-photon\", \"clock\" or an object");
    }
    if (!t.is_object()) throw ConfigError("key 'transition': expected a string or an object");
    try {
        for (const auto& [k, v] : t.items())
            if (k != "lower" && k != "upper" && k != "photon_order")
                throw ConfigError("key 'transition." + k + "': unknown key");
        auto label = [&](const char* which) {
            const json& l = t.at(which);
            if (!l.is_array() || l.size() != 2) throw ConfigError(std::string("key 'transition.") + which + "': expected [F, m_F]");
            return StateLabel::of(l[0].get<double>(), l[1].get<double>());
        };
        TransitionSpec spec{label("lower"), label("upper"),
                            t.contains("photon_order") ? t.at("photon_order").get<int>() : 1};
        const SpinBasis basis(atom.nuclear_spin());
        if (!basis.is_valid(spec.lower) || !basis.is_valid(spec.upper) || spec.lower == spec.upper)
            throw ConfigError("key 'transition': state labels invalid for " + atom.species());
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("key 'transition': ") + e.what());
    }
}

VectorModel model_of(const json& c) {
    const auto m = c.at("vector_model").get<std::string>();
    if (m == "hyperfine-resolved") return VectorModel::HyperfineResolved;
    if (m == "electronic") return VectorModel::Electronic;
    throw ConfigError("key 'vector_model': expected \"hyperfine-resolved\" or \"electronic\"");
}

ShiftDistribution distribution_of(const json& c) {
    const auto d = c.at("distribution").get<std::string>();
    if (d == "delta") return ShiftDistribution::Delta;
    if (d == "gaussian") return ShiftDistribution::Gaussian;
    if (d == "uniform") return ShiftDistribution::Uniform;
    if (d == "lattice-sites") return ShiftDistribution::LatticeSites;
    throw ConfigError("key 'distribution': expected delta, gaussian, uniform or lattice-sites");
}

json transition_json(const TransitionSpec& t) {
    return {{"lower", {t.lower.f(), t.lower.m()}},
            {"upper", {t.upper.f(), t.upper.m()}},
            {"photon_order", t.photon_order}};
}

json bracket_json(const Bracket& b) { return json::array({b.lo, b.hi}); }

// --- commands ------------------------------------------------------------------------------

CommandResult breit_rabi(const json& c, const AtomSpec& atom) {
    const Bracket fr = range(c, "field_range_T", false);
    const std::vector<double> grid = uniform_grid(fr, static_cast<int>(integer(c, "n_points", 1)));
    CommandResult out;
    out.table = {"hfdls.breit-rabi/1", {"B_T", "F", "m_F", "E_Hz"}, {}};
    for (double b : grid) {
        const ZeemanEigensystem sys = zeeman_eigensystem(atom, b);
        for (const StateLabel& s : SpinBasis(atom.nuclear_spin()).labels())
            out.table.rows.push_back({b, s.f(), s.m(), sys.energy(s)});
    }
    out.results = {{"states", SpinBasis(atom.nuclear_spin()).dimension()},
                   {"field_points", grid.size()}};
    return out;
}

CommandResult magic_field(const json& c, const AtomSpec& atom) {
    const TransitionSpec t = transition_of(c, atom);
    const MagicField m = find_magic_field(atom, t, range(c, "magic_bracket_T", false));
    const double nu = transition_frequency(zeeman_eigensystem(atom, m.field), t);
    CommandResult out;
    out.table = {"hfdls.magic-field/1",
                 {"B_m_T", "nu_Hz", "dnu_dB_Hz_per_T", "curvature_Hz_per_T2"},
                 {{m.field, nu, m.dnu_dB, m.curvature}}};
    out.results = {{"B_m_T", m.field},
                   {"B_m_mT", m.field * 1e3},
                   {"nu_Hz", nu},
                   {"curvature_Hz_per_T2", m.curvature},
                   {"iterations", m.iterations},
                   {"transition", transition_json(t)},
                   {"solver", {{"xtol_T", kMagicFieldXtol},
                               {"ftol_Hz_per_T", kMagicFieldFtol},
                               {"field_step_T", kDefaultFieldStep}}}};
    return out;
}

CommandResult scan_wavelength_cmd(const json& c, const AtomSpec& atom, unsigned threads) {
    const LightShiftEngine engine(atom, model_of(c));
    WavelengthScan w;
    w.range = range(c, "wavelength_range_m", true);
    w.n_points = static_cast<int>(integer(c, "n_points", 1));
    w.circularity = num(c, "circularity");
    w.field_two_photon = num(c, "field_T");
    w.field_clock = num(c, "clock_field_T");
    w.depth_er = num(c, "depth_er");
    const ScanResult s = scan_wavelength(engine, w, threads);
    CommandResult out;
    out.table = {"hfdls.scan-wavelength/1",
                 {"wavelength_m", "ratio", "dnu_dI_Hz_per_W_m2", "dnu_dI_Hz_per_ER", "nu_Hz",
                  "nonlinearity_Hz"},
                 {}};
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        const SensitivityReport& r = s.values[k];
        out.table.rows.push_back(
            {s.grid[k], *r.ratio, r.dnu_dI, r.dnu_dI_per_recoil, r.nu, r.nonlinearity});
    }
    json minima = json::array();
    for (const Extremum& e : s.extrema)
        minima.push_back({{"wavelength_m", e.x},
                          {"ratio", e.value},
                          {"reduction", 1.0 - e.value},
                          {"bracket_m", bracket_json(e.bracket)}});
    out.results = {{"minima", minima}};
    if (w.range.lo < w.range.hi && minima.empty()) throw NoRootError("no interior minimum in wavelength scan");
    return out;
}

LightConfig light_of(const json& c, const AtomSpec& atom) {
    try {
        return light_from_depth(atom, num(c, "wavelength_m"), num(c, "depth_er"), num(c, "circularity"));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

CommandResult scan_field_cmd(const json& c, const AtomSpec& atom, unsigned threads) {
    const LightShiftEngine engine(atom, model_of(c));
    const TransitionSpec t = transition_of(c, atom);
    const LightConfig light = light_of(c, atom);
    const ScanResult s = scan_field(engine, light, t, range(c, "field_range_T", false),
                                    static_cast<int>(integer(c, "n_points", 1)), threads);
    CommandResult out;
    out.table = {"hfdls.scan-field/1",
                 {"field_T", "dnu_dI_Hz_per_W_m2", "dnu_dI_Hz_per_ER", "dnu_dB_Hz_per_T", "nu_Hz"},
                 {}};
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        const SensitivityReport& r = s.values[k];
        out.table.rows.push_back({s.grid[k], r.dnu_dI, r.dnu_dI_per_recoil, r.dnu_dB, r.nu});
    }
    json roots = json::array();
    for (const Extremum& e : s.extrema) {
        const double db = dnu_dB(atom, t, e.x).value;
        roots.push_back({{"field_T", e.x},
                         {"field_mT", e.x * 1e3},
                         {"dnu_dI_Hz_per_ER", e.value},
                         {"dnu_dB_Hz_per_T", db},
                         {"dnu_dB_Hz_per_uT", db * 1e-6},
                         {"bracket_T", bracket_json(e.bracket)}});
    }
    out.results = {{"roots", roots},
                   {"intensity_W_m2", light.intensity},
                   {"transition", transition_json(t)},
                   {"solver", {{"xtol_T", kZeroDlsXtol}, {"ftol_Hz_per_ER", kZeroDlsFtol}}}};
    return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sxx += (x[k] - mx) * (x[k] - mx), sxy += (x[k] - mx) * (y[k] - my);
    return sxy / sxx;
}

CommandResult slopes_cmd(const json& c, const AtomSpec& atom, unsigned threads) {
    const LightShiftEngine engine(atom, model_of(c));
    const double lam = num(c, "wavelength_m");
    const double circ = num(c, "circularity");
    const double b_two = num(c, "field_T"), b_clock = num(c, "clock_field_T");
    const Bracket depths = range(c, "depth_range_er", false);
    const int n = static_cast<int>(integer(c, "n_points", 3));
    if (!(depths.hi > depths.lo)) throw ConfigError("key 'depth_range_er': needs a non-empty interval");
    const std::vector<double> grid = uniform_grid(depths, n);
    const TransitionSpec tp = TransitionSpec::two_photon(atom), clock = TransitionSpec::clock(atom);
    const ShiftCoefficients coeffs = shift_coefficients(atom, lam);
    const double ipr = intensity_per_recoil(atom, coeffs);

    const LightConfig dark{lam, 0.0, circ};
    const double nu_tp0 = engine.transition(b_two, dark, tp);
    const double nu_c0 = engine.transition(b_clock, dark, clock);
    struct Row {
        double tp, clock;
    };
    const auto rows = parallel_map(grid.size(), [&](std::size_t k) {
        const LightConfig light{lam, grid[k] * ipr, circ};
        return Row{engine.transition(b_two, light, tp) - nu_tp0,
                   engine.transition(b_clock, light, clock) - nu_c0};
    }, threads);

    CommandResult out;
    out.table = {"hfdls.slopes/1",
                 {"depth_er", "intensity_W_m2", "shift_two_photon_Hz", "shift_clock_Hz"},
                 {}};
    std::vector<double> ytp, yc;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out.table.rows.push_back({grid[k], grid[k] * ipr, rows[k].tp, rows[k].clock});
        ytp.push_back(rows[k].tp);
        yc.push_back(rows[k].clock);
    }
    const double s_tp = fit_slope(grid, ytp), s_c = fit_slope(grid, yc);
    if (s_c == 0.0) throw NumericalError("clock-transition slope vanishes; ratio undefined");

    std::vector<double> positive;
    for (double d : grid)
        if (d > 0.0) positive.push_back(d);
    json zp = nullptr;
    if (!positive.empty()) {
        const ZeroPointCorrection z = zero_point_slope_correction(positive);
        zp = {{"fraction", z.fraction}, {"outside_harmonic", z.outside_harmonic}, {"axes", 2}};
    }
    const LightConfig full{lam, depths.hi * ipr, circ};
    LatticeParams lp = LatticeParams::for_wavelength(atom, lam, depths.hi, num(c, "vertical_depth_er"));
    out.results = {
        {"slope_two_photon_Hz_per_ER", s_tp},
        {"slope_clock_Hz_per_ER", s_c},
        {"ratio", s_tp / s_c},
        {"clock_vector_residual_Hz", engine.clock_vector_residual(b_clock, full)},
        {"vertical_offset_two_photon_Hz", vertical_lattice_offset(atom, lp, coeffs, tp)},
        {"vertical_offset_clock_Hz", vertical_lattice_offset(atom, lp, coeffs, clock)},
        {"zero_point_correction", zp}};
    return out;
}

CommandResult lattice_map_cmd(const json& c, const AtomSpec& atom, unsigned threads) {
    const double lam = num(c, "wavelength_m");
    FoldParameters p;
    p.theta = num(c, "lattice_theta_rad");
    p.fold_phase = num(c, "lattice_fold_phase_rad");
    p.retro_phase = num(c, "lattice_retro_phase_rad");
    p.pass_loss = num(c, "lattice_pass_loss");
    if (!(p.pass_loss > 0.0 && p.pass_loss <= 1.0)) throw ConfigError("key 'lattice_pass_loss': must lie in (0, 1]");
    const BeamSet beams = double_well_lattice(lam, p);
    const ShiftCoefficients coeffs = shift_coefficients(atom, lam);
    MapOptions o;
    o.resolution = static_cast<int>(integer(c, "lattice_resolution", 16));
    o.threads = threads;
    const json& bi = c.at("lattice_beam_intensity_W_m2");
    // Default: single-beam intensity of a lambda/2 standing wave of the configured depth.
    o.beam_intensity = bi.is_null() ? num(c, "depth_er") * intensity_per_recoil(atom, coeffs) / 4.0
                                    : bi.get<double>();
    FoldParameters ideal = p;
    ideal.pass_loss = 1.0;
    o.field_axis = circularity_axis(double_well_lattice(lam, ideal));
    const UnitCellMap m = unit_cell_map(beams, coeffs, atom, o);

    CommandResult out;
    out.table = {"hfdls.lattice-map/1",
                 {"x_m", "y_m", "intensity_W_m2", "circularity", "U_mF-1_Hz", "U_mF0_Hz", "U_mF+1_Hz"},
                 {}};
    for (const SiteReport& s : m.points)
        out.table.rows.push_back({s.x, s.y, s.intensity, s.circularity, s.potential[0],
                                  s.potential[1], s.potential[2]});
    json sites = json::array();
    for (const SiteReport& s : m.sites)
        sites.push_back({{"x_m", s.x},
                         {"y_m", s.y},
                         {"intensity_W_m2", s.intensity},
                         {"circularity", s.circularity},
                         {"class", s.site_class == SiteClass::R ? "R" : "L"}});
    out.results = {{"sites", sites},
                   {"field_axis", {o.field_axis.x(), o.field_axis.y(), o.field_axis.z()}},
                   {"beam_intensity_W_m2", o.beam_intensity},
                   {"period_m", m.period}};
    return out;
}

CommandResult ramsey_cmd(const json& c, const AtomSpec& atom, unsigned threads) {
    RamseyEnsemble e;
    e.detuning_nominal = num(c, "ramsey_detuning_Hz");
    e.distribution = distribution_of(c);
    e.sigma = num(c, "sigma_Hz");
    e.half_width = num(c, "half_width_Hz");
    e.shift_scale = num(c, "shift_scale");
    e.n_samples = static_cast<std::size_t>(integer(c, "n_samples", 1));
    e.seed = c.at("seed").get<std::uint64_t>();
    e.sites.waist = num(c, "sites_waist_m");
    e.sites.cloud_sigma = num(c, "sites_cloud_sigma_m");
    e.sites.peak_depth = num(c, "vertical_depth_er");
    const json& dls = c.at("sites_dls_per_recoil_Hz");
    if (dls.is_null()) {
        // Vertical lattice is linearly polarized: its DLS is the scalar part only.
        const LightShiftEngine engine(atom, model_of(c));
        LightConfig light = light_of(c, atom);
        light.circularity = 0.0;
        const TransitionSpec t = transition_of(c, atom);
        const TransitionSpec ck = TransitionSpec::clock(atom);
        const bool is_clock = t.lower == ck.lower && t.upper == ck.upper;
        const double field = is_clock ? num(c, "clock_field_T") : num(c, "field_T");
        e.sites.dls_per_recoil = engine.dnu_dI(field, light, t).per_recoil;
    } else {
        e.sites.dls_per_recoil = dls.get<double>();
    }
    try {
        e.validate();
    } catch (const DomainError& err) {
        throw ConfigError(err.what());
    }
    ContrastOptions o;
    o.phase_points = static_cast<int>(integer(c, "phase_points", 3));
    o.threads = threads;
    const double rabi = num(c, "pulse_rabi_Hz");
    if (rabi < 0.0) throw ConfigError("key 'pulse_rabi_Hz': must be >= 0 (0 = instantaneous)");
    if (rabi > 0.0) o.pulses = {PulseSpec::pi_half(rabi), PulseSpec::pi_half(rabi)};
    const std::vector<double> tau =
        uniform_grid(range(c, "tau_range_s", false), static_cast<int>(integer(c, "n_points", 1)));
    const ContrastCurve curve = ensemble_contrast(e, tau, o);

    CommandResult out;
    out.table = {"hfdls.ramsey/1", {"tau_s", "contrast", "degenerate"}, {}};
    for (std::size_t k = 0; k < tau.size(); ++k)
        out.table.rows.push_back({tau[k], curve.contrast[k], curve.degenerate[k] ? 1.0 : 0.0});
    const EffectiveDrive d = effective_rabi(
        {num(c, "drive_rabi_uw_Hz"), num(c, "drive_rabi_rf_Hz"), num(c, "drive_detuning_Hz")});
    out.results = {{"effective_rabi_Hz", d.rabi},
                   {"drive_differential_ac_shift_Hz", d.differential_ac_shift},
                   {"drive_weakly_detuned", d.weakly_detuned},
                   {"sites_dls_per_recoil_Hz", e.sites.dls_per_recoil},
                   {"final_contrast", curve.contrast.back()}};
    return out;
}

}  // namespace

const std::vector<std::string>& command_names() { return kCommands; }

std::string command_summary(const std::string& command) {
    require_command(command);
    if (command == "breit-rabi") return "ground-state energies versus field";
    if (command == "magic-field") return "field where d nu / dB vanishes";
    if (command == "scan-wavelength") return "two-photon over clock light-shift ratio versus wavelength";
    if (command == "scan-field") return "d nu / dI versus field, with roots";
    if (command == "slopes") return "two-photon and clock light shifts versus depth";
    if (command == "lattice-map") return "intensity, circularity and site classes over a unit cell";
    return "Ramsey contrast versus hold time";
}

json default_config(const std::string& command) {
    require_command(command);
    json c = {
        {"species", "Rb87"},
        {"transition", "two-photon"},
        {"vector_model", "hyperfine-resolved"},
        {"format", "csv"},
        {"seed", 0},
        {"wavelength_m", 806e-9},
        {"wavelength_range_m", {802e-9, 815e-9}},
        {"circularity", kDefaultCircularity},
        {"field_T", kDefaultTwoPhotonField},
        {"clock_field_T", kDefaultClockField},
        {"field_range_T", {0.0, 1e-3}},
        {"magic_bracket_T", {0.1e-3, 1e-3}},
        {"depth_er", kDefaultDepth},
        {"depth_range_er", {0.0, kDefaultDepth}},
        {"vertical_depth_er", 30.0},
        {"n_points", 101},
        {"lattice_theta_rad", FoldParameters{}.theta},
        {"lattice_fold_phase_rad", FoldParameters{}.fold_phase},
        {"lattice_retro_phase_rad", FoldParameters{}.retro_phase},
        {"lattice_pass_loss", 1.0},
        {"lattice_resolution", 32},
        {"lattice_beam_intensity_W_m2", nullptr},
        {"tau_range_s", {0.0, 0.2}},
        {"ramsey_detuning_Hz", 1000.0},
        {"distribution", "gaussian"},
        {"sigma_Hz", 2.5},
        {"half_width_Hz", 0.0},
        {"shift_scale", 1.0},
        {"n_samples", 20000},
        {"sites_waist_m", 100e-6},
        {"sites_cloud_sigma_m", 10e-6},
        {"sites_dls_per_recoil_Hz", nullptr},
        {"pulse_rabi_Hz", 0.0},
        {"phase_points", 8},
        {"drive_rabi_uw_Hz", 13.4e3},
        {"drive_rabi_rf_Hz", 13.4e3},
        {"drive_detuning_Hz", 90e3},
    };
    if (command == "scan-wavelength") c["n_points"] = 40;
    if (command == "scan-field") {
        c["n_points"] = 33;
        c["field_range_T"] = {0.30e-3, 0.38e-3};
        c["depth_er"] = 30.0;
    }
    if (command == "slopes") c["n_points"] = 5;
    if (command == "ramsey") c["n_points"] = 41;
    return c;
}

json resolve_config(const std::string& command, const json& user) {
    json c = default_config(command);
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : user.items()) {
        if (!c.contains(key)) throw ConfigError("unknown key '" + key + "'");
        const json& def = c[key];
        const bool ok = same_kind(def, value) || (nullable(key) && (value.is_null() || value.is_number())) ||
                        (key == "transition" && value.is_object());
        if (!ok) throw ConfigError("key '" + key + "': expected " + std::string(def.type_name()));
        c[key] = value;
    }
    // Range checks that do not need the atom.
    const std::string fmt = c["format"].get<std::string>();
    if (fmt != "csv" && fmt != "json") throw ConfigError("key 'format': expected csv or json");
    if (!c["seed"].is_number_unsigned() && !(c["seed"].is_number_integer() && c["seed"].get<long long>() >= 0))
        throw ConfigError("key 'seed': expected a non-negative integer");
    const double circ = num(c, "circularity");
    if (!(std::abs(circ) <= 1.0)) throw ConfigError("key 'circularity': must lie in [-1, 1]");
    if (!(num(c, "wavelength_m") > 0.0)) throw ConfigError("key 'wavelength_m': must be positive");
    range(c, "wavelength_range_m", true);
    range(c, "field_range_T", false);
    range(c, "magic_bracket_T", false);
    range(c, "depth_range_er", false);
    range(c, "tau_range_s", false);
    if (!(num(c, "depth_er") >= 0.0)) throw ConfigError("key 'depth_er': must be non-negative");
    if (!(num(c, "field_T") > 0.0)) throw ConfigError("key 'field_T': must be positive");
    if (!(num(c, "clock_field_T") > 0.0)) throw ConfigError("key 'clock_field_T': must be positive");
    integer(c, "n_points", 1);
    model_of(c);
    distribution_of(c);
    try {
        const AtomSpec atom = load_atom(c["species"].get<std::string>());
        transition_of(c, atom);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("key 'species': ") + e.what());
    }
    return c;
}

json read_config_file(const std::filesystem::path& path, const std::string& command) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') ++line, col = 1;
            else ++col;
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
    if (doc.is_object() && doc.contains("schema") && doc["schema"] == kSidecarSchema) {
        if (doc.value("command", "") != command)
            throw ConfigError("sidecar was written by '" + doc.value("command", "") +
                              "', not '" + command + "'");
        return doc.at("config");
    }
    return doc;
}

CommandResult run_command(const std::string& command, const json& c, unsigned threads) {
    require_command(command);
    const AtomSpec atom = load_atom(c.at("species").get<std::string>());
    if (command == "breit-rabi") return breit_rabi(c, atom);
    if (command == "magic-field") return magic_field(c, atom);
    if (command == "scan-wavelength") return scan_wavelength_cmd(c, atom, threads);
    if (command == "scan-field") return scan_field_cmd(c, atom, threads);
    if (command == "slopes") return slopes_cmd(c, atom, threads);
    if (command == "lattice-map") return lattice_map_cmd(c, atom, threads);
    return ramsey_cmd(c, atom, threads);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const Table& t) {
    std::string out = "# schema: " + t.schema + "\n";
    for (std::size_t k = 0; k < t.columns.size(); ++k) out += (k ? "," : "") + t.columns[k];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_number(row[k]);
        out += "\n";
    }
    return out;
}

Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# schema: ", 0) == 0) {
            t.schema = line.substr(10);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size()) throw ConfigError("csv row width does not match header");
        std::vector<double> row;
        for (const auto& s : cells) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0') throw ConfigError("csv cell is not a number: " + s);
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (!header) throw ConfigError("csv has no header");
    return t;
}

std::string to_json_table(const Table& t) {
    // Rows written by hand so numbers use the same 17-digit form as CSV.
    std::string out = "{\n  \"schema\": " + json(t.schema).dump() + ",\n  \"columns\": " +
                      json(t.columns).dump() + ",\n  \"rows\": [";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += r ? ",\n    [" : "\n    [";
        for (std::size_t k = 0; k < t.rows[r].size(); ++k) {
            const double v = t.rows[r][k];
            out += (k ? ", " : "") + (std::isfinite(v) ? format_number(v) : std::string("null"));
        }
        out += "]";
    }
    out += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

std::string sidecar_text(const std::string& command, const json& resolved,
                         const CommandResult& result) {
    json s = {{"schema", kSidecarSchema},
              {"command", command},
              {"artifact_version", kArtifactVersion},
              {"registry_version", registry_version()},
              {"data_schema", result.table.schema},
              {"columns", result.table.columns},
              {"rows", result.table.rows.size()},
              {"config", resolved},
              {"results", result.results}};
    return s.dump(2) + "\n";
}

std::filesystem::path sidecar_path(const std::filesystem::path& data) {
    return std::filesystem::path(data.string() + ".meta.json");
}

void write_outputs(const std::filesystem::path& data, const std::string& data_text,
                   const std::string& sidecar) {
    namespace fs = std::filesystem;
    const fs::path meta = sidecar_path(data);
    const fs::path tmp_data(data.string() + ".tmp"), tmp_meta(meta.string() + ".tmp");
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << text;
        out.close();
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    };
    try {
        write(tmp_data, data_text);
        write(tmp_meta, sidecar);
        fs::rename(tmp_data, data);
        fs::rename(tmp_meta, meta);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp_data, ec);
        fs::remove(tmp_meta, ec);
        throw;
    }
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NoRootError*>(&e)) return 4;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    return 1;
}

}  // namespace hfdls::cli
