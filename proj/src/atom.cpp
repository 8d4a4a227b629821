#include "hfdls/atom.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "hfdls/constants.hpp"
#include "hfdls/errors.hpp"
#include "registry_data.hpp"

namespace hfdls {

AtomSpec::AtomSpec(std::string species, double nuclear_spin, double g_j, double g_i,
                   double a_hf, double mass, SpectralLine d1, SpectralLine d2)
    : species_(std::move(species)),
      nuclear_spin_(nuclear_spin),
      g_j_(g_j),
      g_i_(g_i),
      a_hf_(a_hf),
      mass_(mass),
      lines_{d1, d2} {
    const double twice = 2.0 * nuclear_spin;
    if (!(nuclear_spin > 0.0) || std::abs(twice - std::round(twice)) > 1e-12)
        throw DomainError("nuclear spin must be a positive half-integer");
    if (!(a_hf > 0.0)) throw DomainError("hyperfine constant must be positive");
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (d1.label != LineLabel::D1 || d2.label != LineLabel::D2)
        throw DomainError("d_lines must be given as (D1, D2)");
    for (const auto& l : lines_) {
        if (!(l.frequency > 0.0) || !(l.natural_linewidth > 0.0))
            throw DomainError("line frequency and linewidth must be positive");
    }
    if (!(d2.frequency > d1.frequency))
        throw DomainError("D2 frequency must exceed D1 frequency");
}

namespace {

const nlohmann::json& registry() {
    static const nlohmann::json doc = nlohmann::json::parse(detail::kRegistryJson);
    return doc;
}

SpectralLine parse_line(const nlohmann::json& j) {
    const auto label = j.at("label").get<std::string>();
    if (label != "D1" && label != "D2") throw DomainError("unknown line label " + label);
    return {label == "D1" ? LineLabel::D1 : LineLabel::D2, j.at("frequency_Hz").get<double>(),
            j.at("natural_linewidth_Hz").get<double>()};
}

}  // namespace

AtomSpec load_atom(std::string_view species) {
    const auto& all = registry().at("species");
    const auto it = all.find(std::string(species));
    if (it == all.end()) throw DomainError("unsupported species: " + std::string(species));
    const auto& s = *it;
    const auto& lines = s.at("d_lines");
    if (lines.size() != 2) throw DomainError("registry entry must list exactly two D lines");
    SpectralLine a = parse_line(lines[0]);
    SpectralLine b = parse_line(lines[1]);
    if (a.label == LineLabel::D2) std::swap(a, b);
    return AtomSpec(std::string(species), s.at("nuclear_spin").get<double>(),
                    s.at("g_J").at("value").get<double>(), s.at("g_I").at("value").get<double>(),
                    s.at("A_hf_Hz").at("value").get<double>(),
                    s.at("mass_kg").at("value").get<double>(), a, b);
}

std::string registry_version() { return registry().at("registry_version").get<std::string>(); }

std::string_view registry_text() { return detail::kRegistryJson; }

double recoil_energy(const AtomSpec& atom, double wavelength) {
    if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
    return constants::planck / (2.0 * atom.mass() * wavelength * wavelength);
}

double fine_structure_splitting(const AtomSpec& atom) {
    return atom.line(LineLabel::D2).frequency - atom.line(LineLabel::D1).frequency;
}

}  // namespace hfdls
