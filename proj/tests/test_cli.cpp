#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hfdls/cli.hpp"
#include "hfdls/errors.hpp"

using namespace hfdls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hfdls_test_cli";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config resolution") {
    const json c = cli::resolve_config("breit-rabi", json::object());
    CHECK(c["species"] == "Rb87");
    CHECK(c["n_points"] == 101);
    CHECK(cli::resolve_config("scan-field", json::object())["field_range_T"][0] == 0.30e-3);

    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"n_points", "many"}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"n_points", 0}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"n_points", 2.5}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"circularity", 1.5}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"species", "Cs133"}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"field_range_T", {1e-3, 0.0}}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"seed", -3}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("breit-rabi", {{"format", "xml"}}), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("nope", json::object()), ConfigError);
    CHECK_THROWS_AS(cli::resolve_config("magic-field",
                                        {{"transition", {{"lower", {1, -2}}, {"upper", {2, 1}}}}}),
                    ConfigError);
    const json custom = cli::resolve_config(
        "magic-field", {{"transition", {{"lower", {1, 1}}, {"upper", {2, -1}}, {"photon_order", 2}}}});
    CHECK(custom["transition"]["photon_order"] == 2);

    try {
        cli::resolve_config("breit-rabi", {{"wavelenght_m", 1e-6}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("wavelenght_m") != std::string::npos);
    }
}

TEST_CASE("config file parse errors report line and column") {
    const fs::path p = scratch("broken.json");
    std::ofstream(p) << "{\n  \"seed\": 1,\n  \"n_points\": ]\n}\n";
    try {
        cli::read_config_file(p, "breit-rabi");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(cli::read_config_file(scratch("missing.json"), "breit-rabi"), ConfigError);
}

TEST_CASE("breit-rabi table") {
    json c = cli::resolve_config("breit-rabi", {{"n_points", 101}});
    const cli::CommandResult r = cli::run_command("breit-rabi", c);
    CHECK(r.table.rows.size() == 808);
    CHECK(r.table.columns == std::vector<std::string>{"B_T", "F", "m_F", "E_Hz"});
    CHECK(r.table.rows.back()[0] == 1e-3);
}

TEST_CASE("csv and json tables round-trip canonically") {
    const json c = cli::resolve_config("breit-rabi", {{"n_points", 7}});
    const cli::CommandResult r = cli::run_command("breit-rabi", c);
    const std::string text = cli::to_csv(r.table);
    const cli::Table back = cli::parse_csv(text);
    CHECK(back.schema == "hfdls.breit-rabi/1");
    CHECK(cli::to_csv(back) == text);
    CHECK(cli::format_number(0.1) == "0.10000000000000001");
    CHECK(std::strtod(cli::format_number(M_PI).c_str(), nullptr) == M_PI);
    const json parsed = json::parse(cli::to_json_table(r.table));
    CHECK(parsed["rows"].size() == r.table.rows.size());
    CHECK(parsed["rows"][3][3].get<double>() == r.table.rows[3][3]);
    CHECK_THROWS_AS(cli::parse_csv("a,b\n1,2,3\n"), ConfigError);
}

TEST_CASE("magic-field metadata and no-root status") {
    const json c = cli::resolve_config("magic-field", json::object());
    const cli::CommandResult r = cli::run_command("magic-field", c);
    CHECK(r.results["B_m_mT"].get<double>() == doctest::Approx(0.3228917).epsilon(2e-6));
    const json side = json::parse(cli::sidecar_text("magic-field", c, r));
    CHECK(side["registry_version"] == "1.0.0");
    CHECK(side["results"]["solver"].contains("xtol_T"));
    CHECK(side["config"] == c);

    const json clock = cli::resolve_config("magic-field", {{"transition", "clock"}});
    try {
        cli::run_command("magic-field", clock);
        FAIL("expected NoRootError");
    } catch (const NoRootError& e) {
        CHECK(cli::exit_code_for(e) == 4);
    }
}

TEST_CASE("slopes at linear polarization are equal") {
    const json c = cli::resolve_config("slopes", {{"circularity", 0.0}, {"n_points", 3}});
    const cli::CommandResult r = cli::run_command("slopes", c);
    CHECK(std::abs(r.results["ratio"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("sidecar is accepted as config and checked against the command") {
    const json c = cli::resolve_config("breit-rabi", {{"n_points", 3}});
    const cli::CommandResult r = cli::run_command("breit-rabi", c);
    const fs::path data = scratch("br.csv");
    cli::write_outputs(data, cli::to_csv(r.table), cli::sidecar_text("breit-rabi", c, r));
    const std::string before = slurp(cli::sidecar_path(data));
    CHECK(cli::read_config_file(cli::sidecar_path(data), "breit-rabi") == c);
    CHECK(slurp(cli::sidecar_path(data)) == before);
    CHECK_THROWS_AS(cli::read_config_file(cli::sidecar_path(data), "ramsey"), ConfigError);
}

TEST_CASE("failed writes leave no partial files") {
    const fs::path data = scratch("no_such_dir") / "out.csv";
    CHECK_THROWS(cli::write_outputs(data, "x", "y"));
    CHECK_FALSE(fs::exists(data));
    CHECK_FALSE(fs::exists(fs::path(data.string() + ".tmp")));
}

TEST_CASE("exit codes") {
    CHECK(cli::exit_code_for(ConfigError("x")) == 2);
    CHECK(cli::exit_code_for(DomainError("x")) == 2);
    CHECK(cli::exit_code_for(NumericalError("x")) == 3);
    CHECK(cli::exit_code_for(NoRootError("x")) == 4);
    CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}
