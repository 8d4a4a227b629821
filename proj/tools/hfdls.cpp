#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hfdls/cli.hpp"
#include "hfdls/errors.hpp"

namespace cli = hfdls::cli;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string output;
    std::string format;
    long long seed = -1;
    unsigned threads = 1;
    std::vector<std::string> overrides;
};

int run(const std::string& command, const Options& o) {
    json user = json::object();
    if (!o.config.empty()) user = cli::read_config_file(o.config, command);
    // Precedence: defaults < config file < --set < dedicated flags.
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw hfdls::ConfigError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = text;  // bare strings
        }
        user[key] = value;
    }
    if (!o.format.empty()) user["format"] = o.format;
    if (o.seed >= 0) user["seed"] = static_cast<std::uint64_t>(o.seed);

    const json resolved = cli::resolve_config(command, user);
    const cli::CommandResult result = cli::run_command(command, resolved, o.threads);
    const bool as_json = resolved["format"] == "json";
    const std::string data = as_json ? cli::to_json_table(result.table) : cli::to_csv(result.table);
    const std::string meta = cli::sidecar_text(command, resolved, result);
    if (o.output.empty() || o.output == "-") {
        std::cout << data;
        std::cerr << meta;
    } else {
        cli::write_outputs(o.output, data, meta);
        std::cerr << "wrote " << o.output << " and " << cli::sidecar_path(o.output).string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperfine light-shift toolkit: magic fields, differential light shifts, lattices and Ramsey fringes"};
    app.require_subcommand(1);
    Options o;
    std::string chosen;
    for (const std::string& name : cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, cli::command_summary(name));
        sub->add_option("--config", o.config, "JSON config or a previous run's .meta.json sidecar");
        sub->add_option("--output,-o", o.output, "data file (sidecar written next to it); '-' for stdout");
        sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", o.seed, "RNG seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--set", o.overrides, "override a config key: key=json-value");
        sub->callback([&chosen, name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return run(chosen, o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_code_for(e);
    }
}
