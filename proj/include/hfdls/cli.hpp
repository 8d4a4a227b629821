#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hfdls::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kSidecarSchema = "hfdls.sidecar/1";

struct Table {
    std::string schema;  // e.g. "hfdls.breit-rabi/1"
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct CommandResult {
    Table table;
    nlohmann::json results;
};

const std::vector<std::string>& command_names();
/// One-line help text for a command.
std::string command_summary(const std::string& command);

/// Complete key set with the defaults for `command`.
nlohmann::json default_config(const std::string& command);

/// Overlays `user` on the defaults. Rejects unknown keys and type mismatches with
/// ConfigError naming the key; checks value ranges.
nlohmann::json resolve_config(const std::string& command, const nlohmann::json& user);

/// Reads a config document or a sidecar (whose "config" member is used). Parse errors
/// carry line and column.
nlohmann::json read_config_file(const std::filesystem::path& path, const std::string& command);

CommandResult run_command(const std::string& command, const nlohmann::json& resolved,
                          unsigned threads = 1);

std::string format_number(double v);
std::string to_csv(const Table& table);
Table parse_csv(const std::string& text);
std::string to_json_table(const Table& table);
std::string sidecar_text(const std::string& command, const nlohmann::json& resolved,
                         const CommandResult& result);

/// Writes `data` and `data.meta.json` through temporaries renamed on success.
void write_outputs(const std::filesystem::path& data, const std::string& data_text,
                   const std::string& sidecar);

std::filesystem::path sidecar_path(const std::filesystem::path& data);

/// 0 ok, 2 validation, 3 numerical failure, 4 no root or extremum, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace hfdls::cli
