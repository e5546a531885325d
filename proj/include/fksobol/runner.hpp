#pragma once

#include "fksobol/config.hpp"
#include "fksobol/sobol.hpp"

#include "json.hpp"

#include <optional>
#include <string>

namespace fksobol {

inline constexpr const char* tool_version = "1.0.0";

nlohmann::json to_json(const SobolEntry& e);
nlohmann::json to_json(const RunConfig& cfg);

/// Executes the pipeline for `cfg.mode` and returns the report. Writes
/// report.json and the optional CSV dumps into cfg.output.dir when
/// `write_files` is set. Failures are recorded in the report under
/// "errors" with "status": "error" rather than thrown.
nlohmann::json run(const RunConfig& cfg, bool write_files = true);

struct CliRequest {
    std::string config_path;
    Mode mode = Mode::elliptic;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};

/// Exit code: 0 on success, 1 if a stage failed, 2 on a config error.
int run_cli(const CliRequest& req);

} // namespace fksobol
