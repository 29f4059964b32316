#pragma once

#include "rotip/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rotip {

/// Everything a run produces, held in memory until the run finishes.
struct RunArtifacts
{
    std::string log_csv;
    std::vector<std::pair<std::string, std::string>> frames; // file name, PPM bytes
    std::vector<std::optional<bool>> success;                // one per command
    World final_world;
    std::vector<LogRecord> log;
};

struct RunOutputs
{
    std::filesystem::path log_path;
    std::vector<std::filesystem::path> frame_paths;
    std::filesystem::path summary_path;
    RunArtifacts artifacts;
};

/// CSV header, fixed column order.
std::string log_csv_header();
/// One CSV row; numbers use %.6g, absent fields are empty.
std::string log_csv_row(const LogRecord& r);

/// Runs the command list. Errors raised by a command are rethrown as
/// SimulationError carrying its index.
RunArtifacts simulate(const ScenarioConfig& cfg);

/// simulate(), then writes log.csv, the frames and summary.json (last) into
/// out_dir. Nothing is written if the simulation fails.
RunOutputs run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

} // namespace rotip
