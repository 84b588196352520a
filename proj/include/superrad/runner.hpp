#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "superrad/config.hpp"

namespace superrad::io {

inline constexpr const char* tool_version = "0.1.0";

struct Artifact
{
    std::string name;  // file name relative to the output directory
    std::string content;
};

/// Runs the command and renders its data files in memory. Throws the solver
/// error unchanged.
std::vector<Artifact> execute(const RunConfig& config);

/// Writes every artifact to a temporary name first and renames once all of
/// them are complete.
void write_atomically(const std::filesystem::path& dir, const std::vector<Artifact>& files);

/// Exit status for an error kind: 2 for configuration errors, 1 otherwise.
int exit_code_for(const std::string& kind);

/// Writes error.json ({error, message, command}) and removes any stale
/// `<command>_result.*`. Returns exit_code_for(e.kind()).
int report_error(const std::filesystem::path& dir, const std::string& command, const Error& e);

/// execute + write_atomically + run_manifest.json. Returns the exit status;
/// failures are reported through report_error and a line on `log`.
int run(const RunConfig& config, std::ostream& log);

}  // namespace superrad::io
