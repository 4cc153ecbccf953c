#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ttx/common/time.hpp"

namespace ttx::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitDomainFailure = 1,  // invalid definition, failed dry run, ...
  kExitUsageOrIo = 2,      // bad flags, unreadable or unwritable files
};

int CmdValidate(const std::filesystem::path& definition, bool json, std::ostream& out,
                std::ostream& err);

struct SimulateArgs {
  std::filesystem::path definition;
  std::filesystem::path script;  // empty = no actions
  std::filesystem::path output;
  std::optional<Timestamp> start;
  std::vector<std::string> teams;
  bool require_all = false;  // exit 1 unless every team reaches every milestone
};

int CmdSimulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct ReportArgs {
  std::filesystem::path definition;
  std::vector<std::filesystem::path> log_dirs;  // team dirs or parents of team dirs
  std::filesystem::path json_output = "report.json";
};

int CmdReport(const ReportArgs& args, std::ostream& out, std::ostream& err);

struct ExportArgs {
  std::string url;   // base URL of a running service
  std::string code;  // instructor access code
  std::filesystem::path output;
  bool catalog = false;  // print the builtin tool catalog instead
};

int CmdExport(const ExportArgs& args, std::ostream& out, std::ostream& err);

struct ServeArgs {
  std::optional<std::filesystem::path> config;  // YAML: host, port, data_dir, instructor_code
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::string> instructor_code;
  std::optional<std::filesystem::path> deploy;  // definition to deploy at startup
  std::vector<std::string> teams;
  bool start = false;  // also start the deployed exercise
  int tick_ms = 250;
};

int CmdServe(const ServeArgs& args, std::ostream& out, std::ostream& err);

// Team log directories under `path`: `path` itself if it holds stream files,
// otherwise its immediate subdirectories that do, sorted by name.
std::vector<std::filesystem::path> FindTeamDirectories(const std::filesystem::path& path);

}  // namespace ttx::cli
