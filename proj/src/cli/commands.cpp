#include "ttx/cli/commands.hpp"

#include <httplib.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "ttx/analytics/metrics.hpp"
#include "ttx/analytics/render.hpp"
#include "ttx/cli/botscript.hpp"
#include "ttx/cli/simulate.hpp"
#include "ttx/common/error.hpp"
#include "ttx/definition/parser.hpp"
#include "ttx/definition/validate.hpp"
#include "ttx/eventlog/stream.hpp"
#include "ttx/service/http_server.hpp"
#include "ttx/toolkit/toolkit.hpp"

namespace ttx::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void PrintDiagnostics(const definition::ParseResult& parsed, std::ostream& err) {
  for (const auto& error : parsed.errors) err << "error: " << error.ToString() << "\n";
  for (const auto& warning : parsed.warnings) err << "warning: " << warning.ToString() << "\n";
}

ordered_json DiagnosticJson(const definition::Diagnostic& d) {
  ordered_json out;
  out["path"] = d.path;
  if (d.line) out["line"] = *d.line;
  out["message"] = d.message;
  return out;
}

// Loads and parses a definition; on failure prints diagnostics and sets `code`.
std::optional<definition::ExerciseDefinition> LoadDefinition(const fs::path& path, int& code,
                                                             std::ostream& err) {
  definition::ParseResult parsed;
  try {
    parsed = definition::LoadDefinitionFile(path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = kExitUsageOrIo;
    return std::nullopt;
  }
  if (!parsed.ok()) {
    PrintDiagnostics(parsed, err);
    code = kExitDomainFailure;
    return std::nullopt;
  }
  return std::move(parsed.definition);
}

volatile std::sig_atomic_t g_stop_requested = 0;

}  // namespace

int CmdValidate(const fs::path& path, bool json, std::ostream& out, std::ostream& err) {
  definition::ParseResult parsed;
  try {
    parsed = definition::LoadDefinitionFile(path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageOrIo;
  }
  std::optional<definition::ReachabilityReport> reach;
  if (parsed.ok()) reach = definition::LintReachability(*parsed.definition);

  if (json) {
    ordered_json report;
    report["ok"] = parsed.ok();
    report["errors"] = ordered_json::array();
    for (const auto& e : parsed.errors) report["errors"].push_back(DiagnosticJson(e));
    report["warnings"] = ordered_json::array();
    for (const auto& w : parsed.warnings) report["warnings"].push_back(DiagnosticJson(w));
    if (parsed.ok()) {
      const auto& def = *parsed.definition;
      report["summary"] = {{"name", def.name},
                           {"duration_minutes", def.duration_minutes},
                           {"injects", def.injects.size()},
                           {"tools", def.tools.size()},
                           {"milestones", def.milestones.size()},
                           {"actors", def.actors.size()},
                           {"pages", def.pages.size()}};
      report["manual_only_injects"] = reach->manual_only_injects;
      report["manual_only_milestones"] = reach->manual_only_milestones;
    }
    out << report.dump(2) << "\n";
    return parsed.ok() ? kExitOk : kExitDomainFailure;
  }

  for (const auto& error : parsed.errors) out << "error: " << error.ToString() << "\n";
  for (const auto& warning : parsed.warnings) out << "warning: " << warning.ToString() << "\n";
  if (!parsed.ok()) {
    out << "INVALID: " << parsed.errors.size() << " error(s)\n";
    return kExitDomainFailure;
  }
  const auto& def = *parsed.definition;
  if (!reach->manual_only_injects.empty()) {
    out << "note: injects delivered only by an instructor:";
    for (const auto& id : reach->manual_only_injects) out << " " << id;
    out << "\n";
  }
  if (!reach->manual_only_milestones.empty()) {
    out << "note: milestones reachable only with instructor injects:";
    for (const auto& id : reach->manual_only_milestones) out << " " << id;
    out << "\n";
  }
  out << "OK: " << def.name << " (" << def.duration_minutes << " min, " << def.injects.size()
      << " injects, " << def.tools.size() << " tools, " << def.milestones.size()
      << " milestones, " << def.actors.size() << " actors)\n";
  return kExitOk;
}

int CmdSimulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  const auto def = LoadDefinition(args.definition, code, err);
  if (!def) return code;

  BotScript script;
  if (!args.script.empty()) {
    BotScriptResult parsed;
    try {
      parsed = LoadBotScript(args.script);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsageOrIo;
    }
    if (!parsed.script) {
      for (const auto& error : parsed.errors) err << "error: " << args.script.string() << ": " << error << "\n";
      return kExitDomainFailure;
    }
    script = std::move(*parsed.script);
  }

  SimulationOptions options;
  if (args.start) options.start = *args.start;
  options.teams = args.teams;
  Simulation sim;
  try {
    sim = RunSimulation(*def, script, options);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
  try {
    ExportSimulation(sim, args.output);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageOrIo;
  }

  bool complete = true;
  const std::size_t defined = def->milestones.size();
  out << "Simulated " << def->name << " for " << sim.coverage.size() << " team(s), logs in "
      << args.output.string() << "\n";
  for (const auto& team : sim.coverage) {
    out << "  " << team.team_id << ": " << team.reached.size() << "/" << defined
        << " milestones, " << team.injects_delivered << " injects, " << team.tool_uses
        << " tool uses, " << team.rejected << " rejected\n";
    if (!team.missed.empty()) {
      complete = false;
      out << "    missed:";
      for (const auto& id : team.missed) out << " " << id;
      out << "\n";
    }
  }
  if (args.require_all && !complete) {
    err << "error: not every team reached every milestone\n";
    return kExitDomainFailure;
  }
  return kExitOk;
}

std::vector<fs::path> FindTeamDirectories(const fs::path& path) {
  if (eventlog::IsTeamLogDirectory(path)) return {path};
  std::vector<fs::path> dirs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(path, ec)) {
    if (entry.is_directory() && eventlog::IsTeamLogDirectory(entry.path())) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

int CmdReport(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  const auto def = LoadDefinition(args.definition, code, err);
  if (!def) return code;

  std::vector<eventlog::TeamLogData> teams;
  for (const auto& dir : args.log_dirs) {
    if (!fs::is_directory(dir)) {
      err << "error: not a directory: " << dir.string() << "\n";
      return kExitUsageOrIo;
    }
    const auto team_dirs = FindTeamDirectories(dir);
    if (team_dirs.empty()) err << "warning: no team logs under " << dir.string() << "\n";
    for (const auto& team_dir : team_dirs) {
      try {
        teams.push_back(eventlog::ReadTeamLogs(team_dir));
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsageOrIo;
      }
    }
  }

  const analytics::ExerciseReport report = analytics::BuildReport(*def, teams);
  for (const auto& skipped : report.skipped) {
    err << "warning: skipped " << skipped.directory << ": " << skipped.reason << "\n";
  }
  std::ofstream file(args.json_output, std::ios::binary | std::ios::trunc);
  file << analytics::ToJson(report).dump(2) << "\n";
  file.flush();
  if (!file) {
    err << "error: cannot write " << args.json_output.string() << "\n";
    return kExitUsageOrIo;
  }
  out << analytics::RenderText(report);
  out << "\nMachine-readable report: " << args.json_output.string() << "\n";
  return kExitOk;
}

int CmdExport(const ExportArgs& args, std::ostream& out, std::ostream& err) {
  if (args.catalog) {
    out << toolkit::SerializeCatalog();
    return kExitOk;
  }
  if (args.url.empty() || args.code.empty() || args.output.empty()) {
    err << "error: export needs --url, --code and --out (or --catalog)\n";
    return kExitUsageOrIo;
  }
  httplib::Client client(args.url);
  client.set_connection_timeout(5);
  const auto login = client.Post("/api/login", ordered_json{{"code", args.code}}.dump(),
                                 "application/json");
  if (!login) {
    err << "error: cannot reach " << args.url << "\n";
    return kExitUsageOrIo;
  }
  if (login->status != 200) {
    err << "error: login failed: " << login->body << "\n";
    return kExitDomainFailure;
  }
  const std::string token = nlohmann::json::parse(login->body).at("token").get<std::string>();
  const httplib::Headers auth = {{"Authorization", "Bearer " + token}};
  const auto status = client.Get("/api/exercise", auth);
  if (!status || status->status != 200) {
    err << "error: cannot read exercise status\n";
    return kExitDomainFailure;
  }
  const auto exercise = nlohmann::json::parse(status->body);
  if (!exercise.contains("teams")) {
    err << "error: no exercise deployed\n";
    return kExitDomainFailure;
  }
  for (const auto& team : exercise["teams"]) {
    const std::string team_id = team.get<std::string>();
    const fs::path dir = args.output / team_id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (const auto category : eventlog::kAllCategories) {
      const auto res = client.Get("/api/teams/" + team_id + "/logs/" +
                                      std::string(eventlog::ToString(category)),
                                  auth);
      if (!res || res->status != 200) {
        err << "error: cannot fetch " << eventlog::FileName(category) << " of " << team_id << "\n";
        return kExitDomainFailure;
      }
      std::ofstream file(dir / eventlog::FileName(category), std::ios::binary | std::ios::trunc);
      file << res->body;
      file.flush();
      if (!file) {
        err << "error: cannot write into " << dir.string() << "\n";
        return kExitUsageOrIo;
      }
    }
    out << "exported " << team_id << " -> " << dir.string() << "\n";
  }
  return kExitOk;
}

int CmdServe(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  std::string host = "127.0.0.1";
  int port = 8080;
  service::ServiceConfig config;
  if (args.config) {
    try {
      const YAML::Node node = YAML::LoadFile(args.config->string());
      for (const auto& entry : node) {
        const std::string key = entry.first.as<std::string>();
        if (key == "host") {
          host = entry.second.as<std::string>();
        } else if (key == "port") {
          port = entry.second.as<int>();
        } else if (key == "data_dir") {
          config.data_directory = entry.second.as<std::string>();
        } else if (key == "instructor_code") {
          config.instructor_code = entry.second.as<std::string>();
        } else {
          err << "error: unknown config key '" << key << "'\n";
          return kExitUsageOrIo;
        }
      }
    } catch (const YAML::Exception& e) {
      err << "error: config " << args.config->string() << ": " << e.what() << "\n";
      return kExitUsageOrIo;
    }
  }
  if (args.host) host = *args.host;
  if (args.port) port = *args.port;
  if (args.data_dir) config.data_directory = *args.data_dir;
  if (args.instructor_code) config.instructor_code = *args.instructor_code;
  if (config.instructor_code.empty()) {
    config.instructor_code = service::RandomHex(12);
    out << "instructor access code: " << config.instructor_code << "\n";
  }

  engine::SystemClock clock;
  service::ExerciseService svc(config, clock);
  if (args.deploy) {
    std::ifstream in(*args.deploy, std::ios::binary);
    if (!in) {
      err << "error: cannot read " << args.deploy->string() << "\n";
      return kExitUsageOrIo;
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<service::TeamAccess> teams;
    for (const auto& team : args.teams) teams.push_back({team, {}});
    if (teams.empty()) teams.push_back({"team-1", {}});
    try {
      const std::string token = svc.Login(config.instructor_code, "")["token"];
      const auto deployed = svc.Deploy(token, text, teams);
      out << "deployed " << deployed["name"].get<std::string>() << " as "
          << deployed["exercise_id"].get<std::string>() << "\n";
      for (const auto& team : deployed["teams"]) {
        out << "  team " << team["team_id"].get<std::string>() << " code "
            << team["code"].get<std::string>() << "\n";
      }
      if (args.start) svc.StartExercise(token);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitDomainFailure;
    }
  }
  svc.StartTicker(std::chrono::milliseconds(std::max(args.tick_ms, 10)));

  service::HttpServer server(svc);
  const int bound = server.Bind(host, port);
  if (bound < 0) {
    err << "error: cannot bind " << host << ":" << port << "\n";
    return kExitUsageOrIo;
  }
  out << "listening on http://" << host << ":" << bound << "\n" << std::flush;

  static service::HttpServer* active = nullptr;
  active = &server;
  std::signal(SIGINT, [](int) { g_stop_requested = 1; });
  std::signal(SIGTERM, [](int) { g_stop_requested = 1; });
  std::thread watcher([] {
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (active != nullptr) active->Stop();
  });
  server.Listen();
  g_stop_requested = 1;
  watcher.join();
  active = nullptr;
  return kExitOk;
}

}  // namespace ttx::cli
