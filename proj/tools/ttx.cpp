#include <CLI11.hpp>

#include <iostream>

#include "ttx/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace ttx::cli;

  CLI::App app{"ttx - tabletop exercise orchestration"};
  app.require_subcommand(1);
  int code = kExitOk;

  auto* validate = app.add_subcommand("validate", "Parse and validate a definition file");
  std::string validate_path;
  bool validate_json = false;
  validate->add_option("definition", validate_path, "Definition file")->required();
  validate->add_flag("--json", validate_json, "Print the report as JSON");
  validate->callback([&] { code = CmdValidate(validate_path, validate_json, std::cout, std::cerr); });

  auto* simulate = app.add_subcommand("simulate", "Deterministic scripted dry run");
  SimulateArgs sim;
  std::string sim_start;
  std::string sim_definition, sim_script, sim_output;
  simulate->add_option("definition", sim_definition, "Definition file")->required();
  simulate->add_option("script", sim_script, "Bot script (omit for a run without actions)");
  simulate->add_option("-o,--out", sim_output, "Output directory for per-team logs")->required();
  simulate->add_option("--start", sim_start, "Exercise start, YYYY-MM-DDTHH:MM:SS.ffffffZ");
  simulate->add_option("--teams", sim.teams, "Extra team ids to run")->delimiter(',');
  simulate->add_flag("--require-all", sim.require_all, "Exit 1 unless all milestones are reached");
  simulate->callback([&] {
    sim.definition = sim_definition;
    sim.script = sim_script;
    sim.output = sim_output;
    if (!sim_start.empty()) {
      sim.start = ttx::ParseTimestamp(sim_start);
      if (!sim.start) {
        std::cerr << "error: --start must look like 2024-01-01T09:00:00.000000Z\n";
        code = kExitUsageOrIo;
        return;
      }
    }
    code = CmdSimulate(sim, std::cout, std::cerr);
  });

  auto* report = app.add_subcommand("report", "Analytics report from exported team logs");
  ReportArgs report_args;
  std::string report_definition, report_json = "report.json";
  std::vector<std::string> report_dirs;
  report->add_option("-d,--definition", report_definition, "Definition file (milestone set)")
      ->required();
  report->add_option("log_dirs", report_dirs, "Team log directories or their parents")->required();
  report->add_option("-o,--json", report_json, "Machine-readable report path")
      ->capture_default_str();
  report->callback([&] {
    report_args.definition = report_definition;
    report_args.json_output = report_json;
    for (const auto& dir : report_dirs) report_args.log_dirs.emplace_back(dir);
    code = CmdReport(report_args, std::cout, std::cerr);
  });

  auto* exporter = app.add_subcommand("export", "Fetch team logs from a running service");
  ExportArgs export_args;
  std::string export_out;
  exporter->add_option("--url", export_args.url, "Service base URL, e.g. http://127.0.0.1:8080");
  exporter->add_option("--code", export_args.code, "Instructor access code");
  exporter->add_option("-o,--out", export_out, "Output directory");
  exporter->add_flag("--catalog", export_args.catalog, "Print the builtin tool catalog instead");
  exporter->callback([&] {
    export_args.output = export_out;
    code = CmdExport(export_args, std::cout, std::cerr);
  });

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  ServeArgs serve_args;
  std::string serve_config, serve_host, serve_data, serve_code, serve_deploy;
  int serve_port = -1;
  serve->add_option("-c,--config", serve_config, "YAML config: host, port, data_dir, instructor_code");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 = any free port)");
  serve->add_option("--data-dir", serve_data, "Directory for live logs and exports");
  serve->add_option("--instructor-code", serve_code, "Instructor access code");
  serve->add_option("--deploy", serve_deploy, "Definition to deploy at startup");
  serve->add_option("--teams", serve_args.teams, "Team ids for --deploy")->delimiter(',');
  serve->add_flag("--start", serve_args.start, "Start the deployed exercise immediately");
  serve->add_option("--tick-ms", serve_args.tick_ms, "Trigger polling period")
      ->capture_default_str();
  serve->callback([&] {
    if (!serve_config.empty()) serve_args.config = serve_config;
    if (!serve_host.empty()) serve_args.host = serve_host;
    if (serve_port >= 0) serve_args.port = serve_port;
    if (!serve_data.empty()) serve_args.data_dir = serve_data;
    if (!serve_code.empty()) serve_args.instructor_code = serve_code;
    if (!serve_deploy.empty()) serve_args.deploy = serve_deploy;
    code = CmdServe(serve_args, std::cout, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsageOrIo;
  }
  return code;
}
