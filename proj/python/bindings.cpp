#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "ttx/analytics/metrics.hpp"
#include "ttx/analytics/render.hpp"
#include "ttx/cli/botscript.hpp"
#include "ttx/cli/simulate.hpp"
#include "ttx/common/error.hpp"
#include "ttx/definition/parser.hpp"
#include "ttx/definition/validate.hpp"
#include "ttx/eventlog/stream.hpp"
#include "ttx/toolkit/toolkit.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

py::object ToPython(const ordered_json& value) {
  return py::module_::import("json").attr("loads")(value.dump());
}

ordered_json DiagnosticJson(const ttx::definition::Diagnostic& d) {
  ordered_json out{{"path", d.path}, {"message", d.message}};
  out["line"] = d.line ? ordered_json(*d.line) : ordered_json();
  return out;
}

std::string JoinErrors(const std::vector<ttx::definition::Diagnostic>& errors) {
  std::string out;
  for (const auto& e : errors) out += (out.empty() ? "" : "\n") + e.ToString();
  return out;
}

ttx::definition::ExerciseDefinition MustParse(const std::string& text) {
  auto parsed = ttx::definition::ParseDefinition(text);
  if (!parsed.ok()) {
    throw ttx::Error(ttx::ErrorCode::kInvalidDefinition, "definition rejected:\n" + JoinErrors(parsed.errors));
  }
  return std::move(*parsed.definition);
}

py::object Validate(const std::string& text) {
  const auto parsed = ttx::definition::ParseDefinition(text);
  ordered_json out;
  out["ok"] = parsed.ok();
  out["errors"] = ordered_json::array();
  for (const auto& e : parsed.errors) out["errors"].push_back(DiagnosticJson(e));
  out["warnings"] = ordered_json::array();
  for (const auto& w : parsed.warnings) out["warnings"].push_back(DiagnosticJson(w));
  if (parsed.ok()) {
    const auto& def = *parsed.definition;
    out["summary"] = {{"name", def.name},
                      {"duration_minutes", def.duration_minutes},
                      {"injects", def.injects.size()},
                      {"tools", def.tools.size()},
                      {"milestones", def.milestones.size()},
                      {"actors", def.actors.size()},
                      {"pages", def.pages.size()}};
    const auto reach = ttx::definition::LintReachability(def);
    out["manual_only_injects"] = reach.manual_only_injects;
    out["manual_only_milestones"] = reach.manual_only_milestones;
  }
  return ToPython(out);
}

py::object Simulate(const std::string& definition, const std::string& script,
                    const std::optional<fs::path>& output, const std::optional<std::string>& start,
                    const std::vector<std::string>& teams, bool keep_going) {
  const auto def = MustParse(definition);
  const auto parsed = ttx::cli::ParseBotScript(script);
  if (!parsed.script) {
    std::string message = "bot script rejected:";
    for (const auto& e : parsed.errors) message += "\n" + e;
    throw ttx::Error(ttx::ErrorCode::kInvalidArgument, message);
  }
  ttx::cli::SimulationOptions options;
  if (start) {
    const auto ts = ttx::ParseTimestamp(*start);
    if (!ts) throw ttx::Error(ttx::ErrorCode::kInvalidArgument, "bad start timestamp '" + *start + "'");
    options.start = *ts;
  }
  options.teams = teams;
  options.keep_going = keep_going;

  ttx::cli::Simulation sim;
  {
    py::gil_scoped_release release;
    sim = ttx::cli::RunSimulation(def, *parsed.script, options);
    if (output) ttx::cli::ExportSimulation(sim, *output);
  }
  ordered_json out;
  out["teams"] = ordered_json::array();
  for (const auto& c : sim.coverage) {
    out["teams"].push_back({{"team_id", c.team_id},
                            {"reached", c.reached},
                            {"missed", c.missed},
                            {"injects_delivered", c.injects_delivered},
                            {"tool_uses", c.tool_uses},
                            {"rejected", c.rejected}});
  }
  out["failed_steps"] = sim.failed_steps;
  return ToPython(out);
}

py::object Report(const std::string& definition, const std::vector<fs::path>& team_dirs) {
  const auto def = MustParse(definition);
  std::vector<ttx::eventlog::TeamLogData> logs;
  for (const auto& dir : team_dirs) logs.push_back(ttx::eventlog::ReadTeamLogs(dir));
  return ToPython(ttx::analytics::ToJson(ttx::analytics::BuildReport(def, logs)));
}

py::object TimingStats(const std::vector<double>& minutes, std::int64_t team_count) {
  const auto stats = ttx::analytics::TimingStats("", minutes, team_count);
  const auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); };
  return ToPython({{"reached", stats.reached_count},
                   {"teams", stats.team_count},
                   {"min", opt(stats.min_minutes)},
                   {"mean", opt(stats.mean_minutes)},
                   {"max", opt(stats.max_minutes)}});
}

}  // namespace

PYBIND11_MODULE(_ttx, m) {
  m.doc() = "Tabletop exercise engine: definitions, dry runs and log analytics";

  py::register_exception<ttx::Error>(m, "TtxError", PyExc_ValueError);

  m.def("validate", &Validate, py::arg("text"),
        "Parse and validate definition text; returns the report as a dict.");
  m.def("normalize", [](const std::string& text) { return ttx::definition::SerializeDefinition(MustParse(text)); },
        py::arg("text"), "Canonical YAML for a valid definition.");
  m.def("simulate", &Simulate, py::arg("definition"), py::arg("script") = "", py::arg("output_dir") = py::none(),
        py::arg("start") = py::none(), py::arg("teams") = std::vector<std::string>{},
        py::arg("keep_going") = false,
        "Deterministic scripted dry run; writes four JSONL files per team when output_dir is given.");
  m.def("report", &Report, py::arg("definition"), py::arg("team_dirs"),
        "Analytics report over exported team log directories.");
  m.def("completion_ratio",
        [](std::int64_t reached, std::int64_t defined) {
          const auto r = ttx::analytics::CompletionRatio(reached, defined);
          return py::dict(py::arg("numerator") = r.numerator, py::arg("denominator") = r.denominator,
                          py::arg("fraction") = r.fraction, py::arg("percent") = r.percent);
        },
        py::arg("reached"), py::arg("defined"));
  m.def("rounded_percent", &ttx::analytics::RoundedPercent, py::arg("numerator"), py::arg("denominator"));
  m.def("timing_stats", &TimingStats, py::arg("minutes"), py::arg("team_count"));
  m.def("tool_catalog", &ttx::toolkit::SerializeCatalog, "Builtin tool catalog as YAML.");
  m.def("format_timestamp",
        [](std::int64_t micros) { return ttx::FormatTimestamp(ttx::Timestamp{ttx::Duration{micros}}); },
        py::arg("micros"), "Microseconds since the epoch to YYYY-MM-DDTHH:MM:SS.ffffffZ.");
  m.def("parse_timestamp",
        [](const std::string& text) -> std::optional<std::int64_t> {
          const auto ts = ttx::ParseTimestamp(text);
          if (!ts) return std::nullopt;
          return ts->time_since_epoch().count();
        },
        py::arg("text"));
}
