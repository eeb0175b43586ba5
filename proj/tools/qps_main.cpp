// qps — phase-space decoherence toolkit, batch CLI.
//
// Subcommands:
//   qps run <config.json> [--out DIR] [--format csv,json,gnuplot] [--verbose]
//   qps validate <config.json>
//   qps version
//
// Exit codes: 0 success, 1 configuration error, 2 numerical/domain failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qps/qps.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qps::ParseError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_out_dir(const std::string& flag_dir, const qps::RunConfig& cfg) {
  if (!flag_dir.empty()) return flag_dir;
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  if (const char* env = std::getenv("QPS_OUT_DIR"); env && *env) return env;
  return ".";
}

void apply_format_flag(const std::string& formats, qps::RunConfig& cfg) {
  if (formats.empty()) return;
  cfg.output.csv = cfg.output.json = cfg.output.gnuplot = false;
  std::stringstream ss(formats);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv")
      cfg.output.csv = true;
    else if (item == "json")
      cfg.output.json = true;
    else if (item == "gnuplot")
      cfg.output.gnuplot = true;
    else
      throw qps::ValidationError("--format entries must be csv, json or gnuplot");
  }
}

/// Wraps a module failure into a minimal report so batch pipelines always
/// find report.json, then returns the exit code.
int emit_error_report(const qps::RunConfig& cfg, const std::string& dir,
                      const std::string& message, int code) {
  try {
    std::filesystem::create_directories(dir);
    nlohmann::json report;
    report["schema_version"] = qps::kReportSchemaVersion;
    report["tool_version"] = qps::kVersion;
    report["mode"] = qps::to_string(cfg.mode);
    report["config"] = cfg.echo;
    report["error"] = message;
    report["files"] = nlohmann::json::array();
    std::ofstream out(std::filesystem::path(dir) / "report.json", std::ios::binary);
    out << report.dump(2) << '\n';
  } catch (...) {
    // report emission is best effort; the exit code carries the failure
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qps — pointer states and decoherence in quantum phase space"};
  app.require_subcommand(1);

  std::string config_path, out_dir, formats;
  bool verbose = false;

  CLI::App* cmd_run = app.add_subcommand("run", "Execute a run configuration");
  cmd_run->add_option("config", config_path, "JSON run configuration")->required();
  cmd_run->add_option("--out", out_dir, "Output directory");
  cmd_run->add_option("--format", formats, "Comma list of csv,json,gnuplot");
  cmd_run->add_flag("--verbose", verbose, "Print report scalars");

  std::string validate_path;
  CLI::App* cmd_validate = app.add_subcommand("validate", "Parse and validate a configuration");
  cmd_validate->add_option("config", validate_path, "JSON run configuration")->required();

  CLI::App* cmd_version = app.add_subcommand("version", "Print the tool version");

  CLI11_PARSE(app, argc, argv);

  if (cmd_version->parsed()) {
    std::cout << "qps " << qps::kVersion << '\n';
    return 0;
  }

  if (cmd_validate->parsed()) {
    try {
      (void)qps::parse_config(read_file(validate_path));
      std::cout << "OK\n";
      return 0;
    } catch (const qps::Error& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return 1;
    }
  }

  // run
  qps::RunConfig cfg;
  try {
    cfg = qps::parse_config(read_file(config_path));
    apply_format_flag(formats, cfg);
  } catch (const qps::Error& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 1;
  }
  const std::string dir = resolve_out_dir(out_dir, cfg);
  try {
    const qps::RunArtifacts art = qps::run(cfg, dir);
    if (verbose) {
      std::cout << art.report.dump(2) << '\n';
    } else {
      std::cout << "wrote " << art.files.size() + (cfg.output.json ? 1 : 0) << " file(s) to "
                << dir << '\n';
    }
    return 0;
  } catch (const qps::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return emit_error_report(cfg, dir, e.what(), 1);
  } catch (const qps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return emit_error_report(cfg, dir, e.what(), 2);
  }
}
