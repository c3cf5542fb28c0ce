// Command-line front end for the bias audit pipeline.
//
//   audit run --config audit.json [--seed N] [--out DIR] [--threads N]
//   audit report --in DIR --format csv|json [--table impact|scenarios]
//
// FAIRSWAP_LOG=quiet|info|debug controls stderr verbosity (default info).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "fairswap/audit.hpp"
#include "fairswap/error.hpp"

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("FAIRSWAP_LOG");
  if (!env) return LogLevel::Info;
  const std::string v(env);
  if (v == "quiet" || v == "error" || v == "0") return LogLevel::Quiet;
  if (v == "debug" || v == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) std::cerr << "audit: " << msg << '\n';
}

int run(const std::string& config_path, const CLI::Option* seed_opt, std::uint64_t seed,
        const std::string& out, std::size_t threads) {
  fairswap::AuditConfig config = [&] {
    try {
      return fairswap::load_config(config_path);
    } catch (const std::exception& e) {
      throw fairswap::StageError("config", e.what());
    }
  }();
  // flags > file > defaults
  if (seed_opt->count()) config.seed = config.model.seed = seed;
  if (!out.empty()) config.output_dir = out;
  if (threads > 0) config.threads = threads;

  log(LogLevel::Debug, "data " + config.data_path + ", seed " + std::to_string(config.seed));
  const fairswap::AuditReport report = fairswap::run_audit(config);
  for (const auto& w : report.warnings) log(LogLevel::Info, "warning: " + w);
  if (!report.dropped_correlated.empty()) {
    std::string names;
    for (const auto& n : report.dropped_correlated) names += " " + n;
    log(LogLevel::Info, "dropped correlated features:" + names);
  }
  try {
    fairswap::write_report(report, config.output_dir);
  } catch (const std::exception& e) {
    throw fairswap::StageError("write", e.what());
  }
  log(LogLevel::Info, "report written to " + config.output_dir);
  return 0;
}

int report(const std::string& dir, const std::string& format, const std::string& table) {
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ifstream in(path);
  if (!in) throw fairswap::StageError("report", "cannot open " + path.string());
  fairswap::ordered_json doc;
  try {
    doc = fairswap::ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw fairswap::StageError("report", e.what());
  }
  if (format == "json") {
    std::cout << doc.dump(2) << '\n';
    return 0;
  }
  try {
    std::cout << (table == "scenarios" ? fairswap::render_scenario_table(doc)
                                       : fairswap::render_impact_table(doc));
  } catch (const std::exception& e) {
    throw fairswap::StageError("report", e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias-inducing feature audit for tabular classifiers"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run the full audit pipeline");
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;
  run_cmd->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Master seed (overrides the config)");
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");
  run_cmd->add_option("--threads", threads, "Worker threads for fold analysis");

  auto* report_cmd = app.add_subcommand("report", "Render a finished report");
  std::string in_dir;
  std::string format = "csv";
  std::string table = "impact";
  report_cmd->add_option("--in", in_dir, "Directory written by 'audit run'")->required();
  report_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  report_cmd->add_option("--table", table, "Table for csv output")->check(CLI::IsMember({"impact", "scenarios"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, seed_opt, seed, out, threads);
    if (*report_cmd) return report(in_dir, format, table);
  } catch (const fairswap::StageError& e) {
    std::cerr << "audit: error " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "audit: error [internal] " << e.what() << '\n';
    return 1;
  }
  return 2;
}
