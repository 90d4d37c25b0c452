// qrc: command-line front end for the experiment pipelines.
//
// Errors are reported on stderr as
//   {"error": {"category": "...", "message": "...", "exit_code": N}}
// with the process exiting with N (see qrc::exit_code).

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "qrc/qrc.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::optional<std::size_t> threads;
  bool timing = false;
};

void add_global_options(CLI::App& app, GlobalOptions& g) {
  app.add_option("--config", g.config, "JSON config file mirroring ExperimentConfig");
  app.add_option("--seed", g.seed, "Base seed (overrides the config file)");
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", g.threads, "Worker threads (overrides the config file)")->check(CLI::PositiveNumber);
  app.add_flag("--timing", g.timing, "Include wall_time in the report");
}

int report_error(qrc::ErrorCategory category, const std::string& message) {
  const int code = qrc::exit_code(category);
  nlohmann::ordered_json j;
  j["error"] = {{"category", std::string(qrc::to_string(category))}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << '\n';
  return code;
}

int run(qrc::Task task, const GlobalOptions& g) {
  auto cfg = qrc::load_config(task, g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  const auto start = std::chrono::steady_clock::now();
  auto report = qrc::run_experiment(cfg);
  if (g.timing)
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  qrc::emit_report(report, g.out, g.format == "csv" ? qrc::ReportFormat::csv : qrc::ReportFormat::json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum reservoir computing with random-matrix measurements"};
  app.require_subcommand(1);
  GlobalOptions g;
  add_global_options(app, g);

  const std::pair<const char*, qrc::Task> commands[] = {
      {"spectra", qrc::Task::spectra},
      {"measure-stats", qrc::Task::measure_stats},
      {"cosine", qrc::Task::cosine},
      {"scan", qrc::Task::scan},
      {"interpolate", qrc::Task::interpolation},
      {"mackey-glass", qrc::Task::mackey_glass},
      {"gen-data", qrc::Task::gen_data},
  };
  const char* descriptions[] = {
      "Eigenvalue spectra of random Hermitian observables",
      "Expectation statistics of random observables on reduced random states",
      "Open-loop cosine prediction",
      "Coupling x state dimension x horizon scan on the cosine task",
      "Shuffled-split interpolation with spline baselines",
      "Open-loop Mackey-Glass prediction",
      "Emit a synthetic or generated time series",
  };
  std::optional<qrc::Task> chosen;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, descriptions[i]);
    add_global_options(*sub, g);
    const auto task = commands[i].second;
    sub->callback([&chosen, task] { chosen = task; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(qrc::ErrorCategory::argument, e.what());
  }

  try {
    return run(*chosen, g);
  } catch (const qrc::Error& e) {
    return report_error(e.category(), e.what());
  } catch (const std::bad_alloc&) {
    return report_error(qrc::ErrorCategory::size_limit, "out of memory");
  } catch (const std::exception& e) {
    return report_error(qrc::ErrorCategory::numerical, e.what());
  }
}
