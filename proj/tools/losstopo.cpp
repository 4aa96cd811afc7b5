#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "losstopo/cli/commands.hpp"
#include "losstopo/cli/config.hpp"

namespace cli = losstopo::cli;
namespace fs = std::filesystem;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("losstopo");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("LOSSTOPO_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

struct Options {
  std::optional<fs::path> config;
  fs::path out = "out";
  cli::Overrides overrides;
};

void add_common(CLI::App* sub, Options& o, bool needs_config) {
  auto* c = sub->add_option("--config", o.config, "experiment JSON");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "artifact directory")->capture_default_str();
  sub->add_option("--jobs", o.overrides.jobs, "worker threads (0: all cores)");
  sub->add_option("--seed", o.overrides.seed, "experiment seed");
}

void add_homotopy(CLI::App* sub, Options& o) {
  sub->add_option("--threshold", o.overrides.threshold, "barrier threshold or 'auto'");
}

void add_persist(CLI::App* sub, Options& o) {
  sub->add_option("--radius", o.overrides.radius, "landscape sampling radius");
  sub->add_option("--samples", o.overrides.samples, "landscape samples per run");
  sub->add_option("--landmarks", o.overrides.landmarks, "maxmin landmarks (rips)");
  sub->add_option("--mode", o.overrides.mode, "rips or sublevel")->check(CLI::IsMember({"rips", "sublevel"}));
  sub->add_option("--points-file", o.overrides.points_file, "persistence of a CSV point cloud")
      ->check(CLI::ExistingFile);
}

cli::ExperimentConfig resolve(const Options& o) {
  auto config = o.config ? cli::load_experiment(*o.config) : cli::load_saved_config(o.out);
  cli::apply_overrides(config, o.overrides);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Topological analysis of neural network loss landscapes"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "train every run of the sweep");
  add_common(train, o, true);
  auto* homotopy = app.add_subcommand("homotopy", "homotopy classes of the trained paths");
  add_common(homotopy, o, false);
  add_homotopy(homotopy, o);
  auto* persist = app.add_subcommand("persist", "landscape persistence and gap model");
  add_common(persist, o, false);
  add_persist(persist, o);
  auto* transfer = app.add_subcommand("transfer", "pullback transfer against baselines");
  add_common(transfer, o, false);
  auto* report = app.add_subcommand("report", "markdown summary of the artifacts");
  report->add_option("--out", o.out, "artifact directory")->capture_default_str();
  auto* run = app.add_subcommand("run", "every stage listed in the config");
  add_common(run, o, true);
  add_homotopy(run, o);
  add_persist(run, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (*report) return cli::cmd_report(o.out);
    const auto config = resolve(o);
    if (*train) return cli::cmd_train(config, o.out);
    if (*homotopy) return cli::cmd_homotopy(config, o.out);
    if (*persist) return cli::cmd_persist(config, o.out, o.overrides.points_file);
    if (*transfer) return cli::cmd_transfer(config, o.out);
    return cli::run_pipeline(config, o.out);
  } catch (...) {
    return cli::exit_code_for_current_exception();
  }
}
