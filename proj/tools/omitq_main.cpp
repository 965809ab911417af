// Command-line front end: `omitq run` executes a configured experiment,
// `omitq list` prints the registry. Exit codes: 0 success, 2 config error,
// 3 solver error, 4 resource limit.
#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "omitq/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitResource = 4;

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::string& method_override, int threads_override) {
  omitq::ExperimentConfig config;
  try {
    config = omitq::ExperimentConfig::load_file(config_path);
    if (!method_override.empty()) {
      if (method_override == "linear-response") {
        config.method = omitq::SidebandMethod::LinearResponse;
      } else if (method_override == "time-domain") {
        config.method = omitq::SidebandMethod::TimeDomain;
      } else {
        throw omitq::ConfigError("--method must be 'linear-response' or "
                                 "'time-domain'");
      }
    }
    if (threads_override > 0) config.threads = threads_override;
  } catch (const omitq::ConfigError& e) {
    std::cerr << "config error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitConfig;
  }

  for (const auto& w : config.params.warnings()) {
    std::cerr << "warning: " << w << "\n";
  }

  try {
    const omitq::RunOutput out = omitq::run_experiment(config, out_dir);
    for (const auto& f : out.files) {
      std::cout << "wrote " << f.string() << "\n";
    }
    return 0;
  } catch (const omitq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const omitq::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-tone optomechanical transmission simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method;
  int threads = 0;

  auto* run = app.add_subcommand("run", "run an experiment from a config");
  run->add_option("--config", config_path, "config file (key = value)")
      ->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--method", method,
                  "override sideband method: linear-response | time-domain");
  run->add_option("--threads", threads, "parallel workers for sweep points");
  // Reserved: the tool is fully deterministic and takes no seed. The bare
  // flag is accepted; any value is rejected.
  run->add_flag("--seedless")->disable_flag_override();

  auto* list = app.add_subcommand("list", "list available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (list->parsed()) {
    std::cout << omitq::list_experiments();
    return 0;
  }
  return run_command(config_path, out_dir, method, threads);
}
