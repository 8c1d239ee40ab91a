#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "stablefield/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Linear random fields with stable-domain innovations: normalizers, diagnostics and Monte Carlo"};
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("config", config_path, "Experiment config file")->required();
  app.add_option("--mode", mode, "Override the config mode")
      ->check(CLI::IsMember({"weights", "normalize", "simulate", "llt", "asymptotics", "conditions", "tabulate"}));
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--out", out_dir, "Output directory");
  app.set_version_flag("--version", std::string(STABLEFIELD_VERSION_STRING));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "usage_error: " << e.what() << '\n';
    return 2;
  }

  try {
    stablefield::cli::RunOptions options{mode, seed, out_dir};
    const auto config = stablefield::cli::load_config(config_path);
    const auto summary = stablefield::cli::run_experiment(config, options, std::cerr);
    std::cout << "wrote " << summary["config"]["outputs"]["dir"].get<std::string>() << "/summary.json ("
              << summary["mode"].get<std::string>() << ", " << summary["wall_time_s"].get<double>() << " s)\n";
  } catch (const stablefield::Error& e) {
    std::cerr << stablefield::error_class_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal_error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
