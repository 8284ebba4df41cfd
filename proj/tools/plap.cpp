#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plap/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Discrete audit tool for the singular p-Laplacian and its gradient flow"};
  cli.set_version_flag("--version", plap::kToolVersion);
  cli.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  for (const auto& [name, help] : plap::subcommand_help()) {
    auto* sub = cli.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "run configuration (JSON)");
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir and PLAP_OUTPUT_ROOT)");
    if (name == "verify-estimates")
      sub->add_option("--run-dir", run_dir, "audit a finished solve-parabolic output directory");
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : plap::kExitConfig;
  }
  const std::string name = cli.get_subcommands().front()->get_name();

  plap::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = plap::parse_config(config_path);
  } catch (const plap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return plap::kExitConfig;
  }
  if (!run_dir.empty() && out_dir.empty() && cfg.output.dir.empty())
    out_dir = (std::filesystem::path(run_dir) / "verify").string();
  return plap::run_subcommand(name, cfg, out_dir, &std::cerr, run_dir);
}
