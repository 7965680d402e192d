#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dnlens/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lens data, DN maps and coherent-state probing on planar conformal metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dnlens::cli::tool_version());

  dnlens::cli::RunOptions opt;
  std::string config;
  const char* commands[][2] = {
      {"lens", "lens relation sweep by geodesic integration"},
      {"wave", "one wave solve with a coherent boundary probe"},
      {"probe", "lens extraction from DN traces"},
      {"theorem31", "separation experiment for a speed pair"},
      {"corollary", "foliation and lens-equality report"},
      {"shiftdemo", "translation-operator norm demo"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config, "JSON config")->required();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--jobs", opt.jobs, "maximum worker threads");
  }
  CLI::App* val = app.add_subcommand("validate", "check a config without running it");
  std::string positional;
  val->add_option("path", positional, "JSON config");
  val->add_option("--config", config, "JSON config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dnlens::cli::kExitPrecondition;
  }
  if (config.empty()) config = positional;
  if (config.empty()) {
    std::cerr << "error: no config given\n";
    return dnlens::cli::kExitPrecondition;
  }
  opt.config_path = config;
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->get_name() == "validate") return dnlens::cli::validate(opt.config_path, std::cout, std::cerr);
    return dnlens::cli::run(sub->get_name(), opt, std::cout, std::cerr);
  }
  return dnlens::cli::kExitPrecondition;
}
