#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "aniso/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic energy experiments: certification, solves, profiles and checks"};
  std::string config;
  aniso::cli::RunOptions opt;
  std::uint64_t seed = 0;
  std::string out = "out";
  app.add_option("--config", config, "INI run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "seed overriding task.seed");
  app.add_option("--refine", opt.refine, "halve h this many times and emit a refinement table")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aniso::cli::kUsage;
  }
  opt.out = out;
  if (*seed_opt) opt.seed = seed;
  return aniso::cli::run(config, opt, std::cerr);
}
