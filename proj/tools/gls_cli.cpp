#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gls/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"GLS norm-bound calculus: bound, tail and verify pipelines"};
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  app.add_option("--config", config, "JSON run config")->required();
  app.add_option("--out", out_dir, "report directory");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--tolerance", tolerance, "override the certificate tolerance");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gls::cli::kParseError;
  }

  const auto result = gls::cli::run_file(config, out_dir, seed, tolerance);
  if (!result.message.empty()) std::cerr << result.message << '\n';
  return result.exit_code;
}
