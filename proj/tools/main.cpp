#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qpnls/harness.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool resume = false;
};

std::string config_kind(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str()).value("kind", "");
  } catch (const std::exception&) {
    return "";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Spectral simulator and analysis toolkit for Schrodinger evolutions in "
      "anisotropic quadratic potentials"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {
      "evolve",     "linear-test",   "dispersion-fit",
      "weights",    "gn-check",      "scattering",
      "wave-operator", "sweep",      "check-condition"};

  for (const std::string& kind : kinds) {
    auto args = std::make_shared<Args>();
    CLI::App* sub = app.add_subcommand(kind, "Run a '" + kind + "' experiment");
    sub->add_option("--config", args->config, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args->out, "Output directory")->required();
    sub->add_option("--seed", args->seed, "Deterministic seed");
    sub->add_flag("--resume", args->resume,
                  "Reuse existing outputs when the manifest matches");
    sub->callback([kind, args] {
      const std::string cfg_kind = config_kind(args->config);
      if (cfg_kind != kind) {
        std::fprintf(stderr,
                     "config kind '%s' does not match subcommand '%s'\n",
                     cfg_kind.c_str(), kind.c_str());
        std::exit(2);
      }
      const qpnls::RunOutcome outcome =
          qpnls::run_experiment(args->config, args->out, args->seed,
                                args->resume);
      if (outcome.exit_code == 0) {
        std::printf("%s%s: %s\n", outcome.resumed ? "resumed " : "",
                    kind.c_str(), outcome.manifest_path.c_str());
      } else {
        std::fprintf(stderr, "%s failed: %s\n", kind.c_str(),
                     outcome.error_path.empty() ? "(no error.json written)"
                                                : outcome.error_path.c_str());
      }
      std::exit(outcome.exit_code);
    });
  }

  CLI11_PARSE(app, argc, argv);
  return 0;
}
