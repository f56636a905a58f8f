#include <functional>
#include <string>

#include <CLI11.hpp>

#include "spdebridge/commands.hpp"

namespace {

void add_common_options(CLI::App* sub, spdebridge::CliOptions& options) {
  sub->add_option("--config", options.config_path, "experiment config file")
      ->required();
  sub->add_option("--seed", options.seed, "override the config seed");
  sub->add_option("--out", options.out_dir, "override the output directory");
  sub->add_flag("--quiet", options.quiet, "suppress non-error output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guided simulation and endpoint-conditioned sampling of semilinear "
               "stochastic PDEs in spectral coordinates"};
  app.require_subcommand(1);

  spdebridge::CliOptions options;
  int (*command)(const spdebridge::CliOptions&) = nullptr;

  auto* forward = app.add_subcommand("forward", "simulate one forward path");
  add_common_options(forward, options);
  forward->callback([&] { command = spdebridge::cmd_forward; });

  auto* guided = app.add_subcommand(
      "guided", "simulate one guided path toward the conditioning state");
  add_common_options(guided, options);
  guided->callback([&] { command = spdebridge::cmd_guided; });

  auto* bridge = app.add_subcommand(
      "bridge-mh", "sample conditioned paths with the noise-space MH chain");
  add_common_options(bridge, options);
  bridge->callback([&] { command = spdebridge::cmd_bridge_mh; });

  auto* cpm = app.add_subcommand(
      "density-cpm", "sample the observed endpoint with the correlated "
                     "pseudo-marginal chain");
  add_common_options(cpm, options);
  cpm->callback([&] { command = spdebridge::cmd_density_cpm; });

  auto* validate = app.add_subcommand(
      "validate", "run oracle comparisons and numerical diagnostics");
  add_common_options(validate, options);
  validate->callback([&] { command = spdebridge::cmd_validate; });

  CLI11_PARSE(app, argc, argv);
  return command(options);
}
