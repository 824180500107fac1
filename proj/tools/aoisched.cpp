// aoisched: freshness-aware scheduling toolkit.
//
// Subcommands take a JSON config file plus a few flag overrides and emit CSV.
// Exit codes: 0 ok, 1 computation error, 2 input error.

#include <CLI11.hpp>

#include "aoi/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"freshness-aware scheduling toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  aoi::cli::Overrides ov;
  std::uint64_t seed_flag = 0;
  std::string out_flag;
  int repl_flag = 0;

  auto add_common = [&](CLI::App* cmd, bool with_oracle) {
    cmd->add_option("config", config_path, "JSON config file")->required();
    cmd->add_option("--seed", seed_flag, "override the config seed");
    cmd->add_option("--out", out_flag, "override the output CSV path");
    cmd->add_option("--replications", repl_flag, "override the replication count");
    if (with_oracle) cmd->add_flag("--oracle", ov.oracle, "also solve the RVI oracle and report the gap");
  };

  add_common(app.add_subcommand("metrics", "inference-error curves and decomposition from time-series CSV"),
             false);
  add_common(app.add_subcommand("gittins", "tabulate the Gittins index of a penalty/service pair"), false);
  add_common(app.add_subcommand("threshold", "solve the single-source thresholds beta_b and pick b*"), true);
  add_common(app.add_subcommand("whittle", "tabulate Whittle indices for a set of arms"), false);
  add_common(app.add_subcommand("simulate", "run the slotted simulator with replications"), false);

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) ov.seed = seed_flag;
  if (sub->count("--out")) ov.out = out_flag;
  if (sub->count("--replications")) ov.replications = repl_flag;

  return aoi::cli::run_command(sub->get_name(), config_path, ov);
}
