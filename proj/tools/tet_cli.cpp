#include "tet/app/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Early-warning satisfaction prediction from event logs and text"};
  app.require_subcommand(1);

  std::string config_path;
  tet::CommandOverrides overrides;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", overrides.seed, "use only this seed (and generator seed)");
    cmd->add_option("--horizon", overrides.horizon, "use only this horizon, in days");
    cmd->add_option("--out", overrides.out, "output directory");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  auto* train = app.add_subcommand("train", "train every (model, horizon, seed) combination");
  auto* eval = app.add_subcommand("eval", "evaluate checkpoints on the test split");
  auto* report = app.add_subcommand("report", "merge per-horizon metrics into a summary table");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  for (auto* cmd : {synth, train, eval, report}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gradcheck->parsed()) return tet::cmd_gradcheck(std::cout) ? 0 : 1;

    tet::RunConfig config = tet::load_run_config(config_path);
    tet::apply_overrides(config, overrides);
    if (synth->parsed()) tet::cmd_synth(config, std::cout);
    if (train->parsed()) tet::cmd_train(config, std::cout);
    if (eval->parsed()) tet::cmd_eval(config, std::cout);
    if (report->parsed()) tet::cmd_report(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
