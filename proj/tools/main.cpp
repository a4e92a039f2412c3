#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "hgpl/commands.hpp"
#include "hgpl/config.hpp"
#include "hgpl/error.hpp"

namespace {

struct CliState {
  std::string config_path;
  std::string seed, threads, out, nodes, edges, labels, checkpoint, task, mode;
  std::vector<std::string> sets;
};

void add_common_options(CLI::App* cmd, CliState& state) {
  cmd->add_option("--config", state.config_path, "config file (key = value lines)");
  cmd->add_option("--seed", state.seed, "master seed");
  cmd->add_option("--threads", state.threads, "worker cap");
  cmd->add_option("--out", state.out, "output directory");
  cmd->add_option("--nodes", state.nodes, "node file");
  cmd->add_option("--edges", state.edges, "edge file");
  cmd->add_option("--labels", state.labels, "label file");
  cmd->add_option("--checkpoint", state.checkpoint, "checkpoint file");
  cmd->add_option("--set", state.sets, "override any config key (key=value, repeatable)");
}

// File values first, then named flags, then --set overrides.
hgpl::RunConfig resolve_config(const CliState& state) {
  hgpl::RunConfig cfg;
  if (!state.config_path.empty()) hgpl::load_config_file(cfg, state.config_path);
  const std::pair<const char*, const std::string*> named[] = {
      {"seed", &state.seed},       {"threads", &state.threads},
      {"out", &state.out},         {"nodes", &state.nodes},
      {"edges", &state.edges},     {"labels", &state.labels},
      {"checkpoint", &state.checkpoint}, {"task", &state.task},
      {"mode", &state.mode},
  };
  for (const auto& [key, value] : named) {
    if (!value->empty()) hgpl::apply_config_entry(cfg, key, *value);
  }
  for (const std::string& entry : state.sets) {
    const size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw hgpl::ConfigError("--set expects key=value, got '" + entry + "'");
    }
    hgpl::apply_config_entry(cfg, entry.substr(0, eq), entry.substr(eq + 1));
  }
  hgpl::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot prompt learning on heterogeneous graphs"};
  app.require_subcommand(1);

  CliState state;
  CLI::App* decompose = app.add_subcommand("decompose", "split a typed graph into views");
  CLI::App* pretrain = app.add_subcommand("pretrain", "contrastive pre-training of the encoder");
  CLI::App* tune_eval = app.add_subcommand("tune-eval", "few-shot prompt tuning and evaluation");
  CLI::App* gen_synth = app.add_subcommand("gen-synth", "write a synthetic benchmark graph");
  CLI::App* validate = app.add_subcommand("validate", "check graph files against the invariants");
  for (CLI::App* cmd : {decompose, pretrain, tune_eval, gen_synth, validate}) {
    add_common_options(cmd, state);
  }
  tune_eval->add_option("--task", state.task, "nc | gc | lp");
  pretrain->add_option("--mode", state.mode, "plain | templated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const hgpl::RunConfig cfg = resolve_config(state);
    if (decompose->parsed()) {
      hgpl::cmd_decompose(cfg);
    } else if (pretrain->parsed()) {
      hgpl::cmd_pretrain(cfg);
    } else if (tune_eval->parsed()) {
      hgpl::cmd_tune_eval(cfg);
    } else if (gen_synth->parsed()) {
      hgpl::cmd_gen_synth(cfg);
    } else if (validate->parsed()) {
      return hgpl::cmd_validate(cfg);
    }
  } catch (const hgpl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const hgpl::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const hgpl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
