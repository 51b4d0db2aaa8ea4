#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "genbound/errors.hpp"
#include "genbound/experiments/config.hpp"
#include "genbound/experiments/runners.hpp"

namespace ex = genbound::experiments;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string unit;
  bool svg = false;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_config) {
  if (with_config) cmd->add_option("--config", f.config, "experiment configuration (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "random seed (u64)");
  cmd->add_option("--unit", f.unit, "rate unit for outputs")->check(CLI::IsMember({"nats", "bits"}));
  cmd->add_flag("--svg", f.svg, "also write an SVG chart");
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

void apply(const CommonFlags& f, ex::ExperimentConfig& cfg) {
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.unit == "bits") cfg.unit = ex::Unit::Bits;
  if (f.unit == "nats") cfg.unit = ex::Unit::Nats;
  if (f.svg) cfg.svg = true;
  if (f.threads) cfg.threads = *f.threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-theoretic generalization bounds on finite alphabets"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string figure;
  for (const char* name : {"curve", "constrained", "validate", "misspec", "learner"}) {
    add_common(app.add_subcommand(name, std::string("run the ") + name + " experiment"), flags, true);
  }
  auto* reproduce = app.add_subcommand("reproduce", "regenerate a figure preset");
  reproduce->add_option("figure", figure, "fig1, fig2, fig3 or fig4")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4"}));
  add_common(reproduce, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitConfigError;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    std::string command = sub->get_name();
    ex::ExperimentConfig cfg;
    if (command == "reproduce") {
      cfg = ex::preset_config(figure);
      command = (figure == "fig3" || figure == "fig4") ? "constrained" : "curve";
    } else if (!flags.config.empty()) {
      cfg = ex::load_config(flags.config);
    }
    apply(flags, cfg);
    const auto outcome = ex::execute(command, cfg);
    std::cout << outcome.summary << "\n";
    for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << "\n";
    return outcome.exit_code;
  } catch (const genbound::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return ex::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitConfigError;
  }
}
