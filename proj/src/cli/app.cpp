#include <functional>
#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "volterra/cli/commands.hpp"
#include "volterra/cli/io.hpp"

namespace volterra::cli {

namespace {

// Flags are parsed into `given`; only flags that appear on the command line
// override the config file (or the defaults).
struct Binding {
  CLI::Option* option;
  std::function<void(RunConfig&, const RunConfig&)> copy;
};

template <typename T>
void bind(CLI::App& app, std::vector<Binding>& bindings, RunConfig& given, const char* flags,
          T RunConfig::*field, const char* help) {
  CLI::Option* option = app.add_option(flags, given.*field, help);
  bindings.push_back({option, [field](RunConfig& to, const RunConfig& from) {
                        to.*field = from.*field;
                      }});
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Volterra-series time series approximation"};
  app.require_subcommand(1);
  RunConfig given;
  std::vector<Binding> bindings;
  std::string config_path;
  bool prescale = false;

  app.add_option("--config", config_path, "key = value configuration file");
  bind(app, bindings, given, "--input,-i", &RunConfig::input, "input CSV (series or errors)");
  bind(app, bindings, given, "--input2", &RunConfig::input2, "second error file for kspa");
  bind(app, bindings, given, "--out", &RunConfig::out, "output directory");
  bind(app, bindings, given, "--data-dir", &RunConfig::data_dir,
       "directory with death.csv and nile.csv");
  bind(app, bindings, given, "--target", &RunConfig::target,
       "reproduce target: table1..3, figure1..3 or all");
  bind(app, bindings, given, "--memory,-m", &RunConfig::memory, "memory m");
  bind(app, bindings, given, "--order,-p", &RunConfig::order, "order p");
  bind(app, bindings, given, "--lambda", &RunConfig::lambda, "regularization lambda");
  bind(app, bindings, given, "--kernel", &RunConfig::kernel,
       "sum | inhomogeneous | exponential | gaussian");
  bind(app, bindings, given, "--sigma", &RunConfig::sigma, "Gaussian kernel width");
  bind(app, bindings, given, "--folds", &RunConfig::folds, "cross-validation folds");
  bind(app, bindings, given, "--train-fraction", &RunConfig::train_fraction,
       "chronological train share");
  bind(app, bindings, given, "--lambdas", &RunConfig::lambdas, "lambda grid");
  bind(app, bindings, given, "--memories", &RunConfig::memories, "memory grid");
  bind(app, bindings, given, "--orders", &RunConfig::orders, "order grid");
  bind(app, bindings, given, "--seed", &RunConfig::seed, "master seed");
  bind(app, bindings, given, "--runs", &RunConfig::runs, "Monte-Carlo runs");
  bind(app, bindings, given, "--length", &RunConfig::length, "simulated series length");
  bind(app, bindings, given, "--processes", &RunConfig::processes, "P1, P2, P3, P3-ARMA21");
  bind(app, bindings, given, "--transform", &RunConfig::transform, "abs | sq");
  bind(app, bindings, given, "--family-size", &RunConfig::family_size,
       "Bonferroni family size (0: unadjusted)");
  CLI::Option* prescale_flag = app.add_flag("--prescale", prescale, "divide targets by their sd");
  for (auto& b : bindings) {
    if (b.option->get_items_expected_max() > 1) b.option->delimiter(',');
  }

  const std::pair<const char*, const char*> subcommands[] = {
      {"fit", "fit one model to --input and write fitted values and per-order terms"},
      {"select", "choose (lambda, m, p) by k-fold cross-validation and score the test split"},
      {"kspa", "compare two error files (--input, --input2) with the KSPA test"},
      {"simulate", "Monte-Carlo RMSE of all methods on the simulated processes"},
      {"reproduce", "regenerate the tables and figure data (--target)"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& b : bindings) {
      if (b.option->count() > 0) b.copy(config, given);
    }
    if (prescale_flag->count() > 0) config.prescale = prescale;
    config.command = app.get_subcommands().front()->get_name();

    const Report report = run_command(config);
    write_report(report, config.out, config.command + ".json");
    save_config(config, config.out + "/" + config.command + ".config");
    std::cout << config.command << ": wrote " << config.out << "/" << config.command << ".json\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "volterra: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "volterra: unexpected error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace volterra::cli
