#include "volterra/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "volterra/cli/io.hpp"
#include "volterra/solver.hpp"

#ifndef VOLTERRA_DEFAULT_DATA_DIR
#define VOLTERRA_DEFAULT_DATA_DIR "data"
#endif

namespace volterra::cli {

namespace {

json settings_json(const RunConfig& config) {
  // Paths are left out so reports do not depend on where they were written.
  return {{"memory", config.memory},
          {"order", config.order},
          {"lambda", number(config.lambda)},
          {"kernel", config.kernel},
          {"sigma", number(config.sigma)},
          {"prescale", config.prescale},
          {"folds", config.folds},
          {"train_fraction", number(config.train_fraction)},
          {"seed", config.seed},
          {"runs", config.runs},
          {"length", config.length},
          {"transform", config.transform},
          {"family_size", config.family_size}};
}

Report new_report(const RunConfig& config, const std::string& command) {
  Report report;
  report.data["schema_version"] = kSchemaVersion;
  report.data["command"] = command;
  report.data["settings"] = settings_json(config);
  return report;
}

TimeSeries require_input(const std::string& path, const char* what) {
  if (path.empty()) {
    throw Error(ErrorKind::InvalidArgument, std::string("missing ") + what + " (--input)");
  }
  return ingest_csv(path);
}

std::vector<ProcessSpec> processes_of(const RunConfig& config) {
  std::vector<ProcessSpec> out;
  for (const auto& name : config.processes) out.push_back(process_by_name(name, config.length));
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no processes selected");
  return out;
}

std::string method_name(Method method) { return std::string(to_string(method)); }

CsvTable mc_table(const McSummary& summary) {
  CsvTable table({"process", "memory", "order", "method", "mean_rmse", "failures"});
  for (const auto& cell : summary.cells) {
    table.add_row({cell.process, static_cast<long long>(cell.config.memory),
                   static_cast<long long>(cell.config.order), method_name(cell.method),
                   cell.mean_rmse, static_cast<long long>(cell.failures)});
  }
  return table;
}

struct Comparison {
  std::string scenario;
  std::string baseline;
  KspaResult result;
};

// Volterra (first sample) against each baseline, two-sided and one-sided,
// with Bonferroni adjustment inside the scenario.
std::vector<Comparison> compare_against(const std::string& scenario, const ErrorSample& volterra,
                                        const std::vector<ErrorSample>& baselines,
                                        int family_size) {
  std::vector<Comparison> out;
  const int family = family_size > 0 ? family_size : static_cast<int>(2 * baselines.size());
  for (const auto& baseline : baselines) {
    out.push_back({scenario, baseline.label(),
                   with_bonferroni(kspa_two_sided(volterra, baseline), family)});
    out.push_back({scenario, baseline.label(),
                   with_bonferroni(kspa_one_sided(volterra, baseline), family)});
  }
  return out;
}

void add_comparisons(Report& report, const std::string& key, const std::string& file,
                     const std::vector<Comparison>& comparisons) {
  json entries = json::array();
  CsvTable table({"scenario", "baseline", "direction", "statistic", "p_value", "adjusted_p",
                  "method", "n1", "n2", "significant"});
  for (const auto& c : comparisons) {
    json entry = to_json(c.result);
    entry["scenario"] = c.scenario;
    entry["baseline"] = c.baseline;
    const double adjusted = c.result.adjusted_p.value_or(c.result.p_value);
    entry["significant"] = adjusted < 0.05;
    entries.push_back(std::move(entry));
    table.add_row({c.scenario, c.baseline, std::string(to_string(c.result.direction)),
                   c.result.statistic, c.result.p_value, adjusted,
                   std::string(to_string(c.result.method)), static_cast<long long>(c.result.n1),
                   static_cast<long long>(c.result.n2), std::string(adjusted < 0.05 ? "*" : "-")});
  }
  report.data[key]["kspa"] = std::move(entries);
  report.add_table(file, std::move(table));
}

ErrorSample errors_of(const MethodFit& fit, const std::string& label) {
  return ErrorSample::from_residuals(fit.targets, fit.fitted, ErrorTransform::Absolute, label);
}

// --- reproduce targets ---------------------------------------------------

const std::vector<ModelConfig> kTable1Configs = {{10, 5, 0.0}, {8, 3, 0.0}};

McSummary simulate_table1(const RunConfig& config) {
  std::vector<ProcessSpec> processes = processes_of(config);
  McOptions options;
  options.keep_errors = true;
  options.lambda_grid = config.grid().lambdas;
  options.folds = config.folds;
  return run_table1(processes, kTable1Configs, static_cast<std::size_t>(config.runs), config.seed,
                    options);
}

void reproduce_table1(Report& report, const McSummary& summary, const RunConfig& config) {
  report.data["table1"] = to_json(summary);
  report.data["table1"]["lambda_grid"] = numbers(config.grid().lambdas);
  report.add_table("table1.csv", mc_table(summary));
}

void reproduce_table2(Report& report, const McSummary& summary, const RunConfig& config) {
  const ModelConfig at{8, 3, 0.0};
  std::vector<Comparison> all;
  for (const auto& process : summary.processes) {
    auto sample = [&](Method method) {
      return ErrorSample(summary.cell(process.name, at, method).abs_errors,
                         ErrorTransform::Absolute, method_name(method));
    };
    const auto comparisons = compare_against(
        process.name, sample(Method::Volterra),
        {sample(Method::GaussianRidge), sample(Method::ArBaseline)}, config.family_size);
    all.insert(all.end(), comparisons.begin(), comparisons.end());
  }
  report.data["table2"]["memory"] = at.memory;
  report.data["table2"]["order"] = at.order;
  add_comparisons(report, "table2", "table2.csv", all);
}

struct RealFits {
  TimeSeries series;
  MethodFit volterra;
  MethodFit ridge;
  MethodFit ar;
};

RealFits fit_real(const RunConfig& config, const std::string& file) {
  const auto path = (std::filesystem::path(resolve_data_dir(config)) / file).string();
  TimeSeries series = ingest_csv(path);
  const ModelConfig at{10, 5, config.lambda};
  return {series, fit_method(series, Method::Volterra, at, config.prescale),
          fit_method(series, Method::GaussianRidge, at, config.prescale),
          fit_method(series, Method::ArBaseline, at)};
}

void reproduce_table3(Report& report, const std::vector<RealFits>& datasets,
                      const RunConfig& config) {
  CsvTable table({"dataset", "method", "memory", "order", "lambda", "prescale", "series_sd", "rmse"});
  json rows = json::array();
  std::vector<Comparison> all;
  for (const auto& d : datasets) {
    const double sd = standard_deviation(d.series.values());
    const std::pair<Method, const MethodFit*> fits[] = {{Method::Volterra, &d.volterra},
                                                        {Method::GaussianRidge, &d.ridge},
                                                        {Method::ArBaseline, &d.ar}};
    for (const auto& [method, fit] : fits) {
      const bool kernel = method != Method::ArBaseline;
      const double lambda = kernel ? config.lambda : 0.0;
      const bool prescale = kernel && config.prescale;
      rows.push_back({{"dataset", d.series.label()},
                      {"length", d.series.size()},
                      {"method", method_name(method)},
                      {"memory", 10},
                      {"order", 5},
                      {"lambda", number(lambda)},
                      {"prescale", prescale},
                      {"series_sd", number(sd)},
                      {"rmse", number(fit->rmse)}});
      table.add_row({d.series.label(), method_name(method), 10LL, 5LL, lambda,
                     std::string(prescale ? "true" : "false"), sd, fit->rmse});
    }
    const auto comparisons =
        compare_against(d.series.label(), errors_of(d.volterra, "volterra"),
                        {errors_of(d.ridge, "gaussian_ridge"), errors_of(d.ar, "ar_ols")},
                        config.family_size);
    all.insert(all.end(), comparisons.begin(), comparisons.end());
  }
  report.data["table3"]["rows"] = std::move(rows);
  report.data["table3"]["gaussian_width_rule"] = "median pairwise squared distance";
  report.add_table("table3.csv", std::move(table));
  add_comparisons(report, "table3", "table3_kspa.csv", all);
}

TimeSeries noisy_sine(std::uint64_t seed, std::size_t length) {
  NormalGenerator normal(seed);
  std::vector<double> values(length);
  for (std::size_t t = 0; t < length; ++t) {
    values[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 25.0) + 0.3 * normal();
  }
  return TimeSeries(std::move(values), "noisy_sine");
}

void reproduce_figure1(Report& report, const RunConfig& config) {
  constexpr int kMemory = 3;
  constexpr double kLambda = 1e-3;
  const TimeSeries series = noisy_sine(config.seed, config.length);
  std::vector<double> sigmas;
  for (int k = -6; k <= 8; ++k) sigmas.push_back(std::pow(10.0, 0.5 * k));
  const WidthSearch search = select_gaussian_width(series, kMemory, kLambda, sigmas, config.folds);

  const auto trajectory = embed(series, kMemory);
  const double chosen[] = {0.01 * search.best_sigma, search.best_sigma, 100.0 * search.best_sigma};
  std::vector<VectorXd> curves;
  for (double sigma : chosen) {
    curves.push_back(fit(trajectory, KernelSpec::gaussian(sigma), kLambda).reconstruct());
  }

  CsvTable table({"t", "y", "fit_small_sigma", "fit_cv_sigma", "fit_large_sigma"});
  for (Eigen::Index i = 0; i < trajectory.rows(); ++i) {
    table.add_row({static_cast<long long>(i + kMemory), trajectory.targets(i), curves[0](i),
                   curves[1](i), curves[2](i)});
  }
  json fits = json::array();
  for (std::size_t k = 0; k < curves.size(); ++k) {
    fits.push_back({{"sigma", number(chosen[k])},
                    {"rmse", number(rmse(trajectory.targets, curves[k]))},
                    {"fitted", numbers(curves[k])}});
  }
  report.data["figure1"] = {{"series", "sin(2 pi t / 25) + 0.3 N(0,1)"},
                            {"memory", kMemory},
                            {"lambda", kLambda},
                            {"first_t", kMemory},
                            {"targets", numbers(trajectory.targets)},
                            {"sigma_grid", numbers(search.sigmas)},
                            {"cv_rmse", numbers(search.mean_rmse)},
                            {"best_sigma", number(search.best_sigma)},
                            {"fits", std::move(fits)}};
  report.add_table("figure1.csv", std::move(table));
}

void reproduce_error_figure(Report& report, const std::string& name, const RealFits& d) {
  report.data[name] = {{"dataset", d.series.label()}, {"memory", 10}, {"order", 5}};
  emit_plot_data(report, name,
                 {errors_of(d.volterra, "volterra"), errors_of(d.ridge, "gaussian_ridge")});
}

}  // namespace

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Numerical: return kExitNumerical;
    case ErrorCategory::Io: return kExitIo;
  }
  return kExitUnexpected;
}

ProcessSpec process_by_name(const std::string& name, std::size_t length) {
  ProcessSpec spec;
  if (name == "P1") {
    spec = ProcessSpec::p1();
  } else if (name == "P2") {
    spec = ProcessSpec::p2();
  } else if (name == "P3") {
    spec = ProcessSpec::p3();
  } else if (name == "P3-ARMA21") {
    spec = ProcessSpec::p3_arma21();
  } else {
    throw Error(ErrorKind::InvalidArgument,
                "unknown process '" + name + "' (expected P1, P2, P3 or P3-ARMA21)");
  }
  spec.length = length;
  return spec;
}

std::string resolve_data_dir(const RunConfig& config) {
  return config.data_dir.empty() ? std::string(VOLTERRA_DEFAULT_DATA_DIR) : config.data_dir;
}

Report cmd_fit(const RunConfig& config) {
  config.validate();
  const TimeSeries series = require_input(config.input, "input series");
  const auto trajectory = embed(series, config.memory);
  const KernelSpec spec = config.kernel_spec();
  const auto model = fit(trajectory, spec, config.lambda, FitOptions{config.prescale});
  const VectorXd fitted = model.reconstruct();

  Report report = new_report(config, "fit");
  report.data["series"] = {{"label", series.label()}, {"length", series.size()}};
  report.data["kernel"] = to_json(spec);
  report.data["effective_lambda"] = number(model.effective_lambda());
  report.data["scale"] = number(model.scale());
  report.data["rmse"] = number(rmse(trajectory.targets, fitted));
  report.data["first_t"] = config.memory;
  report.data["targets"] = numbers(trajectory.targets);
  report.data["fitted"] = numbers(fitted);

  std::vector<std::string> header{"t", "target", "fitted", "error"};
  const bool by_order = spec.family == KernelFamily::SumPolynomial;
  if (by_order) {
    for (int n = 0; n <= spec.order; ++n) header.push_back("H" + std::to_string(n));
  }
  CsvTable table(header);
  json contributions = json::array();
  for (Eigen::Index i = 0; i < trajectory.rows(); ++i) {
    std::vector<CsvTable::Cell> row{static_cast<long long>(i + config.memory),
                                    trajectory.targets(i), fitted(i),
                                    trajectory.targets(i) - fitted(i)};
    if (by_order) {
      const VectorXd h = model.operator_contributions(trajectory.inputs.row(i)).contributions;
      for (Eigen::Index n = 0; n < h.size(); ++n) row.emplace_back(h(n));
      contributions.push_back(numbers(h));
    }
    table.add_row(std::move(row));
  }
  if (by_order) report.data["contributions"] = std::move(contributions);
  report.add_table("fit.csv", std::move(table));
  return report;
}

Report cmd_select(const RunConfig& config) {
  config.validate();
  const TimeSeries series = require_input(config.input, "input series");
  const Selection selection =
      select_and_refit(series, config.grid(), config.kernel_spec(), FitOptions{config.prescale});
  Report report = new_report(config, "select");
  report.data["series"] = {{"label", series.label()}, {"length", series.size()}};
  report.data["cv"] = to_json(selection.report);

  std::vector<std::string> header{"memory", "order", "lambda", "mean_rmse"};
  for (int k = 0; k < selection.report.folds; ++k) header.push_back("fold" + std::to_string(k + 1));
  header.push_back("selected");
  CsvTable table(header);
  for (std::size_t i = 0; i < selection.report.candidates.size(); ++i) {
    const auto& c = selection.report.candidates[i];
    std::vector<CsvTable::Cell> row{static_cast<long long>(c.config.memory),
                                    static_cast<long long>(c.config.order), c.config.lambda,
                                    c.mean_rmse};
    for (double r : c.fold_rmse) row.emplace_back(r);
    row.emplace_back(static_cast<long long>(i == selection.report.selected_index));
    table.add_row(std::move(row));
  }
  report.add_table("cv_trace.csv", std::move(table));
  return report;
}

Report cmd_kspa(const RunConfig& config) {
  config.validate();
  if (config.input.empty() || config.input2.empty()) {
    throw Error(ErrorKind::InvalidArgument, "kspa needs two error files (--input, --input2)");
  }
  const ErrorTransform transform = config.error_transform();
  auto load = [&](const std::string& path, const std::string& label) {
    std::vector<double> values = read_column(path);
    for (double& v : values) v = transform == ErrorTransform::Absolute ? std::abs(v) : v * v;
    return ErrorSample(std::move(values), transform, label);
  };
  const ErrorSample first = load(config.input, "sample1");
  const ErrorSample second = load(config.input2, "sample2");

  KspaResult two = kspa_two_sided(first, second);
  KspaResult one = kspa_one_sided(first, second);
  if (config.family_size > 0) {
    two = with_bonferroni(two, config.family_size);
    one = with_bonferroni(one, config.family_size);
  }
  Report report = new_report(config, "kspa");
  report.data["samples"] = {{"sample1", file_stem(config.input)},
                            {"sample2", file_stem(config.input2)}};
  report.data["two_sided"] = to_json(two);
  report.data["one_sided"] = to_json(one);

  CsvTable table({"direction", "statistic", "p_value", "adjusted_p", "method", "n1", "n2"});
  for (const KspaResult* r : {&two, &one}) {
    table.add_row({std::string(to_string(r->direction)), r->statistic, r->p_value,
                   r->adjusted_p.value_or(std::numeric_limits<double>::quiet_NaN()),
                   std::string(to_string(r->method)), static_cast<long long>(r->n1),
                   static_cast<long long>(r->n2)});
  }
  report.add_table("kspa.csv", std::move(table));
  emit_plot_data(report, "kspa", {first, second});
  return report;
}

Report cmd_simulate(const RunConfig& config) {
  config.validate();
  McOptions options;
  options.lambda_grid = config.lambdas;
  options.folds = config.folds;
  const McSummary summary =
      run_table1(processes_of(config), {ModelConfig{config.memory, config.order, config.lambda}},
                 static_cast<std::size_t>(config.runs), config.seed, options);
  Report report = new_report(config, "simulate");
  report.data["lambda_grid"] = numbers(config.lambdas);
  report.data["monte_carlo"] = to_json(summary);
  report.add_table("simulate.csv", mc_table(summary));
  return report;
}

Report cmd_reproduce(const RunConfig& config) {
  config.validate();
  const std::string& target = config.target;
  static const std::vector<std::string> kTargets = {"table1",  "table2",  "table3", "figure1",
                                                    "figure2", "figure3", "all"};
  if (std::find(kTargets.begin(), kTargets.end(), target) == kTargets.end()) {
    throw Error(ErrorKind::InvalidArgument, "unknown reproduce target '" + target + "'");
  }
  auto wants = [&](const char* name) { return target == "all" || target == name; };

  Report report = new_report(config, "reproduce");
  report.data["target"] = target;
  if (wants("table1") || wants("table2")) {
    const McSummary summary = simulate_table1(config);
    if (wants("table1")) reproduce_table1(report, summary, config);
    if (wants("table2")) reproduce_table2(report, summary, config);
  }
  if (wants("table3") || wants("figure2") || wants("figure3")) {
    const std::vector<RealFits> datasets = {fit_real(config, "death.csv"),
                                            fit_real(config, "nile.csv")};
    if (wants("table3")) reproduce_table3(report, datasets, config);
    if (wants("figure2")) reproduce_error_figure(report, "figure2", datasets[0]);
    if (wants("figure3")) reproduce_error_figure(report, "figure3", datasets[1]);
  }
  if (wants("figure1")) reproduce_figure1(report, config);
  return report;
}

Report run_command(const RunConfig& config) {
  if (config.command == "fit") return cmd_fit(config);
  if (config.command == "select") return cmd_select(config);
  if (config.command == "kspa") return cmd_kspa(config);
  if (config.command == "simulate") return cmd_simulate(config);
  if (config.command == "reproduce") return cmd_reproduce(config);
  throw Error(ErrorKind::InvalidArgument, "unknown command '" + config.command + "'");
}

}  // namespace volterra::cli
