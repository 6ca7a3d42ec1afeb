#include "volterra/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "volterra/cli/io.hpp"

namespace volterra::cli {

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "CSV row has " + std::to_string(row.size()) +
                                                  " cells, header has " +
                                                  std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i > 0) out += ',';
    out += header_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      std::visit(
          [&out](const auto& cell) {
            using T = std::decay_t<decltype(cell)>;
            if constexpr (std::is_same_v<T, std::string>) {
              out += cell;
            } else if constexpr (std::is_same_v<T, double>) {
              out += std::isfinite(cell) ? format_double(cell) : std::string("nan");
            } else {
              out += std::to_string(cell);
            }
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

void Report::add_table(std::string file_name, CsvTable table) {
  tables.emplace_back(std::move(file_name), std::move(table));
}

std::string Report::json_text() const { return data.dump(2) + "\n"; }

void write_report(const Report& report, const std::string& dir, const std::string& json_name) {
  const std::filesystem::path base(dir);
  write_atomic((base / json_name).string(), report.json_text());
  for (const auto& [name, table] : report.tables) {
    write_atomic((base / name).string(), table.render());
  }
}

json number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

json numbers(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

json numbers(const VectorXd& values) {
  json out = json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back(number(values(i)));
  return out;
}

json to_json(const ModelConfig& config) {
  return {{"memory", config.memory}, {"order", config.order}, {"lambda", number(config.lambda)}};
}

json to_json(const KernelSpec& spec) {
  json out = {{"family", std::string(to_string(spec.family))}};
  if (spec.is_polynomial()) out["order"] = spec.order;
  if (spec.family == KernelFamily::Gaussian) out["sigma"] = number(spec.sigma);
  return out;
}

json to_json(const CvReport& report) {
  json candidates = json::array();
  for (const auto& c : report.candidates) {
    json entry = to_json(c.config);
    entry["fold_rmse"] = numbers(c.fold_rmse);
    entry["mean_rmse"] = number(c.mean_rmse);
    candidates.push_back(std::move(entry));
  }
  return {{"kernel", to_json(report.kernel)},
          {"folds", report.folds},
          {"train_length", report.train_length},
          {"test_length", report.test_length},
          {"candidates", std::move(candidates)},
          {"selected_index", report.selected_index},
          {"selected", to_json(report.selected)},
          {"test_rmse", number(report.test_rmse)}};
}

json to_json(const KspaResult& result) {
  json out = {{"statistic", number(result.statistic)},
              {"p_value", number(result.p_value)},
              {"direction", std::string(to_string(result.direction))},
              {"n1", result.n1},
              {"n2", result.n2},
              {"method", std::string(to_string(result.method))}};
  out["adjusted_p"] = result.adjusted_p ? number(*result.adjusted_p) : json(nullptr);
  return out;
}

json to_json(const McSummary& summary) {
  json cells = json::array();
  for (const auto& cell : summary.cells) {
    json runs = json::array();
    json lambdas = json::array();
    for (std::size_t r = 0; r < cell.run_rmse.size(); ++r) {
      runs.push_back(cell.run_rmse[r] ? number(*cell.run_rmse[r]) : json(nullptr));
      lambdas.push_back(cell.run_lambda[r] ? number(*cell.run_lambda[r]) : json(nullptr));
    }
    cells.push_back({{"process", cell.process},
                     {"memory", cell.config.memory},
                     {"order", cell.config.order},
                     {"method", std::string(to_string(cell.method))},
                     {"mean_rmse", number(cell.mean_rmse)},
                     {"failures", cell.failures},
                     {"run_rmse", std::move(runs)},
                     {"run_lambda", std::move(lambdas)}});
  }
  json processes = json::array();
  for (const auto& p : summary.processes) {
    processes.push_back({{"name", p.name},
                         {"kind", std::string(to_string(p.kind))},
                         {"phi", p.phi},
                         {"theta", p.theta},
                         {"noise_sd", p.noise_sd},
                         {"length", p.length},
                         {"burn_in", p.burn_in}});
  }
  return {{"runs", summary.runs},
          {"master_seed", summary.master_seed},
          {"processes", std::move(processes)},
          {"cells", std::move(cells)}};
}

namespace {

// Linear interpolation between order statistics (the usual "type 7" rule).
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Histogram histogram(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::EmptySample, "histogram of an empty sample");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  constexpr long long kMinBins = 5;
  constexpr long long kMaxBins = 1000;

  double lo = sorted.front();
  double hi = sorted.back();
  long long bins = kMinBins;
  if (hi > lo) {
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    if (width > 0.0) {
      bins = std::clamp(static_cast<long long>(std::ceil((hi - lo) / width)), kMinBins, kMaxBins);
    }
  } else {
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram out;
  const double width = (hi - lo) / static_cast<double>(bins);
  out.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (long long b = 0; b <= bins; ++b) out.edges[static_cast<std::size_t>(b)] = lo + b * width;
  out.edges.back() = hi;
  out.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : sorted) {
    auto b = static_cast<long long>(std::floor((v - lo) / width));
    b = std::clamp(b, 0LL, bins - 1);
    ++out.counts[static_cast<std::size_t>(b)];
  }
  return out;
}

CsvTable ecdf_table(const ErrorSample& sample) {
  CsvTable table({"x", "ecdf"});
  for (const auto& [x, f] : ecdf(sample).steps()) table.add_row({x, f});
  return table;
}

CsvTable histogram_table(const std::vector<double>& values) {
  const Histogram h = histogram(values);
  CsvTable table({"bin_lo", "bin_hi", "count"});
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    table.add_row({h.edges[b], h.edges[b + 1], h.counts[b]});
  }
  return table;
}

void emit_plot_data(Report& report, const std::string& prefix,
                    const std::vector<ErrorSample>& samples) {
  json plots = json::object();
  for (const auto& sample : samples) {
    const Histogram h = histogram(sample.values());
    json steps = json::array();
    for (const auto& [x, f] : ecdf(sample).steps()) steps.push_back({number(x), number(f)});
    plots[sample.label()] = {{"transform", std::string(to_string(sample.transform()))},
                             {"errors", numbers(sample.values())},
                             {"histogram", {{"edges", numbers(h.edges)}, {"counts", h.counts}}},
                             {"ecdf", std::move(steps)}};
    report.add_table(prefix + "_hist_" + sample.label() + ".csv", histogram_table(sample.values()));
    report.add_table(prefix + "_ecdf_" + sample.label() + ".csv", ecdf_table(sample));
  }
  report.data["plot_data"][prefix] = std::move(plots);
}

}  // namespace volterra::cli
