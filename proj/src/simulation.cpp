#include "volterra/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/QR>

#include "volterra/parallel.hpp"
#include "volterra/selection.hpp"
#include "volterra/solver.hpp"

namespace volterra {

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::AR1: return "AR1";
    case ProcessKind::MA1: return "MA1";
    case ProcessKind::ARMA11: return "ARMA11";
    case ProcessKind::P3AsWritten: return "P3AsWritten";
    case ProcessKind::P3Arma21: return "P3Arma21";
  }
  return "unknown";
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Volterra: return "volterra";
    case Method::GaussianRidge: return "gaussian_ridge";
    case Method::ArBaseline: return "ar_ols";
  }
  return "unknown";
}

ProcessSpec ProcessSpec::p1() {
  ProcessSpec s;
  s.name = "P1";
  s.kind = ProcessKind::AR1;
  s.phi = 0.5;
  return s;
}

ProcessSpec ProcessSpec::p2() {
  ProcessSpec s;
  s.name = "P2";
  s.kind = ProcessKind::MA1;
  s.theta = -0.9;
  return s;
}

ProcessSpec ProcessSpec::p3() {
  ProcessSpec s;
  s.name = "P3";
  s.kind = ProcessKind::P3AsWritten;
  return s;
}

ProcessSpec ProcessSpec::p3_arma21() {
  ProcessSpec s;
  s.name = "P3-ARMA21";
  s.kind = ProcessKind::P3Arma21;
  return s;
}

void ProcessSpec::validate() const {
  if ((kind == ProcessKind::AR1 || kind == ProcessKind::ARMA11) && !(std::abs(phi) < 1.0)) {
    throw Error(ErrorKind::NonStationarySpec, "|phi| must be < 1, got " + std::to_string(phi));
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw Error(ErrorKind::InvalidArgument, "noise sd must be finite and non-negative");
  }
  if (length < 1) throw Error(ErrorKind::InvalidArgument, "process length must be >= 1");
  if (!std::isfinite(initial) || !std::isfinite(theta)) {
    throw Error(ErrorKind::InvalidArgument, "process parameters must be finite");
  }
}

double NormalGenerator::operator()() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

TimeSeries generate(const ProcessSpec& spec) {
  spec.validate();
  NormalGenerator normal(spec.seed);
  const std::size_t total = spec.burn_in + spec.length;
  std::vector<double> out;
  out.reserve(spec.length);
  double y1 = spec.initial, y2 = spec.initial, e1 = 0.0;
  for (std::size_t t = 0; t < total; ++t) {
    const double e = spec.noise_sd * normal();
    double y = 0.0;
    switch (spec.kind) {
      case ProcessKind::AR1: y = spec.phi * y1 + e; break;
      case ProcessKind::MA1: y = e + spec.theta * e1; break;
      case ProcessKind::ARMA11: y = spec.phi * y1 + e + spec.theta * e1; break;
      case ProcessKind::P3AsWritten: y = y1 - 0.9 * y1 + e - 0.8 * e1; break;
      case ProcessKind::P3Arma21: y = y1 - 0.9 * y2 + e - 0.8 * e1; break;
    }
    y2 = y1;
    y1 = y;
    e1 = e;
    if (t >= spec.burn_in) out.push_back(y);
  }
  return TimeSeries(std::move(out), spec.name);
}

double ArBaseline::predict(const VectorXd& window) const {
  if (window.size() != order) throw Error(ErrorKind::DimensionMismatch, "AR window size");
  double value = intercept;
  for (int k = 1; k <= order; ++k) value += coefficients[static_cast<std::size_t>(k - 1)] * window(order - k);
  return value;
}

ArBaseline fit_ar_baseline(const TimeSeries& series, int order) {
  if (order < 1) throw Error(ErrorKind::InvalidMemory, "AR order must be >= 1");
  if (series.size() <= static_cast<std::size_t>(order) + 1) {
    throw Error(ErrorKind::InsufficientData, "AR(" + std::to_string(order) + ") needs more than " +
                                                 std::to_string(order + 1) + " observations");
  }
  const auto trajectory = embed(series, order);
  const Eigen::Index n = trajectory.rows();
  MatrixXd design(n, order + 1);
  design.col(0).setOnes();
  for (int k = 1; k <= order; ++k) design.col(k) = trajectory.inputs.col(order - k);

  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < order + 1) {
    throw Error(ErrorKind::SingularSystem, "lagged design of rank " + std::to_string(qr.rank()) +
                                               " < " + std::to_string(order + 1));
  }
  const VectorXd beta = qr.solve(trajectory.targets);

  ArBaseline out;
  out.order = order;
  out.intercept = beta(0);
  out.coefficients.assign(beta.data() + 1, beta.data() + beta.size());
  out.fitted = design * beta;
  out.residuals = trajectory.targets - out.fitted;
  out.rmse = rmse(trajectory.targets, out.fitted);
  return out;
}

double median_heuristic_width(const MatrixXd& inputs) {
  std::vector<double> distances;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) {
      distances.push_back((inputs.row(i) - inputs.row(j)).squaredNorm());
    }
  }
  if (distances.empty()) return 1.0;
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  return *mid > 0.0 ? *mid : 1.0;
}

MethodFit fit_method(const TimeSeries& series, Method method, const ModelConfig& config,
                     bool prescale) {
  config.validate();
  MethodFit out;
  switch (method) {
    case Method::Volterra: {
      const auto trajectory = embed(series, config.memory);
      const auto model = fit(trajectory, KernelSpec::sum_polynomial(config.order), config.lambda,
                             FitOptions{prescale});
      out.targets = trajectory.targets;
      out.fitted = model.reconstruct();
      break;
    }
    case Method::GaussianRidge: {
      const auto trajectory = embed(series, config.memory);
      const double sigma = median_heuristic_width(trajectory.inputs);
      const auto model =
          fit(trajectory, KernelSpec::gaussian(sigma), config.lambda, FitOptions{prescale});
      out.targets = trajectory.targets;
      out.fitted = model.reconstruct();
      break;
    }
    case Method::ArBaseline: {
      const auto ar = fit_ar_baseline(series, config.memory);
      out.targets = ar.fitted + ar.residuals;
      out.fitted = ar.fitted;
      break;
    }
  }
  out.rmse = rmse(out.targets, out.fitted);
  return out;
}

double select_lambda(const TimeSeries& series, Method method, const ModelConfig& config,
                     const std::vector<double>& lambda_grid, int folds) {
  if (method == Method::ArBaseline) return config.lambda;
  SearchGrid grid;
  grid.lambdas = lambda_grid;
  grid.memories = {config.memory};
  grid.orders = {config.order};
  grid.folds = folds;
  KernelSpec family = KernelSpec::sum_polynomial(config.order);
  if (method == Method::GaussianRidge) {
    family = KernelSpec::gaussian(median_heuristic_width(embed(series, config.memory).inputs));
  }
  return cross_validate(series, grid, family).selected.lambda;
}

const McCell& McSummary::cell(std::string_view process, const ModelConfig& config,
                              Method method) const {
  for (const auto& c : cells) {
    if (c.process == process && c.config == config && c.method == method) return c;
  }
  throw Error(ErrorKind::InvalidArgument, "no Monte-Carlo cell for " + std::string(process));
}

McSummary run_table1(const std::vector<ProcessSpec>& processes,
                     const std::vector<ModelConfig>& configs, std::size_t runs,
                     std::uint64_t master_seed, const McOptions& options) {
  if (runs < 1) throw Error(ErrorKind::InvalidArgument, "Monte-Carlo needs at least one run");
  for (const auto& p : processes) p.validate();
  for (const auto& c : configs) c.validate();

  McSummary summary;
  summary.runs = runs;
  summary.master_seed = master_seed;
  summary.processes = processes;
  summary.configs = configs;
  constexpr std::size_t kMethods = std::size(kAllMethods);
  const std::size_t per_run = configs.size() * kMethods;

  for (const auto& process : processes) {
    for (const auto& config : configs) {
      for (Method method : kAllMethods) {
        McCell cell;
        cell.process = process.name;
        cell.config = config;
        cell.method = method;
        cell.run_rmse.resize(runs);
        cell.run_lambda.resize(runs);
        summary.cells.push_back(std::move(cell));
      }
    }
  }

  for (std::size_t p = 0; p < processes.size(); ++p) {
    // results[r][c * kMethods + k] for run r, config c, method k.
    std::vector<std::vector<std::optional<MethodFit>>> results(runs);
    std::vector<std::vector<double>> lambdas(runs, std::vector<double>(per_run, 0.0));
    parallel_for(runs, [&](std::size_t r) {
      ProcessSpec spec = processes[p];
      spec.seed = master_seed + r;
      const TimeSeries series = generate(spec);
      auto& slot = results[r];
      slot.resize(per_run);
      for (std::size_t c = 0; c < configs.size(); ++c) {
        for (std::size_t k = 0; k < kMethods; ++k) {
          try {
            ModelConfig chosen = configs[c];
            if (!options.lambda_grid.empty()) {
              chosen.lambda =
                  select_lambda(series, kAllMethods[k], chosen, options.lambda_grid, options.folds);
            }
            lambdas[r][c * kMethods + k] = chosen.lambda;
            slot[c * kMethods + k] = fit_method(series, kAllMethods[k], chosen);
          } catch (const Error&) {
            slot[c * kMethods + k].reset();
          }
        }
      }
    });
    for (std::size_t idx = 0; idx < per_run; ++idx) {
      McCell& cell = summary.cells[p * per_run + idx];
      long double total = 0.0L;
      std::size_t ok = 0;
      for (std::size_t r = 0; r < runs; ++r) {
        const auto& result = results[r][idx];
        if (!result || !std::isfinite(result->rmse)) {
          ++cell.failures;
          continue;
        }
        cell.run_rmse[r] = result->rmse;
        if (cell.method != Method::ArBaseline) cell.run_lambda[r] = lambdas[r][idx];
        total += result->rmse;
        ++ok;
        if (options.keep_errors) {
          for (Eigen::Index i = 0; i < result->targets.size(); ++i) {
            cell.abs_errors.push_back(std::abs(result->targets(i) - result->fitted(i)));
          }
        }
      }
      cell.mean_rmse = ok > 0 ? static_cast<double>(total / static_cast<long double>(ok))
                              : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return summary;
}

}  // namespace volterra
