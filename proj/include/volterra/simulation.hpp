#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "volterra/core.hpp"
#include "volterra/kernels.hpp"

namespace volterra {

enum class ProcessKind {
  AR1,          // y_t = phi y_{t-1} + e_t
  MA1,          // y_t = e_t + theta e_{t-1}
  ARMA11,       // y_t = phi y_{t-1} + e_t + theta e_{t-1}
  P3AsWritten,  // y_t = y_{t-1} - 0.9 y_{t-1} + e_t - 0.8 e_{t-1}
  P3Arma21,     // y_t = y_{t-1} - 0.9 y_{t-2} + e_t - 0.8 e_{t-1}
};

std::string_view to_string(ProcessKind kind);

struct ProcessSpec {
  std::string name;
  ProcessKind kind = ProcessKind::AR1;
  double phi = 0.0;
  double theta = 0.0;
  double noise_sd = 1.0;
  std::size_t length = 100;
  std::size_t burn_in = 100;
  std::uint64_t seed = 0;
  /// Pre-sample value used for every y_{t<=0}; pre-sample noise is zero.
  double initial = 0.0;

  /// y_t = 0.5 y_{t-1} + e_t
  static ProcessSpec p1();
  /// y_t = e_t - 0.9 e_{t-1}
  static ProcessSpec p2();
  /// y_t = y_{t-1} - 0.9 y_{t-1} + e_t - 0.8 e_{t-1}, taken literally.
  static ProcessSpec p3();
  /// ARMA(2,1) reading y_t = y_{t-1} - 0.9 y_{t-2} + e_t - 0.8 e_{t-1}.
  static ProcessSpec p3_arma21();

  void validate() const;
};

/// Standard normal deviates from a seeded std::mt19937_64. Each pair of
/// 64-bit draws becomes two deviates by the Box-Muller transform with
/// u1 = (a >> 11 + 1) / 2^53 in (0, 1] and u2 = (b >> 11) / 2^53 in [0, 1).
class NormalGenerator {
 public:
  explicit NormalGenerator(std::uint64_t seed) : engine_(seed) {}
  double operator()();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Deterministic given spec.seed; burn-in values are generated and discarded.
TimeSeries generate(const ProcessSpec& spec);

/// OLS fit of y_t = c + sum_k a_k y_{t-k} + e_t with one-step residuals.
struct ArBaseline {
  int order = 1;
  double intercept = 0.0;
  /// coefficients[k - 1] multiplies lag k.
  std::vector<double> coefficients;
  VectorXd fitted;
  VectorXd residuals;
  double rmse = 0.0;

  /// One-step prediction from a window in ascending time (oldest first).
  double predict(const VectorXd& window) const;
};

/// Throws InsufficientData when T <= order + 1 and SingularSystem when the
/// lagged design is rank deficient (e.g. a constant series).
ArBaseline fit_ar_baseline(const TimeSeries& series, int order);

enum class Method { Volterra, GaussianRidge, ArBaseline };
std::string_view to_string(Method method);
inline constexpr Method kAllMethods[] = {Method::Volterra, Method::GaussianRidge, Method::ArBaseline};

/// Width for the Gaussian ridge baseline: median pairwise squared distance
/// between the rows of `inputs` (1 if every distance is zero).
double median_heuristic_width(const MatrixXd& inputs);

/// In-sample one-step reconstruction of `series` by `method` at (m, p, lambda).
/// Returns (targets, fitted) over the trajectory rows shared by all methods
/// for that memory, so errors are comparable across methods.
struct MethodFit {
  VectorXd targets;
  VectorXd fitted;
  double rmse = 0.0;
};
MethodFit fit_method(const TimeSeries& series, Method method, const ModelConfig& config,
                     bool prescale = false);

struct McCell {
  std::string process;
  ModelConfig config;
  Method method = Method::Volterra;
  /// One entry per run; empty when that run's fit failed.
  std::vector<std::optional<double>> run_rmse;
  /// Lambda used by each run (the configured one unless chosen by CV).
  std::vector<std::optional<double>> run_lambda;
  /// Mean over successful runs; NaN when every run failed.
  double mean_rmse = 0.0;
  std::size_t failures = 0;
  /// Absolute residuals of every run, concatenated in run order; filled only
  /// when requested.
  std::vector<double> abs_errors;
};

struct McSummary {
  std::size_t runs = 0;
  std::uint64_t master_seed = 0;
  std::vector<ProcessSpec> processes;
  std::vector<ModelConfig> configs;
  /// Ordered process-major, then config, then method (kAllMethods order).
  std::vector<McCell> cells;

  const McCell& cell(std::string_view process, const ModelConfig& config, Method method) const;
};

struct McOptions {
  bool keep_errors = false;
  /// When non-empty, the kernel methods pick lambda per run by k-fold CV
  /// over this list at the configured (m, p); the AR baseline is unaffected.
  std::vector<double> lambda_grid;
  int folds = 5;
};

/// Lambda minimizing the k-fold CV error of `method` on `series` at fixed
/// (m, p). The Gaussian ridge baseline uses the median-heuristic width.
double select_lambda(const TimeSeries& series, Method method, const ModelConfig& config,
                     const std::vector<double>& lambda_grid, int folds);

/// Monte-Carlo harness: run r uses seed = master_seed + r for every process.
McSummary run_table1(const std::vector<ProcessSpec>& processes,
                     const std::vector<ModelConfig>& configs, std::size_t runs,
                     std::uint64_t master_seed, const McOptions& options = {});

}  // namespace volterra
