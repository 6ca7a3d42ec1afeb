#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "volterra/core.hpp"
#include "volterra/kernels.hpp"
#include "volterra/solver.hpp"

namespace volterra {

/// Candidate grid over (lambda, m, p) plus the fold/split settings.
struct SearchGrid {
  std::vector<double> lambdas;
  std::vector<int> memories;
  std::vector<int> orders;
  int folds = 5;
  double train_fraction = 0.8;

  /// lambda in {0, 1e-8, 1e-6, 1e-4, 1e-2, 1}, m in 1..10, p in 1..5, 5 folds, 80% train.
  static SearchGrid defaults();

  int max_memory() const;
  std::size_t candidate_count() const {
    return lambdas.size() * memories.size() * orders.size();
  }
  /// Candidates in deterministic grid order: memory outermost, then order, then lambda.
  std::vector<ModelConfig> candidates() const;
  void validate() const;
};

struct CandidateScore {
  ModelConfig config;
  std::vector<double> fold_rmse;  // +inf for a fold whose fit failed
  double mean_rmse = std::numeric_limits<double>::infinity();
};

struct CvReport {
  KernelSpec kernel;
  int folds = 0;
  std::size_t train_length = 0;
  std::size_t test_length = 0;
  std::vector<CandidateScore> candidates;
  std::size_t selected_index = 0;
  ModelConfig selected;
  /// RMSE of the refitted selected model on the held-out split; NaN until
  /// select_and_refit fills it in.
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
};

/// Chronological split: the first ceil(T * fraction) points train, the rest test.
std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, double train_fraction);

/// Contiguous fold bounds [begin, end) over `rows` rows; each fold holds
/// rows / folds rows and the remainder goes to the last fold.
std::vector<std::pair<Eigen::Index, Eigen::Index>> fold_bounds(Eigen::Index rows, int folds);

/// Kernel for a candidate: polynomial families take the candidate order,
/// other families are used as given.
KernelSpec candidate_kernel(const KernelSpec& family, const ModelConfig& config);

/// k-fold cross-validation of every grid candidate on the training series.
/// A candidate failing on any fold scores +inf; the search never aborts.
CvReport cross_validate(const TimeSeries& train, const SearchGrid& grid, const KernelSpec& family,
                        const FitOptions& options = {});

/// Index of the winning candidate: minimum mean RMSE, with scores within
/// 1e-12 relative treated as ties and resolved by smaller
/// volterra_dimension(m, p), then smaller lambda, then smaller m.
std::size_t select_candidate(const std::vector<CandidateScore>& candidates);

/// One-step test predictions of `model` for every point of `series` at or
/// after position `first_test` (0-based). Windows may reach back into the
/// training segment, so every test point is scored using true past values.
VectorXd predict_tail(const VolterraModel<double>& model, const TimeSeries& series,
                      std::size_t first_test);

struct Selection {
  VolterraModel<double> model;
  CvReport report;
};

/// split + cross_validate + refit of the selected candidate on the whole
/// training split, scored on the test split.
Selection select_and_refit(const TimeSeries& series, const SearchGrid& grid,
                           const KernelSpec& family, const FitOptions& options = {});

struct WidthSearch {
  std::vector<double> sigmas;
  std::vector<double> mean_rmse;
  double best_sigma = 0.0;
};

/// k-fold selection of the Gaussian kernel width at fixed memory and lambda.
WidthSearch select_gaussian_width(const TimeSeries& series, int memory, double lambda,
                                  const std::vector<double>& sigmas, int folds);

}  // namespace volterra
