#include "volterra/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "volterra/parallel.hpp"

namespace volterra {

namespace {

constexpr double kTieTolerance = 1e-12;

std::vector<Eigen::Index> complement(Eigen::Index rows, Eigen::Index begin, Eigen::Index end) {
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(rows - (end - begin)));
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (i < begin || i >= end) out.push_back(i);
  }
  return out;
}

std::vector<Eigen::Index> range(Eigen::Index begin, Eigen::Index end) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(end - begin));
  std::iota(out.begin(), out.end(), begin);
  return out;
}

double fold_score(const TrajectoryMatrix<double>& trajectory, Eigen::Index begin, Eigen::Index end,
                  const KernelSpec& kernel, double lambda, const FitOptions& options) {
  try {
    const auto train = trajectory.select_rows(complement(trajectory.rows(), begin, end));
    const auto held_out = trajectory.select_rows(range(begin, end));
    const auto model = fit(train, kernel, lambda, options);
    const double score = rmse(held_out.targets, model.predict_rows(held_out.inputs));
    return std::isfinite(score) ? score : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

SearchGrid SearchGrid::defaults() {
  SearchGrid grid;
  grid.lambdas = {0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0};
  grid.memories = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  grid.orders = {1, 2, 3, 4, 5};
  grid.folds = 5;
  grid.train_fraction = 0.8;
  return grid;
}

int SearchGrid::max_memory() const {
  return memories.empty() ? 0 : *std::max_element(memories.begin(), memories.end());
}

std::vector<ModelConfig> SearchGrid::candidates() const {
  std::vector<ModelConfig> out;
  out.reserve(candidate_count());
  for (int m : memories) {
    for (int p : orders) {
      for (double lambda : lambdas) out.push_back(ModelConfig{m, p, lambda});
    }
  }
  return out;
}

void SearchGrid::validate() const {
  if (lambdas.empty() || memories.empty() || orders.empty()) {
    throw Error(ErrorKind::InvalidArgument, "search grid lists must be non-empty");
  }
  for (const auto& c : candidates()) c.validate();
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "cross-validation needs >= 2 folds");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }
}

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& series, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  const std::size_t total = series.size();
  // Guard against representation error, e.g. 100 * 0.8 = 80.00000000000001.
  const double raw = static_cast<double>(total) * train_fraction;
  auto train = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  if (train == 0 || train >= total) {
    throw Error(ErrorKind::InsufficientData,
                "split of length " + std::to_string(total) + " at fraction " +
                    std::to_string(train_fraction) + " leaves an empty part");
  }
  return {series.slice(0, train), series.slice(train, total - train)};
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> fold_bounds(Eigen::Index rows, int folds) {
  if (folds < 1 || rows < folds) {
    throw Error(ErrorKind::InsufficientData, std::to_string(rows) + " rows cannot form " +
                                                 std::to_string(folds) + " folds");
  }
  const Eigen::Index size = rows / folds;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index begin = f * size;
    const Eigen::Index end = (f + 1 == folds) ? rows : begin + size;
    out.emplace_back(begin, end);
  }
  return out;
}

KernelSpec candidate_kernel(const KernelSpec& family, const ModelConfig& config) {
  KernelSpec spec = family;
  if (spec.is_polynomial()) spec.order = config.order;
  return spec;
}

std::size_t select_candidate(const std::vector<CandidateScore>& candidates) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidates to select from");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, c.mean_rmse);

  auto complexity = [](const ModelConfig& c) {
    try {
      return volterra_dimension(c.memory, c.order);
    } catch (const Error&) {
      return std::numeric_limits<std::int64_t>::max();
    }
  };
  std::size_t chosen = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score = candidates[i].mean_rmse;
    const bool tied = std::isinf(best) ? std::isinf(score)
                                       : score <= best + kTieTolerance * std::abs(best);
    if (!tied) continue;
    if (chosen == candidates.size()) {
      chosen = i;
      continue;
    }
    const auto& a = candidates[i].config;
    const auto& b = candidates[chosen].config;
    if (std::make_tuple(complexity(a), a.lambda, a.memory) <
        std::make_tuple(complexity(b), b.lambda, b.memory)) {
      chosen = i;
    }
  }
  return chosen;
}

CvReport cross_validate(const TimeSeries& train, const SearchGrid& grid, const KernelSpec& family,
                        const FitOptions& options) {
  grid.validate();
  family.validate();
  for (int m : grid.memories) {
    const auto rows = static_cast<long>(train.size()) - m;
    if (rows < 2L * grid.folds) {
      throw Error(ErrorKind::InsufficientData,
                  "memory " + std::to_string(m) + " leaves " + std::to_string(std::max(rows, 0L)) +
                      " rows, fewer than 2 per fold for " + std::to_string(grid.folds) + " folds");
    }
  }

  CvReport report;
  report.kernel = family;
  report.folds = grid.folds;
  report.train_length = train.size();
  const auto configs = grid.candidates();
  report.candidates.resize(configs.size());

  parallel_for(configs.size(), [&](std::size_t c) {
    const ModelConfig& config = configs[c];
    const auto trajectory = embed(train, config.memory);
    const KernelSpec kernel = candidate_kernel(family, config);
    CandidateScore score{config, {}, 0.0};
    long double total = 0.0L;
    for (const auto& [begin, end] : fold_bounds(trajectory.rows(), grid.folds)) {
      const double s = fold_score(trajectory, begin, end, kernel, config.lambda, options);
      score.fold_rmse.push_back(s);
      total += s;
    }
    score.mean_rmse = static_cast<double>(total / static_cast<long double>(grid.folds));
    report.candidates[c] = std::move(score);
  });

  report.selected_index = select_candidate(report.candidates);
  report.selected = report.candidates[report.selected_index].config;
  return report;
}

VectorXd predict_tail(const VolterraModel<double>& model, const TimeSeries& series,
                      std::size_t first_test) {
  const auto m = static_cast<std::size_t>(model.memory());
  if (first_test < m || first_test > series.size()) {
    throw Error(ErrorKind::InsufficientData, "test segment must start after a full window");
  }
  const std::size_t count = series.size() - first_test;
  MatrixXd windows(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t j = 0; j < m; ++j) {
      windows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          series[first_test + r - m + j];
    }
  }
  return model.predict_rows(windows);
}

Selection select_and_refit(const TimeSeries& series, const SearchGrid& grid,
                           const KernelSpec& family, const FitOptions& options) {
  grid.validate();
  const auto [train, test] = split(series, grid.train_fraction);
  if (train.size() <= static_cast<std::size_t>(grid.max_memory())) {
    throw Error(ErrorKind::InsufficientData, "training split shorter than the largest memory");
  }
  CvReport report = cross_validate(train, grid, family, options);
  report.test_length = test.size();
  const ModelConfig& q = report.selected;
  auto model = fit(embed(train, q.memory), candidate_kernel(family, q), q.lambda, options);
  const VectorXd predicted = predict_tail(model, series, train.size());
  report.test_rmse = rmse(test.as_vector(), predicted);
  return Selection{std::move(model), std::move(report)};
}

WidthSearch select_gaussian_width(const TimeSeries& series, int memory, double lambda,
                                  const std::vector<double>& sigmas, int folds) {
  if (sigmas.empty()) throw Error(ErrorKind::InvalidArgument, "no kernel widths to search");
  const auto trajectory = embed(series, memory);
  const auto bounds = fold_bounds(trajectory.rows(), folds);
  WidthSearch out;
  out.sigmas = sigmas;
  out.mean_rmse.assign(sigmas.size(), 0.0);
  parallel_for(sigmas.size(), [&](std::size_t i) {
    const KernelSpec kernel = KernelSpec::gaussian(sigmas[i]);
    long double total = 0.0L;
    for (const auto& [begin, end] : bounds) {
      total += fold_score(trajectory, begin, end, kernel, lambda, {});
    }
    out.mean_rmse[i] = static_cast<double>(total / static_cast<long double>(folds));
  });
  const auto best = std::min_element(out.mean_rmse.begin(), out.mean_rmse.end());
  out.best_sigma = sigmas[static_cast<std::size_t>(best - out.mean_rmse.begin())];
  return out;
}

}  // namespace volterra
