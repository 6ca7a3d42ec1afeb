#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "volterra/errors.hpp"

namespace volterra {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// An ordered, finite, non-empty sequence of scalar observations y_1..y_T.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values, std::string label = {});
  explicit TimeSeries(const VectorXd& values, std::string label = {});

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& label() const noexcept { return label_; }
  double operator[](std::size_t i) const { return values_[i]; }

  VectorXd as_vector() const;
  /// Contiguous sub-series [first, first + count).
  TimeSeries slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<double> values_;
  std::string label_;
};

/// Sliding-window design: row i holds y_{i..i+m-1} (ascending time, 0-based),
/// targets(i) is y_{i+m}.
template <typename Scalar = double>
struct TrajectoryMatrix {
  Matrix<Scalar> inputs;
  Vector<Scalar> targets;

  Eigen::Index memory() const { return inputs.cols(); }
  Eigen::Index rows() const { return inputs.rows(); }

  /// Sub-design holding the given rows, in the given order.
  TrajectoryMatrix select_rows(const std::vector<Eigen::Index>& rows) const {
    TrajectoryMatrix out;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(rows[r]);
      out.targets(static_cast<Eigen::Index>(r)) = targets(rows[r]);
    }
    return out;
  }
};

struct ModelConfig {
  int memory = 1;
  int order = 1;
  double lambda = 0.0;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename Scalar = double>
TrajectoryMatrix<Scalar> embed(const TimeSeries& series, int memory) {
  if (memory < 1) {
    throw Error(ErrorKind::InvalidMemory, "memory must be >= 1, got " + std::to_string(memory));
  }
  const auto m = static_cast<std::size_t>(memory);
  if (m >= series.size()) {
    throw Error(ErrorKind::WindowTooLong, "memory " + std::to_string(memory) +
                                              " leaves no rows for a series of length " +
                                              std::to_string(series.size()));
  }
  const auto n = static_cast<Eigen::Index>(series.size() - m);
  TrajectoryMatrix<Scalar> out;
  out.inputs.resize(n, memory);
  out.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < memory; ++j) {
      out.inputs(i, j) = static_cast<Scalar>(series[static_cast<std::size_t>(i + j)]);
    }
    out.targets(i) = static_cast<Scalar>(series[static_cast<std::size_t>(i) + m]);
  }
  return out;
}

/// Number of distinct monomials of degree <= order in `memory` variables,
/// C(memory + order, order). Throws Overflow past int64 range.
std::int64_t volterra_dimension(int memory, int order);

double rmse(const VectorXd& actual, const VectorXd& estimated);
double rmse(const std::vector<double>& actual, const std::vector<double>& estimated);

double mean(const std::vector<double>& values);
/// Sample standard deviation (n - 1 denominator); 0 for a single value.
double standard_deviation(const std::vector<double>& values);

}  // namespace volterra
