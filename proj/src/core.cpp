#include "volterra/core.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace volterra {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidMemory: return "InvalidMemory";
    case ErrorKind::WindowTooLong: return "WindowTooLong";
    case ErrorKind::InvalidFamilySize: return "InvalidFamilySize";
    case ErrorKind::NonStationarySpec: return "NonStationarySpec";
    case ErrorKind::UnsupportedKernel: return "UnsupportedKernel";
    case ErrorKind::FeatureSpaceTooLarge: return "FeatureSpaceTooLarge";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void check_finite(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(ErrorKind::EmptyInput, "time series must hold at least one value");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::NonFiniteInput,
                  "non-finite value at position " + std::to_string(i + 1));
    }
  }
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values, std::string label)
    : values_(std::move(values)), label_(std::move(label)) {
  check_finite(values_);
}

TimeSeries::TimeSeries(const VectorXd& values, std::string label)
    : TimeSeries(std::vector<double>(values.data(), values.data() + values.size()),
                 std::move(label)) {}

VectorXd TimeSeries::as_vector() const {
  return Eigen::Map<const VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > values_.size()) {
    throw Error(ErrorKind::InvalidArgument, "slice out of range");
  }
  return TimeSeries(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                        values_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                    label_);
}

void ModelConfig::validate() const {
  if (memory < 1) {
    throw Error(ErrorKind::InvalidMemory, "memory must be >= 1");
  }
  if (order < 0) {
    throw Error(ErrorKind::InvalidArgument, "order must be >= 0");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be a finite non-negative number");
  }
}

std::int64_t volterra_dimension(int memory, int order) {
  if (memory < 1) {
    throw Error(ErrorKind::InvalidMemory, "memory must be >= 1");
  }
  if (order < 0) {
    throw Error(ErrorKind::InvalidArgument, "order must be >= 0");
  }
  // C(m + k, k) = C(m + k - 1, k - 1) * (m + k) / k, exact at every step.
  constexpr auto limit = static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max());
  unsigned __int128 value = 1;
  for (int k = 1; k <= order; ++k) {
    value = value * static_cast<unsigned __int128>(memory + k) / static_cast<unsigned>(k);
    if (value > limit) {
      throw Error(ErrorKind::Overflow, "C(" + std::to_string(memory + order) + ", " +
                                           std::to_string(order) + ") exceeds int64");
    }
  }
  return static_cast<std::int64_t>(value);
}

double rmse(const VectorXd& actual, const VectorXd& estimated) {
  if (actual.size() != estimated.size()) {
    throw Error(ErrorKind::LengthMismatch, "rmse: " + std::to_string(actual.size()) + " vs " +
                                               std::to_string(estimated.size()));
  }
  if (actual.size() == 0) {
    throw Error(ErrorKind::EmptyInput, "rmse of empty vectors");
  }
  long double sum = 0.0L;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    const long double d = static_cast<long double>(actual(i)) - estimated(i);
    sum += d * d;
  }
  return static_cast<double>(std::sqrt(sum / static_cast<long double>(actual.size())));
}

double rmse(const std::vector<double>& actual, const std::vector<double>& estimated) {
  return rmse(Eigen::Map<const VectorXd>(actual.data(), static_cast<Eigen::Index>(actual.size())),
              Eigen::Map<const VectorXd>(estimated.data(),
                                         static_cast<Eigen::Index>(estimated.size())));
}

double mean(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(ErrorKind::EmptyInput, "mean of empty vector");
  }
  const long double sum = std::accumulate(values.begin(), values.end(), 0.0L);
  return static_cast<double>(sum / static_cast<long double>(values.size()));
}

double standard_deviation(const std::vector<double>& values) {
  const double mu = mean(values);
  if (values.size() < 2) return 0.0;
  long double ss = 0.0L;
  for (double v : values) ss += (v - mu) * static_cast<long double>(v - mu);
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(values.size() - 1)));
}

}  // namespace volterra
