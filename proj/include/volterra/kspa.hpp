#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "volterra/core.hpp"

namespace volterra {

enum class ErrorTransform { Absolute, Squared };

std::string_view to_string(ErrorTransform transform);
/// Accepts "abs" / "absolute" and "sq" / "squared".
ErrorTransform parse_error_transform(std::string_view name);

/// Non-negative, finite approximation errors of one model.
class ErrorSample {
 public:
  ErrorSample(std::vector<double> values, ErrorTransform transform, std::string label = {});

  /// |actual - estimated| or (actual - estimated)^2, elementwise.
  static ErrorSample from_residuals(const VectorXd& actual, const VectorXd& estimated,
                                    ErrorTransform transform, std::string label = {});

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  ErrorTransform transform() const noexcept { return transform_; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::vector<double> values_;
  ErrorTransform transform_;
  std::string label_;
};

/// Right-continuous empirical distribution function.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> sample);

  /// Fraction of the sample <= z.
  double operator()(double z) const;
  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted() const noexcept { return sorted_; }
  /// (value, F(value)) at each distinct support point, ascending.
  std::vector<std::pair<double, double>> steps() const;

 private:
  std::vector<double> sorted_;
};

Ecdf ecdf(const ErrorSample& sample);

enum class TestDirection { TwoSided, OneSided };
enum class PValueMethod { Exact, Asymptotic };

std::string_view to_string(TestDirection direction);
std::string_view to_string(PValueMethod method);

struct KspaResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> adjusted_p;
  TestDirection direction = TestDirection::TwoSided;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  PValueMethod method = PValueMethod::Exact;
};

/// Exact p-values are used while n1 * n2 <= this bound.
inline constexpr std::size_t kExactProductLimit = 64;

/// Two-sample statistic in lattice units: max over pooled points of
/// |i * n2 - j * n1| (two-sided) or max(0, i * n2 - j * n1) (one-sided), where
/// i, j count sample-1 and sample-2 values <= the point. Divide by n1 * n2
/// for the ECDF distance.
long long lattice_statistic(const std::vector<double>& sample1, const std::vector<double>& sample2,
                            TestDirection direction);

/// P(statistic >= observed) under random relabelling of the pooled values,
/// computed by counting monotone lattice paths; the statistic is checked
/// only where the pooled sorted values change, so ties are handled exactly.
double exact_p_value(const std::vector<double>& sample1, const std::vector<double>& sample2,
                     TestDirection direction, long long observed);

/// Kolmogorov survival function sum_{j>=1} 2 (-1)^{j-1} exp(-2 j^2 t^2), clamped to [0, 1].
double kolmogorov_survival(double t);

/// H0: F1 = F2 against H1: F1 != F2.
KspaResult kspa_two_sided(const ErrorSample& e1, const ErrorSample& e2);

/// H0: F1 <= F2 against H1: F1 > F2. A small p-value is evidence that the
/// first model's errors are stochastically smaller.
KspaResult kspa_one_sided(const ErrorSample& e1, const ErrorSample& e2);

/// min(1, family_size * p) for each p.
std::vector<double> bonferroni(const std::vector<double>& p_values, int family_size);

/// Copy of `result` with adjusted_p = min(1, family_size * p_value).
KspaResult with_bonferroni(KspaResult result, int family_size);

}  // namespace volterra
