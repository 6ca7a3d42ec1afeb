#include "volterra/kspa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace volterra {

std::string_view to_string(ErrorTransform transform) {
  return transform == ErrorTransform::Absolute ? "abs" : "sq";
}

ErrorTransform parse_error_transform(std::string_view name) {
  if (name == "abs" || name == "absolute") return ErrorTransform::Absolute;
  if (name == "sq" || name == "squared") return ErrorTransform::Squared;
  throw Error(ErrorKind::InvalidArgument, "unknown error transform '" + std::string(name) + "'");
}

std::string_view to_string(TestDirection direction) {
  return direction == TestDirection::TwoSided ? "two-sided" : "one-sided";
}

std::string_view to_string(PValueMethod method) {
  return method == PValueMethod::Exact ? "exact" : "asymptotic";
}

ErrorSample::ErrorSample(std::vector<double> values, ErrorTransform transform, std::string label)
    : values_(std::move(values)), transform_(transform), label_(std::move(label)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorKind::NonFiniteInput, "error value " + std::to_string(i + 1) + " is not finite");
    }
    if (values_[i] < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "error value " + std::to_string(i + 1) + " is negative");
    }
  }
}

ErrorSample ErrorSample::from_residuals(const VectorXd& actual, const VectorXd& estimated,
                                        ErrorTransform transform, std::string label) {
  if (actual.size() != estimated.size()) {
    throw Error(ErrorKind::LengthMismatch, "residuals of unequal-length vectors");
  }
  std::vector<double> values(static_cast<std::size_t>(actual.size()));
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    const double r = actual(i) - estimated(i);
    values[static_cast<std::size_t>(i)] = transform == ErrorTransform::Absolute ? std::abs(r) : r * r;
  }
  return ErrorSample(std::move(values), transform, std::move(label));
}

Ecdf::Ecdf(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw Error(ErrorKind::EmptySample, "ECDF of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double z) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), z) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

std::vector<std::pair<double, double>> Ecdf::steps() const {
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<double>(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
    out.emplace_back(sorted_[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

Ecdf ecdf(const ErrorSample& sample) { return Ecdf(sample.values()); }

namespace {

struct Pooled {
  std::vector<double> values;
  std::vector<bool> first;  // true when the value came from sample 1
};

Pooled pool(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::pair<double, bool>> tagged;
  tagged.reserve(a.size() + b.size());
  for (double v : a) tagged.emplace_back(v, true);
  for (double v : b) tagged.emplace_back(v, false);
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  Pooled out;
  for (const auto& [v, f] : tagged) {
    out.values.push_back(v);
    out.first.push_back(f);
  }
  return out;
}

/// checkpoint[k] is true when the statistic is evaluated after k + 1 pooled
/// values, i.e. at the end of each block of tied values.
std::vector<bool> checkpoints(const std::vector<double>& sorted) {
  std::vector<bool> out(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    out[k] = (k + 1 == sorted.size()) || sorted[k + 1] != sorted[k];
  }
  return out;
}

long long gap(long long i, long long j, long long n1, long long n2, TestDirection direction) {
  const long long d = i * n2 - j * n1;
  return direction == TestDirection::TwoSided ? std::llabs(d) : d;
}

void require_non_empty(const ErrorSample& e1, const ErrorSample& e2) {
  if (e1.size() == 0 || e2.size() == 0) {
    throw Error(ErrorKind::EmptySample, "KSPA test needs two non-empty error samples");
  }
}

KspaResult run_test(const ErrorSample& e1, const ErrorSample& e2, TestDirection direction) {
  require_non_empty(e1, e2);
  const auto n1 = static_cast<long long>(e1.size());
  const auto n2 = static_cast<long long>(e2.size());
  const long long observed = lattice_statistic(e1.values(), e2.values(), direction);

  KspaResult out;
  out.direction = direction;
  out.n1 = e1.size();
  out.n2 = e2.size();
  out.statistic = static_cast<double>(observed) / static_cast<double>(n1 * n2);
  if (e1.size() * e2.size() <= kExactProductLimit) {
    out.method = PValueMethod::Exact;
    out.p_value = exact_p_value(e1.values(), e2.values(), direction, observed);
  } else {
    out.method = PValueMethod::Asymptotic;
    const double effective = static_cast<double>(n1 * n2) / static_cast<double>(n1 + n2);
    if (direction == TestDirection::TwoSided) {
      out.p_value = kolmogorov_survival(out.statistic * std::sqrt(effective));
    } else {
      out.p_value = std::exp(-2.0 * out.statistic * out.statistic * effective);
    }
  }
  out.p_value = std::clamp(out.p_value, 0.0, 1.0);
  return out;
}

}  // namespace

long long lattice_statistic(const std::vector<double>& sample1, const std::vector<double>& sample2,
                            TestDirection direction) {
  if (sample1.empty() || sample2.empty()) {
    throw Error(ErrorKind::EmptySample, "KS statistic of an empty sample");
  }
  const auto n1 = static_cast<long long>(sample1.size());
  const auto n2 = static_cast<long long>(sample2.size());
  const Pooled pooled = pool(sample1, sample2);
  const auto check = checkpoints(pooled.values);
  long long i = 0, j = 0, best = 0;
  for (std::size_t k = 0; k < pooled.values.size(); ++k) {
    if (pooled.first[k]) ++i; else ++j;
    if (check[k]) best = std::max(best, gap(i, j, n1, n2, direction));
  }
  return best;
}

double exact_p_value(const std::vector<double>& sample1, const std::vector<double>& sample2,
                     TestDirection direction, long long observed) {
  if (sample1.empty() || sample2.empty()) {
    throw Error(ErrorKind::EmptySample, "exact p-value of an empty sample");
  }
  if (observed <= 0) return 1.0;
  const auto n1 = static_cast<long long>(sample1.size());
  const auto n2 = static_cast<long long>(sample2.size());
  std::vector<double> pooled(sample1);
  pooled.insert(pooled.end(), sample2.begin(), sample2.end());
  std::sort(pooled.begin(), pooled.end());
  const auto check = checkpoints(pooled);

  // paths[i] = number of label sequences with i sample-1 values among the
  // first k pooled values whose statistic stayed below `observed` so far.
  std::vector<double> paths(static_cast<std::size_t>(n1) + 1, 0.0);
  std::vector<double> total(static_cast<std::size_t>(n1) + 1, 0.0);
  paths[0] = 1.0;
  total[0] = 1.0;
  for (long long k = 1; k <= n1 + n2; ++k) {
    for (long long i = std::min(k, n1); i >= 0; --i) {
      const long long j = k - i;
      const auto ui = static_cast<std::size_t>(i);
      double via_paths = 0.0, via_total = 0.0;
      if (j >= 1 && j <= n2) {
        via_paths += paths[ui];
        via_total += total[ui];
      }
      if (i >= 1) {
        via_paths += paths[ui - 1];
        via_total += total[ui - 1];
      }
      if (j < 0 || j > n2) via_paths = via_total = 0.0;
      if (check[static_cast<std::size_t>(k - 1)] && gap(i, j, n1, n2, direction) >= observed) {
        via_paths = 0.0;
      }
      paths[ui] = via_paths;
      total[ui] = via_total;
    }
  }
  const double below = paths[static_cast<std::size_t>(n1)];
  const double all = total[static_cast<std::size_t>(n1)];
  return std::clamp(1.0 - below / all, 0.0, 1.0);
}

double kolmogorov_survival(double t) {
  if (!(t > 0.0)) return 1.0;
  double sum = 0.0;
  for (int j = 1; j < 100000; ++j) {
    const double term = 2.0 * std::exp(-2.0 * j * j * t * t);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KspaResult kspa_two_sided(const ErrorSample& e1, const ErrorSample& e2) {
  return run_test(e1, e2, TestDirection::TwoSided);
}

KspaResult kspa_one_sided(const ErrorSample& e1, const ErrorSample& e2) {
  return run_test(e1, e2, TestDirection::OneSided);
}

std::vector<double> bonferroni(const std::vector<double>& p_values, int family_size) {
  if (family_size < 1 || static_cast<std::size_t>(family_size) < p_values.size()) {
    throw Error(ErrorKind::InvalidFamilySize,
                "family size " + std::to_string(family_size) + " for " +
                    std::to_string(p_values.size()) + " p-values");
  }
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "p-value outside [0, 1]");
    }
    out.push_back(std::min(1.0, family_size * p));
  }
  return out;
}

KspaResult with_bonferroni(KspaResult result, int family_size) {
  result.adjusted_p = bonferroni({result.p_value}, family_size).front();
  return result;
}

}  // namespace volterra
