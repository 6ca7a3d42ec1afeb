#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "volterra/core.hpp"
#include "volterra/kernels.hpp"

namespace volterra {

/// Relative residual bound ||(K + lambda I) gamma - y|| <= kSolveTolerance ||y||
/// that every accepted dual solve satisfies.
inline constexpr double kSolveTolerance = 1e-8;

struct FitOptions {
  /// Divide inputs and targets by the target standard deviation before
  /// building the Gram matrix. Predictions are always reported on the
  /// original scale.
  bool prescale = false;
};

/// Per-order split of a prediction: contributions(n) = H_n(x). When
/// requested, eta[n] holds the ordered-monomial coefficient vector of H_n.
template <typename Scalar = double>
struct OperatorDecomposition {
  Vector<Scalar> contributions;
  std::optional<std::vector<Vector<Scalar>>> eta;

  Scalar total() const { return contributions.sum(); }
};

template <typename Scalar = double>
class VolterraModel;

template <typename Scalar>
VolterraModel<Scalar> fit(const TrajectoryMatrix<Scalar>& trajectory, const KernelSpec& spec,
                          double lambda, const FitOptions& options = {});

/// A fitted kernel expansion f(x) = sum_i gamma_i k(x, x_i).
///
/// Lag convention: training rows are in ascending time, so input column j of
/// a window of length m carries lag m - j. Coefficient index tuples returned
/// by recover_coefficients() refer to these column positions.
template <typename Scalar>
class VolterraModel {
 public:
  const ModelConfig& config() const { return config_; }
  const KernelSpec& spec() const { return spec_; }
  const Matrix<Scalar>& training_inputs() const { return inputs_; }
  const Vector<Scalar>& training_targets() const { return targets_; }
  const Vector<Scalar>& gamma() const { return gamma_; }
  /// Requested lambda plus any jitter added to make the system factorizable.
  double effective_lambda() const { return effective_lambda_; }
  double scale() const { return scale_; }
  Eigen::Index memory() const { return inputs_.cols(); }

  template <typename Derived>
  Scalar predict(const Eigen::MatrixBase<Derived>& x) const {
    check_query(x.size());
    return evaluate(x.derived().template cast<Scalar>().reshaped() / scale_);
  }

  /// One-step predictions for every row of `queries`.
  template <typename Derived>
  Vector<Scalar> predict_rows(const Eigen::MatrixBase<Derived>& queries) const {
    check_query(queries.cols());
    const Matrix<Scalar> scaled = queries.derived().template cast<Scalar>() / scale_;
    Vector<Scalar> out(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) out(i) = evaluate(scaled.row(i).transpose());
    return out;
  }

  /// Predictions at every training input.
  Vector<Scalar> reconstruct() const { return predict_rows(inputs_); }

  /// Closed-loop rollout: each prediction is appended to the window and fed
  /// back as the newest input.
  template <typename Derived>
  Vector<Scalar> rollout(const Eigen::MatrixBase<Derived>& initial_window, int steps) const {
    check_query(initial_window.size());
    Vector<Scalar> window = initial_window.derived().template cast<Scalar>().reshaped();
    Vector<Scalar> out(steps);
    for (int s = 0; s < steps; ++s) {
      out(s) = predict(window);
      const Eigen::Index m = window.size();
      for (Eigen::Index j = 0; j + 1 < m; ++j) window(j) = window(j + 1);
      window(m - 1) = out(s);
    }
    return out;
  }

  /// H_n(x) = gamma . k_n(x), k_n(x)_i = (x_i . x)^n, for n = 0..p.
  template <typename Derived>
  OperatorDecomposition<Scalar> operator_contributions(const Eigen::MatrixBase<Derived>& x,
                                                       bool with_coefficients = false) const {
    require_sum_kernel("operator_contributions");
    check_query(x.size());
    using Acc = detail::Accumulator<Scalar>;
    const Vector<Scalar> scaled = x.derived().template cast<Scalar>().reshaped() / scale_;
    const int p = spec_.order;
    std::vector<Acc> sums(static_cast<std::size_t>(p) + 1, Acc(0));
    for (Eigen::Index i = 0; i < scaled_inputs_.rows(); ++i) {
      const Acc t = detail::wide_dot(scaled_inputs_.row(i), scaled);
      Acc power(1);
      for (int n = 0; n <= p; ++n) {
        sums[static_cast<std::size_t>(n)] += static_cast<Acc>(gamma_(i)) * power;
        power *= t;
      }
    }
    OperatorDecomposition<Scalar> out;
    out.contributions.resize(p + 1);
    for (int n = 0; n <= p; ++n) {
      out.contributions(n) = static_cast<Scalar>(sums[static_cast<std::size_t>(n)] * scale_);
    }
    if (with_coefficients) {
      std::vector<Vector<Scalar>> eta;
      for (int n = 0; n <= p; ++n) eta.push_back(recover_coefficients(n));
      out.eta = std::move(eta);
    }
    return out;
  }

  /// Ordered-monomial coefficients eta_n with H_n(x) = eta_n . Phi_n(x),
  /// eta_n = Phi_n^T (K + lambda I)^{-1} y.
  Vector<Scalar> recover_coefficients(int degree) const {
    require_sum_kernel("recover_coefficients");
    if (degree < 0 || degree > spec_.order) {
      throw Error(ErrorKind::InvalidArgument, "degree " + std::to_string(degree) +
                                                  " outside 0.." + std::to_string(spec_.order));
    }
    feature_dimension(static_cast<int>(memory()), degree);
    using Acc = detail::Accumulator<Scalar>;
    Vector<Scalar> eta;
    std::vector<Acc> acc;
    for (Eigen::Index i = 0; i < scaled_inputs_.rows(); ++i) {
      const Vector<Scalar> block = monomial_block(scaled_inputs_.row(i), degree);
      if (acc.empty()) acc.assign(static_cast<std::size_t>(block.size()), Acc(0));
      for (Eigen::Index j = 0; j < block.size(); ++j) {
        acc[static_cast<std::size_t>(j)] += static_cast<Acc>(gamma_(i)) * block(j);
      }
    }
    // Undo prescaling: H_n(x) = s * eta'_n . Phi_n(x / s) = s^{1-n} eta'_n . Phi_n(x).
    const Acc factor = std::pow(static_cast<Acc>(scale_), Acc(1 - degree));
    eta.resize(static_cast<Eigen::Index>(acc.size()));
    for (std::size_t j = 0; j < acc.size(); ++j) {
      eta(static_cast<Eigen::Index>(j)) = static_cast<Scalar>(acc[j] * factor);
    }
    return eta;
  }

 private:
  friend VolterraModel fit<Scalar>(const TrajectoryMatrix<Scalar>&, const KernelSpec&, double,
                                   const FitOptions&);

  VolterraModel() = default;

  // gamma . k(x) on the scaled query; kernel values stay in the accumulator
  // type so the sum agrees with operator_contributions.
  Scalar evaluate(const Vector<Scalar>& scaled) const {
    using Acc = detail::Accumulator<Scalar>;
    Acc sum(0);
    for (Eigen::Index i = 0; i < scaled_inputs_.rows(); ++i) {
      sum += static_cast<Acc>(gamma_(i)) *
             detail::kernel_eval_wide(spec_, scaled_inputs_.row(i), scaled);
    }
    return static_cast<Scalar>(sum * static_cast<Acc>(scale_));
  }

  void check_query(Eigen::Index dim) const {
    if (dim != memory()) {
      throw Error(ErrorKind::DimensionMismatch, "query of dimension " + std::to_string(dim) +
                                                    ", model memory " + std::to_string(memory()));
    }
  }

  void require_sum_kernel(const char* what) const {
    if (spec_.family != KernelFamily::SumPolynomial) {
      throw Error(ErrorKind::UnsupportedKernel,
                  std::string(what) + " requires the sum-polynomial kernel, model uses " +
                      std::string(to_string(spec_.family)));
    }
  }

  ModelConfig config_;
  KernelSpec spec_;
  Matrix<Scalar> inputs_;
  Matrix<Scalar> scaled_inputs_;
  Vector<Scalar> targets_;
  Vector<Scalar> gamma_;
  double effective_lambda_ = 0.0;
  double scale_ = 1.0;
};

namespace detail {

template <typename Scalar>
void check_finite_trajectory(const TrajectoryMatrix<Scalar>& trajectory) {
  if (!trajectory.inputs.allFinite() || !trajectory.targets.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "trajectory holds non-finite values");
  }
}

template <typename Scalar>
Scalar relative_residual(const Matrix<Scalar>& system, const Vector<Scalar>& solution,
                         const Vector<Scalar>& rhs) {
  using Acc = Accumulator<Scalar>;
  const Vector<Acc> r =
      system.template cast<Acc>() * solution.template cast<Acc>() - rhs.template cast<Acc>();
  const Acc denom = rhs.template cast<Acc>().norm();
  return static_cast<Scalar>(denom > Acc(0) ? r.norm() / denom : r.norm());
}

/// Solves (K + lambda I) gamma = y by Cholesky with two steps of iterative
/// refinement (residuals in extended precision). If the factorization fails
/// or the residual stays above kSolveTolerance, jitter of
/// 1e-12 .. 1e-6 * trace(K)/N is tried in decades. Returns the lambda used.
template <typename Scalar>
double regularized_solve(const Matrix<Scalar>& kernel, double lambda, const Vector<Scalar>& rhs,
                         Vector<Scalar>& solution) {
  using Acc = Accumulator<Scalar>;
  const Eigen::Index n = kernel.rows();
  const double base = std::abs(static_cast<double>(kernel.trace())) / static_cast<double>(n);
  std::vector<double> candidates{lambda};
  for (double j = 1e-12; j <= 1e-6 * (1 + 1e-9); j *= 10) {
    if (j * base > lambda) candidates.push_back(j * base);
  }
  for (double effective : candidates) {
    Matrix<Scalar> system = kernel;
    system.diagonal().array() += static_cast<Scalar>(effective);
    Eigen::LLT<Matrix<Scalar>> llt(system);
    if (llt.info() != Eigen::Success) continue;
    Vector<Scalar> x = llt.solve(rhs);
    for (int step = 0; step < 2 && x.allFinite(); ++step) {
      const Vector<Acc> r =
          rhs.template cast<Acc>() - system.template cast<Acc>() * x.template cast<Acc>();
      x += llt.solve(r.template cast<Scalar>());
    }
    if (!x.allFinite()) continue;
    if (relative_residual(system, x, rhs) <= static_cast<Scalar>(kSolveTolerance)) {
      solution = std::move(x);
      return effective;
    }
  }
  throw Error(ErrorKind::SingularSystem,
              "(K + lambda I) could not be factorized to tolerance, lambda = " +
                  std::to_string(lambda));
}

}  // namespace detail

/// Fits gamma = (K + lambda I)^{-1} y on the trajectory rows.
template <typename Scalar>
VolterraModel<Scalar> fit(const TrajectoryMatrix<Scalar>& trajectory, const KernelSpec& spec,
                          double lambda, const FitOptions& options) {
  spec.validate();
  if (trajectory.rows() < 1 || trajectory.memory() < 1) {
    throw Error(ErrorKind::InsufficientData, "fit needs at least one trajectory row");
  }
  if (trajectory.targets.size() != trajectory.rows()) {
    throw Error(ErrorKind::LengthMismatch, "inputs and targets disagree on row count");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be a finite non-negative number");
  }
  detail::check_finite_trajectory(trajectory);

  VolterraModel<Scalar> model;
  model.spec_ = spec;
  model.config_ = ModelConfig{static_cast<int>(trajectory.memory()),
                              spec.is_polynomial() ? spec.order : 0, lambda};
  model.inputs_ = trajectory.inputs;
  model.targets_ = trajectory.targets;
  if (options.prescale && trajectory.rows() > 1) {
    const Scalar mu = trajectory.targets.mean();
    const Scalar sd = std::sqrt((trajectory.targets.array() - mu).square().sum() /
                                static_cast<Scalar>(trajectory.rows() - 1));
    if (sd > Scalar(0)) model.scale_ = static_cast<double>(sd);
  }
  const auto s = static_cast<Scalar>(model.scale_);
  model.scaled_inputs_ = model.inputs_ / s;
  const Vector<Scalar> scaled_targets = model.targets_ / s;
  const GramMatrix<Scalar> k = gram(spec, model.scaled_inputs_);
  model.effective_lambda_ = detail::regularized_solve(k.entries, lambda, scaled_targets, model.gamma_);
  return model;
}

/// Primal ridge estimate over explicit ordered-monomial features.
template <typename Scalar = double>
struct ExplicitFit {
  int memory = 1;
  int order = 0;
  double lambda = 0.0;
  /// Stacked (eta_0, eta_1, ..., eta_p) in feature_map() order.
  Vector<Scalar> coefficients;

  template <typename Derived>
  Scalar predict(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != memory) {
      throw Error(ErrorKind::DimensionMismatch, "explicit predict dimension mismatch");
    }
    const Vector<Scalar> phi = feature_map(x.derived().template cast<Scalar>().reshaped(), order);
    return static_cast<Scalar>(detail::wide_dot(phi, coefficients));
  }

  template <typename Derived>
  Vector<Scalar> predict_rows(const Eigen::MatrixBase<Derived>& queries) const {
    Vector<Scalar> out(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) out(i) = predict(queries.row(i));
    return out;
  }
};

/// Upper bound on the explicit feature dimension accepted by fit_explicit.
inline constexpr std::int64_t kMaxExplicitFeatures = 100'000;

/// E = Phi^T (Phi Phi^T + lambda I)^{-1} y over explicit features. With
/// lambda = 0 the minimum-norm least-squares solution is returned, which
/// coincides with that formula whenever Phi Phi^T is invertible.
template <typename Scalar>
ExplicitFit<Scalar> fit_explicit(const TrajectoryMatrix<Scalar>& trajectory, int order,
                                 double lambda) {
  if (trajectory.rows() < 1 || trajectory.memory() < 1) {
    throw Error(ErrorKind::InsufficientData, "fit_explicit needs at least one trajectory row");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be a finite non-negative number");
  }
  detail::check_finite_trajectory(trajectory);
  const auto m = static_cast<int>(trajectory.memory());
  if (feature_dimension(m, order) > kMaxExplicitFeatures) {
    throw Error(ErrorKind::FeatureSpaceTooLarge,
                "explicit feature dimension " + std::to_string(feature_dimension(m, order)));
  }
  const Matrix<Scalar> phi = feature_matrix(trajectory.inputs, order);
  const Vector<Scalar>& y = trajectory.targets;

  ExplicitFit<Scalar> out{m, order, lambda, {}};
  if (lambda == 0.0) {
    out.coefficients = Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>>(phi).solve(y);
  } else if (phi.rows() <= phi.cols()) {
    Matrix<Scalar> system = phi * phi.transpose();
    system.diagonal().array() += static_cast<Scalar>(lambda);
    Eigen::LLT<Matrix<Scalar>> llt(system);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "Phi Phi^T + lambda I");
    out.coefficients = phi.transpose() * llt.solve(y);
  } else {
    Matrix<Scalar> system = phi.transpose() * phi;
    system.diagonal().array() += static_cast<Scalar>(lambda);
    Eigen::LLT<Matrix<Scalar>> llt(system);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "Phi^T Phi + lambda I");
    out.coefficients = llt.solve(phi.transpose() * y);
  }
  if (!out.coefficients.allFinite()) {
    throw Error(ErrorKind::SingularSystem, "explicit solve produced non-finite coefficients");
  }
  return out;
}

}  // namespace volterra
