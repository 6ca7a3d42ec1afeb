#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "volterra/core.hpp"

namespace volterra {

enum class KernelFamily { SumPolynomial, InhomogeneousPolynomial, Exponential, Gaussian };

std::string_view to_string(KernelFamily family);
/// Accepts "sum", "inhomogeneous", "exponential", "gaussian".
KernelFamily parse_kernel_family(std::string_view name);

struct KernelSpec {
  KernelFamily family = KernelFamily::SumPolynomial;
  int order = 1;       // polynomial families only
  double sigma = 1.0;  // Gaussian only

  static KernelSpec sum_polynomial(int order) { return {KernelFamily::SumPolynomial, order, 1.0}; }
  static KernelSpec inhomogeneous(int order) {
    return {KernelFamily::InhomogeneousPolynomial, order, 1.0};
  }
  static KernelSpec exponential() { return {KernelFamily::Exponential, 0, 1.0}; }
  static KernelSpec gaussian(double sigma) { return {KernelFamily::Gaussian, 0, sigma}; }

  bool is_polynomial() const {
    return family == KernelFamily::SumPolynomial || family == KernelFamily::InhomogeneousPolynomial;
  }
  void validate() const;
  bool operator==(const KernelSpec&) const = default;
};

/// Upper bound on m^p accepted by the explicit monomial feature map.
inline constexpr std::int64_t kMaxMonomialBlock = 10'000'000;

/// Number of ordered monomials of degree <= order in `memory` variables,
/// sum_{n=0..order} memory^n. Throws FeatureSpaceTooLarge when memory^order
/// exceeds kMaxMonomialBlock.
std::int64_t feature_dimension(int memory, int order);

namespace detail {

template <typename Scalar>
using Accumulator = std::conditional_t<(sizeof(Scalar) < sizeof(long double)), long double, Scalar>;

template <typename A, typename B>
auto wide_dot(const Eigen::MatrixBase<A>& x1, const Eigen::MatrixBase<B>& x2) {
  using Acc = Accumulator<typename A::Scalar>;
  Acc sum(0);
  for (Eigen::Index i = 0; i < x1.size(); ++i) {
    sum += static_cast<Acc>(x1.coeff(i)) * static_cast<Acc>(x2.coeff(i));
  }
  return sum;
}

template <typename A, typename B>
auto wide_squared_distance(const Eigen::MatrixBase<A>& x1, const Eigen::MatrixBase<B>& x2) {
  using Acc = Accumulator<typename A::Scalar>;
  Acc sum(0);
  for (Eigen::Index i = 0; i < x1.size(); ++i) {
    const Acc d = static_cast<Acc>(x1.coeff(i)) - static_cast<Acc>(x2.coeff(i));
    sum += d * d;
  }
  return sum;
}

/// sum_{n=0..order} t^n by Horner's rule.
template <typename Acc>
Acc geometric_sum(Acc t, int order) {
  Acc value(1);
  for (int n = 0; n < order; ++n) value = value * t + Acc(1);
  return value;
}

inline void check_same_dimension(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch,
                "kernel arguments of dimension " + std::to_string(a) + " and " + std::to_string(b));
  }
}

}  // namespace detail

namespace detail {

/// kernel_eval without the final rounding: the value in the accumulator type.
template <typename A, typename B>
auto kernel_eval_wide(const KernelSpec& spec, const Eigen::MatrixBase<A>& x1,
                      const Eigen::MatrixBase<B>& x2) {
  using Acc = Accumulator<typename A::Scalar>;
  using std::exp;
  check_same_dimension(x1.size(), x2.size());
  switch (spec.family) {
    case KernelFamily::SumPolynomial:
      return geometric_sum<Acc>(wide_dot(x1, x2), spec.order);
    case KernelFamily::InhomogeneousPolynomial: {
      const Acc base = Acc(1) + wide_dot(x1, x2);
      Acc value(1);
      for (int n = 0; n < spec.order; ++n) value *= base;
      return value;
    }
    case KernelFamily::Exponential:
      return Acc(exp(wide_dot(x1, x2)));
    case KernelFamily::Gaussian:
      return Acc(exp(-wide_squared_distance(x1, x2) / static_cast<Acc>(spec.sigma)));
  }
  return Acc(0);
}

}  // namespace detail

/// Evaluates k(x1, x2) for the given kernel family:
///   SumPolynomial           sum_{n=0..p} (x1.x2)^n
///   InhomogeneousPolynomial (1 + x1.x2)^p
///   Exponential             exp(x1.x2)
///   Gaussian                exp(-|x1 - x2|^2 / sigma)
template <typename A, typename B>
typename A::Scalar kernel_eval(const KernelSpec& spec, const Eigen::MatrixBase<A>& x1,
                               const Eigen::MatrixBase<B>& x2) {
  return static_cast<typename A::Scalar>(detail::kernel_eval_wide(spec, x1, x2));
}

template <typename Scalar>
struct GramMatrix {
  Matrix<Scalar> entries;
  KernelSpec spec;
};

/// Gram matrix of the rows of `inputs`. Entries are computed for i <= j and
/// mirrored, so the result is bitwise symmetric.
template <typename Derived>
GramMatrix<typename Derived::Scalar> gram(const KernelSpec& spec,
                                          const Eigen::MatrixBase<Derived>& inputs) {
  using Scalar = typename Derived::Scalar;
  spec.validate();
  const Eigen::Index n = inputs.rows();
  GramMatrix<Scalar> out{Matrix<Scalar>(n, n), spec};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const Scalar v = kernel_eval(spec, inputs.row(i), inputs.row(j));
      out.entries(i, j) = v;
      out.entries(j, i) = v;
    }
  }
  return out;
}

/// Kernel sections k(x, x_i) for every row x_i of `inputs`.
template <typename Derived, typename Query>
Vector<typename Derived::Scalar> kernel_column(const KernelSpec& spec,
                                               const Eigen::MatrixBase<Derived>& inputs,
                                               const Eigen::MatrixBase<Query>& x) {
  Vector<typename Derived::Scalar> out(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) out(i) = kernel_eval(spec, inputs.row(i), x);
  return out;
}

/// Cross-kernel matrix between query rows and training rows.
template <typename Q, typename T>
Matrix<typename T::Scalar> cross_gram(const KernelSpec& spec, const Eigen::MatrixBase<Q>& queries,
                                      const Eigen::MatrixBase<T>& training) {
  Matrix<typename T::Scalar> out(queries.rows(), training.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    for (Eigen::Index j = 0; j < training.rows(); ++j) {
      out(i, j) = kernel_eval(spec, queries.row(i), training.row(j));
    }
  }
  return out;
}

/// Degree-n block of ordered monomials: all m^n products x_{i1}...x_{in},
/// index tuples in lexicographic order (last index fastest).
template <typename Derived>
Vector<typename Derived::Scalar> monomial_block(const Eigen::MatrixBase<Derived>& x, int degree) {
  using Scalar = typename Derived::Scalar;
  const auto m = static_cast<int>(x.size());
  if (m < 1) throw Error(ErrorKind::InvalidMemory, "monomial_block of an empty vector");
  if (degree < 0) throw Error(ErrorKind::InvalidArgument, "negative monomial degree");
  feature_dimension(m, degree);
  Vector<Scalar> block = Vector<Scalar>::Ones(1);
  for (int n = 0; n < degree; ++n) {
    Vector<Scalar> next(block.size() * m);
    for (Eigen::Index i = 0; i < block.size(); ++i) {
      for (int j = 0; j < m; ++j) next(i * m + j) = block(i) * x.coeff(j);
    }
    block.swap(next);
  }
  return block;
}

/// Stacked ordered-monomial feature map (Phi_0, Phi_1, ..., Phi_p).
template <typename Derived>
Vector<typename Derived::Scalar> feature_map(const Eigen::MatrixBase<Derived>& x, int order) {
  using Scalar = typename Derived::Scalar;
  const auto m = static_cast<int>(x.size());
  if (m < 1) throw Error(ErrorKind::InvalidMemory, "feature_map of an empty vector");
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative feature order");
  Vector<Scalar> out(feature_dimension(m, order));
  Eigen::Index offset = 0;
  for (int n = 0; n <= order; ++n) {
    const Vector<Scalar> block = monomial_block(x, n);
    out.segment(offset, block.size()) = block;
    offset += block.size();
  }
  return out;
}

/// Row-stacked feature matrix: row i is feature_map(inputs.row(i), order).
template <typename Derived>
Matrix<typename Derived::Scalar> feature_matrix(const Eigen::MatrixBase<Derived>& inputs, int order) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out(inputs.rows(), feature_dimension(static_cast<int>(inputs.cols()), order));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    out.row(i) = feature_map(inputs.row(i), order).transpose();
  }
  return out;
}

}  // namespace volterra
