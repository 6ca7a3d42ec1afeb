#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "volterra/kernels.hpp"

using namespace volterra;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = u(rng);
  return out;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("kernel_eval examples") {
  CHECK(kernel_eval(KernelSpec::sum_polynomial(3), vec({1.0}), vec({1.0})) == 4.0);
  CHECK(kernel_eval(KernelSpec::inhomogeneous(2), vec({1, 1}), vec({1, 2})) == 16.0);
  CHECK(kernel_eval(KernelSpec::gaussian(0.3), vec({0.2, -4}), vec({0.2, -4})) == 1.0);
  CHECK(kernel_eval(KernelSpec::exponential(), vec({1, 0}), vec({0, 5})) == 1.0);
}

TEST_CASE("inhomogeneous kernel equals its weighted feature expansion") {
  // (1 + x.y)^2 = phi(x).phi(y) with phi = (1, r2 x1, r2 x2, r2 x1 x2, x1^2, x2^2).
  const double r2 = std::sqrt(2.0);
  auto phi = [&](double a, double b) { return vec({1, r2 * a, r2 * b, r2 * a * b, a * a, b * b}); };
  const double expected = phi(1, 1).dot(phi(1, 2));
  CHECK(expected == doctest::Approx(16.0).epsilon(1e-14));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::uniform_vector(rng, 2);
    const auto y = oracle::uniform_vector(rng, 2);
    CHECK(kernel_eval(KernelSpec::inhomogeneous(2), to_eigen(x), to_eigen(y)) ==
          doctest::Approx(phi(x[0], x[1]).dot(phi(y[0], y[1]))).epsilon(1e-13));
  }
}

TEST_CASE("kernel_eval rejects mismatched dimensions") {
  try {
    kernel_eval(KernelSpec::sum_polynomial(2), vec({1, 2}), vec({1}));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("kernel spec validation and parsing") {
  CHECK_THROWS_AS(KernelSpec::sum_polynomial(-1).validate(), Error);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0).validate(), Error);
  CHECK_THROWS_AS(KernelSpec::gaussian(-2.0).validate(), Error);
  CHECK_NOTHROW(KernelSpec::exponential().validate());
  CHECK(parse_kernel_family("gaussian") == KernelFamily::Gaussian);
  CHECK(parse_kernel_family("sum") == KernelFamily::SumPolynomial);
  CHECK_THROWS_AS(parse_kernel_family("laplace"), Error);
}

TEST_CASE("kernel trick against explicit ordered monomials") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const int m = 1 + t % 4;
    const int p = (t / 4) % 5;
    const auto x = oracle::uniform_vector(rng, static_cast<std::size_t>(m));
    const auto y = oracle::uniform_vector(rng, static_cast<std::size_t>(m));
    const double explicit_value =
        oracle::dot(oracle::stacked_features(x, p), oracle::stacked_features(y, p));
    const double value = kernel_eval(KernelSpec::sum_polynomial(p), to_eigen(x), to_eigen(y));
    CHECK(std::abs(value - explicit_value) <= 1e-9 * (1.0 + std::abs(value)));
  }
}

TEST_CASE("inhomogeneous kernel binomial identity") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const int m = 1 + t % 4;
    const int p = t % 6;
    const auto x = to_eigen(oracle::uniform_vector(rng, static_cast<std::size_t>(m)));
    const auto y = to_eigen(oracle::uniform_vector(rng, static_cast<std::size_t>(m)));
    const double s = x.dot(y);
    double expansion = 0.0, binom = 1.0;
    for (int n = 0; n <= p; ++n) {
      expansion += binom * std::pow(s, n);
      binom = binom * (p - n) / (n + 1);
    }
    const double value = kernel_eval(KernelSpec::inhomogeneous(p), x, y);
    CHECK(std::abs(value - expansion) <= 1e-9 * (1.0 + std::abs(value)));
  }
}

TEST_CASE("exponential kernel is the limit of truncated series") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    auto x = to_eigen(oracle::uniform_vector(rng, 3));
    auto y = to_eigen(oracle::uniform_vector(rng, 3));
    const double s = x.dot(y);
    if (std::abs(s) > 1.0) {
      x /= std::sqrt(std::abs(s));
      y /= std::sqrt(std::abs(s));
    }
    const double target = kernel_eval(KernelSpec::exponential(), x, y);
    const double u = x.dot(y);
    double partial = 0.0, term = 1.0, previous_gap = INFINITY;
    for (int n = 0; n <= 20; ++n) {
      partial += term;
      term *= u / (n + 1);
      const double gap = std::abs(partial - target);
      CHECK((gap <= previous_gap || gap <= 1e-15));
      previous_gap = gap;
    }
    CHECK(previous_gap <= 1e-12);
  }
}

TEST_CASE("gram matrix examples") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  CHECK(gram(KernelSpec::sum_polynomial(1), one).entries(0, 0) == 2.0);

  Eigen::MatrixXd dup(2, 3);
  dup << 0.1, 0.2, 0.3, 0.1, 0.2, 0.3;
  for (const auto& spec : {KernelSpec::sum_polynomial(3), KernelSpec::gaussian(1.5),
                           KernelSpec::exponential(), KernelSpec::inhomogeneous(2)}) {
    const auto g = gram(spec, dup).entries;
    CHECK(g.row(0) == g.row(1));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    CHECK(lu.rank() == 1);
  }
}

TEST_CASE("gram matrix matches a naive double loop and is exactly symmetric") {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXd x = random_matrix(rng, 5, 3);
  const auto g = gram(KernelSpec::sum_polynomial(2), x).entries;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double s = x.row(i).dot(x.row(j));
      CHECK(g(i, j) == doctest::Approx(1.0 + s + s * s).epsilon(1e-14));
      CHECK(g(i, j) == g(j, i));
    }
  }
}

TEST_CASE("gram matrices are positive semi-definite") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index n = 3 + t % 20;
    const Eigen::Index m = 1 + t % 4;
    const Eigen::MatrixXd x = random_matrix(rng, n, m);
    for (const auto& spec : {KernelSpec::sum_polynomial(1 + t % 5), KernelSpec::gaussian(0.5),
                             KernelSpec::exponential(), KernelSpec::inhomogeneous(1 + t % 4)}) {
      const auto g = gram(spec, x).entries;
      const double floor = -1e-8 * g.trace() / static_cast<double>(n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
      CHECK(eig.eigenvalues().minCoeff() >= floor);
    }
  }
}

TEST_CASE("kernel_column and cross_gram agree with kernel_eval") {
  std::mt19937_64 rng(29);
  const Eigen::MatrixXd train = random_matrix(rng, 6, 2);
  const Eigen::MatrixXd queries = random_matrix(rng, 3, 2);
  const auto spec = KernelSpec::sum_polynomial(3);
  const Eigen::MatrixXd c = cross_gram(spec, queries, train);
  for (int q = 0; q < 3; ++q) {
    const Eigen::VectorXd col = kernel_column(spec, train, queries.row(q));
    CHECK(c.row(q).transpose() == col);
    for (int i = 0; i < 6; ++i) CHECK(col(i) == kernel_eval(spec, train.row(i), queries.row(q)));
  }
}

TEST_CASE("feature map examples") {
  CHECK(feature_map(vec({2.0}), 2) == vec({1, 2, 4}));
  CHECK(feature_map(vec({3.0, 5.0}), 1) == vec({1, 3, 5}));
  const Eigen::VectorXd f = feature_map(vec({3.0, 5.0}), 2);
  CHECK(f.size() == 7);
  CHECK(f == vec({1, 3, 5, 9, 15, 15, 25}));
  CHECK(feature_dimension(2, 2) == 7);
}

TEST_CASE("feature map matches the tuple enumeration oracle") {
  std::mt19937_64 rng(31);
  for (int m = 1; m <= 4; ++m) {
    for (int p = 0; p <= 4; ++p) {
      const auto x = oracle::uniform_vector(rng, static_cast<std::size_t>(m));
      const Eigen::VectorXd f = feature_map(to_eigen(x), p);
      const auto expected = oracle::stacked_features(x, p);
      REQUIRE(f.size() == static_cast<Eigen::Index>(expected.size()));
      for (std::size_t i = 0; i < expected.size(); ++i) CHECK(f(static_cast<Eigen::Index>(i)) == expected[i]);
    }
  }
}

TEST_CASE("feature space guard") {
  try {
    feature_dimension(10, 8);
    FAIL("expected FeatureSpaceTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FeatureSpaceTooLarge);
  }
  CHECK(feature_dimension(10, 7) == 11111111);
}

TEST_CASE("long double scalar instantiation") {
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> x(2, 2);
  x << 1, 2, 3, 4;
  const auto g = gram(KernelSpec::sum_polynomial(2), x).entries;
  CHECK(static_cast<double>(g(0, 1)) == 1.0 + 11.0 + 121.0);
}

}
