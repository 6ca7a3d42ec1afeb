#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "volterra/simulation.hpp"
#include "volterra/solver.hpp"

using namespace volterra;

namespace {

TrajectoryMatrix<double> trajectory(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return {x, y};
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = u(rng);
  return out;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, 1).col(0);
}

double relative_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("single-point model") {
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  Eigen::VectorXd y(1);
  y << 4.0;
  const auto model = fit(trajectory(x, y), KernelSpec::sum_polynomial(1), 0.0);
  CHECK(model.gamma()(0) == doctest::Approx(2.0));
  CHECK(model.predict(x.row(0)) == doctest::Approx(4.0));
  CHECK(model.effective_lambda() == 0.0);

  for (double q : {-1.5, 0.0, 1.0, 3.0}) {
    Eigen::VectorXd xq(1);
    xq << q;
    const auto d = model.operator_contributions(xq);
    CHECK(d.contributions(0) == doctest::Approx(2.0));
    CHECK(d.contributions(1) == doctest::Approx(2.0 * q));
    CHECK(d.total() == doctest::Approx(model.predict(xq)));
  }
  CHECK(model.recover_coefficients(1)(0) == doctest::Approx(2.0));
  const Eigen::VectorXd eta0 = model.recover_coefficients(0);
  REQUIRE(eta0.size() == 1);
  CHECK(eta0(0) == doctest::Approx(model.gamma().sum()));
}

TEST_CASE("large lambda shrinks gamma toward y / lambda") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = random_matrix(rng, 8, 2);
  const Eigen::VectorXd y = random_vector(rng, 8);
  const auto model = fit(trajectory(x, y), KernelSpec::sum_polynomial(2), 1e12);
  CHECK(relative_gap(model.gamma() * 1e12, y) < 1e-9);
  CHECK(model.reconstruct().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gamma matches a Gauss elimination oracle") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = random_matrix(rng, 5, 1 + t % 3);
    const Eigen::VectorXd y = random_vector(rng, 5);
    for (const auto& spec : {KernelSpec::sum_polynomial(1 + t % 4), KernelSpec::gaussian(0.7),
                             KernelSpec::inhomogeneous(2), KernelSpec::exponential()}) {
      const auto model = fit(trajectory(x, y), spec, 0.1);
      Eigen::MatrixXd system = gram(spec, x).entries;
      system.diagonal().array() += 0.1;
      const Eigen::VectorXd expected = oracle::gauss_solve(system, y);
      CHECK((model.gamma() - expected).norm() <= 1e-8 * std::max(1.0, expected.norm()));
    }
  }
}

TEST_CASE("dual solve residual within tolerance") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index n = 4 + t;
    const Eigen::MatrixXd x = random_matrix(rng, n, 3);
    const Eigen::VectorXd y = random_vector(rng, n);
    const double lambda = t % 2 == 0 ? 0.0 : 1e-3;
    const auto model = fit(trajectory(x, y), KernelSpec::sum_polynomial(3), lambda);
    Eigen::MatrixXd system = gram(KernelSpec::sum_polynomial(3), x).entries;
    system.diagonal().array() += model.effective_lambda();
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LMatrix r = system.cast<long double>() * model.gamma().cast<long double>() -
                      y.cast<long double>();
    CHECK(static_cast<double>(r.norm()) <= 1e-8 * y.norm());
  }
}

TEST_CASE("gaussian prediction vanishes far from the data") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = random_matrix(rng, 10, 2);
  const Eigen::VectorXd y = random_vector(rng, 10);
  const auto model = fit(trajectory(x, y), KernelSpec::gaussian(0.5), 1e-3);
  CHECK(std::abs(model.predict(Eigen::Vector2d(40.0, -40.0))) < 1e-100);
}

TEST_CASE("interpolation at lambda zero") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 4);
  const Eigen::VectorXd y = random_vector(rng, 30);
  const auto model = fit(trajectory(x, y), KernelSpec::sum_polynomial(3), 0.0);
  const double sd = std::sqrt((y.array() - y.mean()).square().sum() / 29.0);
  CHECK(rmse(y, model.reconstruct()) <= 1e-6 * sd);
}

TEST_CASE("conflicting duplicates") {
  Eigen::MatrixXd x(3, 1);
  x << 0.5, 0.5, -0.2;
  const Eigen::Vector3d y(1.0, 3.0, 0.0);
  const auto ridge = fit(trajectory(x, y), KernelSpec::sum_polynomial(2), 0.1);
  const double at = ridge.predict(x.row(0));
  CHECK(std::isfinite(at));
  CHECK(at > 1.0);
  CHECK(at < 3.0);
  // Singular K at lambda = 0 falls back to jitter.
  const auto jittered = fit(trajectory(x, y), KernelSpec::sum_polynomial(2), 0.0);
  CHECK(jittered.effective_lambda() > 0.0);
  CHECK(jittered.gamma().allFinite());
}

TEST_CASE("non-finite training data is rejected") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, NAN;
  try {
    fit(trajectory(x, Eigen::Vector2d(1, 2)), KernelSpec::sum_polynomial(1), 0.0);
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteInput);
  }
}

TEST_CASE("operator decomposition sums to the prediction") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const int m = 1 + t % 3;
    const int p = t % 5;
    const Eigen::MatrixXd x = random_matrix(rng, 12, m);
    const Eigen::VectorXd y = random_vector(rng, 12);
    const auto model = fit(trajectory(x, y), KernelSpec::sum_polynomial(p), t % 2 ? 0.05 : 0.0);
    for (int q = 0; q < 10; ++q) {
      const Eigen::VectorXd xq = random_vector(rng, m);
      const auto d = model.operator_contributions(xq);
      REQUIRE(d.contributions.size() == p + 1);
      const double pred = model.predict(xq);
      CHECK(std::abs(d.total() - pred) <= 1e-8 * std::max(1.0, std::abs(pred)));
      if (p == 0) CHECK(d.contributions(0) == doctest::Approx(pred));
    }
  }
}

TEST_CASE("recovered coefficients reproduce the operator contributions") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = random_matrix(rng, 15, 3);
  const Eigen::VectorXd y = random_vector(rng, 15);
  const auto model = fit(trajectory(x, y), KernelSpec::sum_polynomial(3), 0.01);
  const auto with_eta = model.operator_contributions(x.row(0), true);
  REQUIRE(with_eta.eta.has_value());
  for (int q = 0; q < 100; ++q) {
    const Eigen::VectorXd xq = random_vector(rng, 3);
    const auto d = model.operator_contributions(xq);
    for (int n = 0; n <= 3; ++n) {
      const Eigen::VectorXd eta = (*with_eta.eta)[static_cast<std::size_t>(n)];
      const double h = eta.dot(monomial_block(xq, n));
      CHECK(std::abs(h - d.contributions(n)) <= 1e-8 * std::max(1.0, std::abs(h)));
    }
  }
  CHECK_THROWS_AS(model.recover_coefficients(4), Error);
}

TEST_CASE("decomposition requires the sum kernel") {
  Eigen::MatrixXd x(2, 1);
  x << 0.1, 0.2;
  const auto model = fit(trajectory(x, Eigen::Vector2d(1, 2)), KernelSpec::gaussian(1.0), 0.0);
  try {
    model.operator_contributions(x.row(0));
    FAIL("expected UnsupportedKernel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedKernel);
  }
  CHECK_THROWS_AS(model.recover_coefficients(0), Error);
}

TEST_CASE("predict checks the query dimension") {
  Eigen::MatrixXd x(2, 2);
  x << 0.1, 0.2, 0.3, 0.4;
  const auto model = fit(trajectory(x, Eigen::Vector2d(1, 2)), KernelSpec::sum_polynomial(1), 0.0);
  CHECK_THROWS_AS(model.predict(Eigen::Vector3d(1, 2, 3)), Error);
}

TEST_CASE("explicit fit recovers an exact linear map") {
  Eigen::MatrixXd x(4, 1);
  x << -1.0, 0.5, 2.0, 3.0;
  const Eigen::VectorXd y = 0.5 * x.col(0);
  const auto e = fit_explicit(trajectory(x, y), 1, 0.0);
  REQUIRE(e.coefficients.size() == 2);
  CHECK(std::abs(e.coefficients(0)) < 1e-12);
  CHECK(e.coefficients(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dual and primal predictions agree") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const int m = 1 + t % 3;
    const int p = 1 + (t / 3) % 3;
    // The ordered-monomial design has rank C(m + p, p); beyond that many
    // points K is singular and lambda = 0 is no longer an interpolation.
    const Eigen::Index n = std::min<Eigen::Index>(20, volterra_dimension(m, p));
    const Eigen::MatrixXd x = random_matrix(rng, n, m);
    const Eigen::VectorXd y = random_vector(rng, n);
    for (double lambda : {0.0, 0.3}) {
      const auto dual = fit(trajectory(x, y), KernelSpec::sum_polynomial(p), lambda);
      const auto primal = fit_explicit(trajectory(x, y), p, lambda);
      const Eigen::VectorXd a = dual.reconstruct();
      const Eigen::VectorXd b = primal.predict_rows(x);
      CHECK((a - b).norm() <= 1e-7 * std::max(1.0, b.norm()));
      const Eigen::VectorXd xq = random_vector(rng, m);
      CHECK(std::abs(dual.predict(xq) - primal.predict(xq)) <=
            1e-7 * std::max(1.0, std::abs(primal.predict(xq))));
    }
  }
}

TEST_CASE("explicit residuals are orthogonal to the features") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const int m = 1 + t % 3;
    const int p = 1 + (t / 3) % 3;
    // Both under- and over-determined designs.
    const Eigen::Index n = t % 2 == 0 ? 8 : 40;
    const Eigen::MatrixXd x = random_matrix(rng, n, m);
    const Eigen::VectorXd y = random_vector(rng, n);
    const auto e = fit_explicit(trajectory(x, y), p, 0.0);
    const Eigen::MatrixXd phi = feature_matrix(x, p);
    const Eigen::VectorXd r = y - phi * e.coefficients;
    CHECK((phi.transpose() * r).norm() <= 1e-7 * y.norm());
  }
}

TEST_CASE("explicit estimator is unbiased on a fixed design") {
  std::mt19937_64 rng(10);
  const int m = 2, p = 2;
  const Eigen::MatrixXd x = random_matrix(rng, 40, m);
  const Eigen::MatrixXd phi = feature_matrix(x, p);
  // Symmetric truth: equal weight on x1 x2 and x2 x1, so it lies in the row
  // space of the ordered-monomial design.
  Eigen::VectorXd truth(7);
  truth << 0.3, -0.5, 0.8, 0.2, 0.15, 0.15, -0.4;
  NormalGenerator normal(99);
  const int trials = 500;
  Eigen::MatrixXd estimates(trials, 7);
  for (int k = 0; k < trials; ++k) {
    Eigen::VectorXd y = phi * truth;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.2 * normal();
    estimates.row(k) = fit_explicit(trajectory(x, y), p, 0.0).coefficients.transpose();
  }
  const Eigen::VectorXd mean = estimates.colwise().mean();
  for (int j = 0; j < 7; ++j) {
    const double sd = std::sqrt((estimates.col(j).array() - mean(j)).square().sum() / (trials - 1));
    CAPTURE(j);
    CHECK(std::abs(mean(j) - truth(j)) <= 3.0 * sd / std::sqrt(static_cast<double>(trials)));
  }
}

TEST_CASE("explicit estimator error shrinks with sample size on P1 data") {
  // y_t = 0.5 y_{t-1} + e_t, so the degree-1 model with m = 1 has E = (0, 0.5).
  const Eigen::Vector2d truth(0.0, 0.5);
  std::vector<double> medians;
  for (std::size_t n : {50u, 200u, 800u}) {
    std::vector<double> errors;
    for (std::uint64_t r = 0; r < 20; ++r) {
      ProcessSpec spec = ProcessSpec::p1();
      spec.length = n + 1;
      spec.seed = 500 + r;
      const auto e = fit_explicit(embed(generate(spec), 1), 1, 0.0);
      errors.push_back((e.coefficients - truth).norm());
    }
    std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
    medians.push_back(errors[10]);
  }
  CHECK(medians[1] <= medians[0]);
  CHECK(medians[2] <= medians[1]);
}

TEST_CASE("predictions are linear in the targets") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd x = random_matrix(rng, 25, 3);
  const Eigen::VectorXd y1 = random_vector(rng, 25);
  const Eigen::VectorXd y2 = random_vector(rng, 25);
  const double a = 1.7, b = -0.6;
  for (const auto& spec : {KernelSpec::sum_polynomial(3), KernelSpec::gaussian(0.8)}) {
    const auto m1 = fit(trajectory(x, y1), spec, 0.01);
    const auto m2 = fit(trajectory(x, y2), spec, 0.01);
    const auto mc = fit(trajectory(x, Eigen::VectorXd(a * y1 + b * y2)), spec, 0.01);
    const Eigen::MatrixXd q = random_matrix(rng, 10, 3);
    const Eigen::VectorXd expected = a * m1.predict_rows(q) + b * m2.predict_rows(q);
    CHECK((mc.predict_rows(q) - expected).norm() <= 1e-10 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("prescaling reports on the original scale") {
  std::vector<double> values;
  for (int t = 0; t < 40; ++t) values.push_back(1000.0 + 300.0 * std::sin(0.7 * t) + 5.0 * t);
  const auto traj = embed(TimeSeries(values), 3);
  const auto model = fit(traj, KernelSpec::sum_polynomial(2), 0.0, FitOptions{true});
  const double sd = std::sqrt((traj.targets.array() - traj.targets.mean()).square().sum() /
                              static_cast<double>(traj.rows() - 1));
  CHECK(model.scale() == doctest::Approx(sd).epsilon(1e-12));
  CHECK(rmse(traj.targets, model.reconstruct()) <= 1e-6 * sd);
  const auto d = model.operator_contributions(traj.inputs.row(4));
  CHECK(d.total() == doctest::Approx(model.predict(traj.inputs.row(4))).epsilon(1e-8));
}

TEST_CASE("closed-loop rollout follows a linear recursion") {
  std::vector<double> values{1.0};
  for (int t = 1; t < 20; ++t) values.push_back(0.8 * values.back());
  const auto model = fit(embed(TimeSeries(values), 1), KernelSpec::sum_polynomial(1), 0.0);
  Eigen::VectorXd start(1);
  start << 2.0;
  const Eigen::VectorXd path = model.rollout(start, 5);
  double expected = 2.0;
  for (int s = 0; s < 5; ++s) {
    expected *= 0.8;
    CHECK(path(s) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("long double instantiation") {
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  LMatrix x(3, 1);
  x << 0.1L, 0.4L, -0.3L;
  LVector y(3);
  y << 1.0L, 2.0L, 0.5L;
  const auto model = fit(TrajectoryMatrix<long double>{x, y}, KernelSpec::sum_polynomial(2), 0.0);
  CHECK(static_cast<double>(model.predict(x.row(1))) == doctest::Approx(2.0).epsilon(1e-12));
}

}
