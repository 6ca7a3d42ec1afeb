// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_series.hpp"
#include "volterra/cli/commands.hpp"
#include "volterra/cli/io.hpp"
#include "volterra/kspa.hpp"
#include "volterra/selection.hpp"
#include "volterra/simulation.hpp"
#include "volterra/solver.hpp"

using namespace volterra;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("threw: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_s;
  const bool pass = out.pass && in_time;
  failures += pass ? 0 : 1;
  std::printf("%s %2d %s: %s (%.2f s of %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs, budget_s, in_time ? "" : " [over time budget]");
  std::fflush(stdout);
}

TrajectoryMatrix<double> trajectory(const MatrixXd& x, const VectorXd& y) {
  TrajectoryMatrix<double> t;
  t.inputs = x;
  t.targets = y;
  return t;
}

MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

struct SmallProblem {
  int m, p;
  MatrixXd x;
  VectorXd y;
};

// N is capped at C(m + p, p), the rank of the ordered-monomial design, so
// that lambda = 0 is a well-posed interpolation in the dual.
std::vector<SmallProblem> small_problems(std::uint64_t seed, bool cap_at_rank) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mp(1, 3);
  std::vector<SmallProblem> out;
  for (int t = 0; t < 50; ++t) {
    const int m = mp(rng), p = mp(rng);
    const long long limit = cap_at_rank ? std::min<long long>(20, volterra_dimension(m, p)) : 20;
    std::uniform_int_distribution<long long> size(cap_at_rank ? 1 : limit, limit);
    const auto n = static_cast<Eigen::Index>(size(rng));
    out.push_back({m, p, uniform_matrix(rng, n, m), uniform_matrix(rng, n, 1).col(0)});
  }
  return out;
}

Outcome kernel_trick() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> mp(1, 4);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int m = mp(rng), p = mp(rng);
    const auto x = oracle::uniform_vector(rng, static_cast<std::size_t>(m));
    const auto y = oracle::uniform_vector(rng, static_cast<std::size_t>(m));
    const double ref = oracle::dot(oracle::stacked_features(x, p), oracle::stacked_features(y, p));
    const double got = kernel_eval(KernelSpec::sum_polynomial(p),
                                   Eigen::Map<const VectorXd>(x.data(), m),
                                   Eigen::Map<const VectorXd>(y.data(), m));
    worst = std::max(worst, std::abs(got - ref) / std::abs(ref));
  }
  return {worst <= 1e-9, fmt("max relative error %.3g over 1000 pairs (tol 1e-9)", worst)};
}

Outcome dimension_formula() {
  int mismatches = 0;
  for (int m = 1; m <= 6; ++m) {
    for (int p = 1; p <= 6; ++p) mismatches += volterra_dimension(m, p) != oracle::count_monomials(m, p);
  }
  const long long big = volterra_dimension(10, 10);
  return {mismatches == 0 && big == 184756,
          fmt("%d mismatches for m,p <= 6; (10,10) -> %lld", mismatches, big)};
}

Outcome primal_dual() {
  double worst = 0.0;
  for (const auto& pr : small_problems(3, true)) {
    const auto t = trajectory(pr.x, pr.y);
    const VectorXd dual = fit(t, KernelSpec::sum_polynomial(pr.p), 0.0).reconstruct();
    const VectorXd primal = fit_explicit(t, pr.p, 0.0).predict_rows(pr.x);
    worst = std::max(worst, (dual - primal).norm() / primal.norm());
  }
  return {worst <= 1e-7, fmt("max relative gap %.3g over 50 problems, N <= min(20, C(m+p,p)) "
                             "(tol 1e-7)", worst)};
}

Outcome orthogonality() {
  double worst_same = 0.0, worst_over = 0.0;
  for (bool cap : {true, false}) {
    for (const auto& pr : small_problems(cap ? 3 : 4, cap)) {
      const auto e = fit_explicit(trajectory(pr.x, pr.y), pr.p, 0.0);
      const MatrixXd phi = feature_matrix(pr.x, pr.p);
      const VectorXd r = pr.y - phi * e.coefficients;
      double& worst = cap ? worst_same : worst_over;
      worst = std::max(worst, (phi.transpose() * r).norm() / pr.y.norm());
    }
  }
  return {worst_same <= 1e-7 && worst_over <= 1e-7,
          fmt("max |Phi'r|/|y| %.3g on the same problems, %.3g with N = 20 (tol 1e-7)", worst_same,
              worst_over)};
}

Outcome interpolation() {
  const ModelConfig at{10, 5, 1e-8};
  std::string detail;
  bool pass = true;
  for (ProcessSpec proto : {ProcessSpec::p2(), ProcessSpec::p3(), ProcessSpec::p3_arma21()}) {
    int ok = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t r = 0; r < 100; ++r) {
      proto.seed = 1 + r;
      const TimeSeries s = generate(proto);
      const double v = fit_method(s, Method::Volterra, at).rmse;
      const double ar = fit_method(s, Method::ArBaseline, at).rmse;
      const double sd = standard_deviation(s.values());
      worst_ratio = std::max(worst_ratio, v / sd);
      ok += v <= 1e-4 * sd && v <= 1e-2 * ar;
    }
    pass = pass && ok >= 95;
    detail += fmt("%s %d/100 (worst rmse/sd %.2g); ", proto.name.c_str(), ok, worst_ratio);
  }
  for (const char* name : {"death.csv", "nile.csv"}) {
    const TimeSeries s = cli::ingest_csv(std::string(VOLTERRA_TEST_DATA_DIR) + "/" + name);
    const double v = fit_method(s, Method::Volterra, at).rmse;
    const double ar = fit_method(s, Method::ArBaseline, at).rmse;
    const double sd = standard_deviation(s.values());
    const bool ok = v <= 1e-4 * sd && v <= 1e-2 * ar;
    pass = pass && ok;
    detail += fmt("%s rmse %.3g sd %.3g ar %.3g; ", s.label().c_str(), v, sd, ar);
  }
  detail += "m=10 p=5 lambda=1e-8";
  return {pass, detail};
}

Outcome table1_p1() {
  const ModelConfig at{8, 3, 0.0};
  McOptions opts;
  opts.lambda_grid = SearchGrid::defaults().lambdas;
  const auto summary = run_table1({ProcessSpec::p1()}, {at}, 100, 1, opts);
  const auto& cell = summary.cell("P1", at, Method::Volterra);
  return {cell.failures == 0 && cell.mean_rmse >= 0.01 && cell.mean_rmse <= 0.5,
          fmt("mean Volterra RMSE %.4g over 100 runs, CV-chosen lambda, %zu failures "
              "(target [0.01, 0.5])",
              cell.mean_rmse, cell.failures)};
}

ErrorSample sample(std::vector<double> v) { return ErrorSample(std::move(v), ErrorTransform::Absolute); }

Outcome kspa_exact() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> level(0, 4);
  double worst = 0.0;
  int cases = 0;
  for (std::size_t n1 = 1; n1 <= 8; ++n1) {
    for (std::size_t n2 = 1; n2 <= 8; ++n2) {
      for (bool ties : {false, true}) {
        std::vector<double> a(n1), b(n2);
        for (auto& v : a) v = ties ? level(rng) : std::uniform_real_distribution<double>(0, 1)(rng);
        for (auto& v : b) v = ties ? level(rng) : std::uniform_real_distribution<double>(0, 1.5)(rng);
        const double two = kspa_two_sided(sample(a), sample(b)).p_value;
        const double one = kspa_one_sided(sample(a), sample(b)).p_value;
        worst = std::max(worst, std::abs(two - oracle::ks_permutation_p(a, b, true)));
        worst = std::max(worst, std::abs(one - oracle::ks_permutation_p(a, b, false)));
        cases += 2;
      }
    }
  }
  const double sep2 = kspa_two_sided(sample({0, 0, 0}), sample({1, 1, 1})).p_value;
  const double sep1 = kspa_one_sided(sample({0, 0, 0}), sample({1, 1, 1})).p_value;
  const bool pass = worst <= 1e-12 && std::abs(sep2 - 0.1) <= 1e-12 && std::abs(sep1 - 0.05) <= 1e-12;
  return {pass, fmt("max |p - enumeration| %.3g over %d cases; separated p %.6g / %.6g "
                    "(expect 0.1 / 0.05)",
                    worst, cases, sep2, sep1)};
}

Outcome kspa_calibration() {
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> expo(1.0);
  int rejections = 0;
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> a(6), b(6);
    for (auto& v : a) v = expo(rng);
    for (auto& v : b) v = expo(rng);
    const auto r = kspa_two_sided(sample(a), sample(b));
    if (r.method != PValueMethod::Exact) return {false, "expected the exact path"};
    rejections += r.p_value <= 0.05;
  }
  const double rate = rejections / 2000.0;
  return {rate <= 0.07, fmt("rejection rate %.4f at alpha 0.05, n1 = n2 = 6 (limit 0.07)", rate)};
}

SearchGrid cv_grid() {
  SearchGrid g = SearchGrid::defaults();
  g.memories = {1, 2, 3, 4};
  g.orders = {1, 2, 3, 4};
  return g;
}

Outcome cv_sanity() {
  const SearchGrid grid = cv_grid();
  const KernelSpec family = KernelSpec::sum_polynomial(1);
  int clean_ok = 0;
  double clean_worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto report = cross_validate(testdata::henon(seed, 100), grid, family);
    const double score = report.candidates[report.selected_index].mean_rmse;
    clean_worst = std::max(clean_worst, score);
    clean_ok += score <= 1e-8;
  }

  int noisy_ok = 0;
  double noisy_worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const TimeSeries s = testdata::noisy_quadratic(1000 + seed, 400, 0.1);
    const auto sel = select_and_refit(s, grid, family);
    const auto [train, test] = split(s, grid.train_fraction);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : grid.candidates()) {
      try {
        const auto model = fit(embed(train, c.memory), candidate_kernel(family, c), c.lambda);
        best = std::min(best, rmse(test.as_vector(), predict_tail(model, s, train.size())));
      } catch (const Error&) {
      }
    }
    const double ratio = sel.report.test_rmse / best;
    noisy_worst = std::max(noisy_worst, ratio);
    noisy_ok += ratio <= 1.1;
  }
  return {clean_ok == 50 && noisy_ok >= 45,
          fmt("noise-free: %d/50 with CV RMSE <= 1e-8 (worst %.3g); noisy: %d/50 within 10%% of the "
              "best test RMSE (worst ratio %.3f); grid m,p in 1..4 x 6 lambdas",
              clean_ok, clean_worst, noisy_ok, noisy_worst)};
}

Outcome determinism() {
  cli::RunConfig config;
  config.command = "reproduce";
  config.target = "all";
  const cli::Report a = cli::run_command(config);
  const cli::Report b = cli::run_command(config);
  bool same = a.json_text() == b.json_text() && a.tables.size() == b.tables.size();
  for (std::size_t i = 0; same && i < a.tables.size(); ++i) {
    same = a.tables[i].first == b.tables[i].first &&
           a.tables[i].second.render() == b.tables[i].second.render();
  }
  return {same, fmt("two full reproductions, master seed %llu: JSON %zu bytes and %zu CSV files %s",
                    static_cast<unsigned long long>(config.seed), a.json_text().size(),
                    a.tables.size(), same ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  criterion(1, "kernel-trick equivalence", 5, kernel_trick);
  criterion(2, "dimension formula", 1, dimension_formula);
  criterion(3, "primal-dual equivalence", 10, primal_dual);
  criterion(4, "residual orthogonality", 10, orthogonality);
  criterion(5, "interpolation magnitude", 120, interpolation);
  criterion(6, "P1 mean RMSE at (8,3)", 120, table1_p1);
  criterion(7, "KSPA exact p-values", 30, kspa_exact);
  criterion(8, "KSPA calibration", 30, kspa_calibration);
  criterion(9, "cross-validation sanity", 300, cv_sanity);
  // Budget covers both reproductions.
  criterion(10, "deterministic reproduction", 600, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
