#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdinfer/diagnostics.hpp"
#include "hdinfer/rng.hpp"
#include "hdinfer/standardize.hpp"

using namespace hdinfer;

namespace {

RegressionData random_std_data(Index n, Index p, std::uint64_t seed) {
  CounterRng rng(SeedSpec{seed, 0});
  RegressionData d;
  d.X.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  }
  d.y = Vector::Zero(n);
  d.column_scales = Vector::Ones(p);
  return standardize(d);
}

RegressionData orthonormal_design(Index n, Index p, std::uint64_t seed) {
  CounterRng rng(SeedSpec{seed, 1});
  Matrix A(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) A(i, j) = rng.normal();
  }
  Matrix Q = Eigen::HouseholderQR<Matrix>(A).householderQ() *
             Matrix::Identity(n, p);
  RegressionData d;
  d.X = std::sqrt(static_cast<double>(n)) * Q;
  d.y = Vector::Zero(n);
  d.column_scales = Vector::Ones(p);
  d.standardized = true;
  return d;
}

Matrix equicorrelated(Index p, double rho) {
  Matrix S = Matrix::Constant(p, p, rho);
  S.diagonal().setOnes();
  return S;
}

DebiasArtifacts dummy_art(const RegressionData& d, Index j) {
  DebiasArtifacts art;
  art.j = j;
  art.z = d.X.col(j);
  art.denom = art.z.squaredNorm();
  art.z_norm2 = art.denom;
  art.z2_over_n = art.z_norm2 / static_cast<double>(d.n());
  const double z4 = art.z.array().pow(4).sum();
  art.z4_ratio = z4 / (art.z_norm2 * art.z_norm2);
  return art;
}

}  // namespace

TEST_CASE("identity Gram gives kappa 0, K1 1, C_min 1") {
  auto d = orthonormal_design(24, 8, 3);
  const std::vector<Index> S = {0, 2, 5};
  Vector beta = Vector::Zero(8);
  beta[0] = 2.0;
  beta[2] = -2.0;
  beta[5] = 2.0;
  const auto rep = condition_report(d, S, dummy_art(d, 0), beta, 0.3, 1.0);
  CHECK(rep.kappa == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(rep.K1 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.C_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.s == 3);
}

TEST_CASE("no coefficients inside a small band means s_tilde = 0") {
  auto d = orthonormal_design(40, 6, 5);
  const std::vector<Index> S = {0, 1};
  Vector beta = Vector::Zero(6);
  beta[0] = 2.0;
  beta[1] = 2.0;
  // with K1 = C_min = 1 and tiny lambda/sigma the band is far below 2
  const auto rep = condition_report(d, S, dummy_art(d, 0), beta, 1e-4, 1e-4);
  CHECK(rep.g1 + rep.g1_prime < 2.0);
  CHECK(rep.s_tilde == 0);
}

TEST_CASE("s_tilde counts the band and never grows under signal scaling") {
  auto d = orthonormal_design(30, 6, 6);
  const std::vector<Index> S = {0, 1, 2};
  Vector beta = Vector::Zero(6);
  beta[0] = 0.05;
  beta[1] = 0.2;
  beta[2] = 5.0;
  const auto art = dummy_art(d, 0);
  const auto rep = condition_report(d, S, art, beta, 0.05, 0.1);
  for (double c : {1.0, 2.0, 5.0, 20.0}) {
    const auto scaled = condition_report(d, S, art, (c * beta).eval(), 0.05, 0.1);
    CHECK(scaled.s_tilde <= rep.s_tilde);
  }
}

TEST_CASE("population report on the identity covariance") {
  const Matrix Sigma = Matrix::Identity(20, 20);
  const std::vector<Index> S = {0, 1, 2, 3};
  Vector beta = Vector::Zero(20);
  for (Index j : S) beta[j] = 2.0;
  const auto rep = population_condition_report(Sigma, S, beta, 0.3, 100.0, 1.0);
  CHECK(rep.kappa == doctest::Approx(0.0));
  CHECK(rep.K1 == doctest::Approx(1.0));
  CHECK(rep.C_min == doctest::Approx(1.0));
  CHECK(rep.C_star == doctest::Approx(1.0));
  CHECK(rep.C_lower == doctest::Approx(1.0));
  CHECK(rep.precision_col_sparsity == 1);
}

TEST_CASE("equicorrelated population incoherence matches the closed form") {
  const Index p = 500;
  const double rho = 0.2;
  const std::vector<Index> S = [&] {
    std::vector<Index> s;
    for (Index j = 0; j < 20; ++j) s.push_back(j);
    return s;
  }();
  Vector beta = Vector::Zero(p);
  for (Index j : S) beta[j] = 2.0;
  const auto rep = population_condition_report(equicorrelated(p, rho), S, beta,
                                               0.35, 100.0, 1.0);
  // s rho / (1 - rho + s rho) with s = 20: 4/4.8
  CHECK(rep.kappa == doctest::Approx(20.0 * rho / (1.0 - rho + 20.0 * rho))
                         .epsilon(1e-9));
  CHECK(rep.C_star == doctest::Approx(1.0));
  // Sherman-Morrison closed form for the precision diagonal
  const double diag_closed =
      1.0 / (1.0 - rho) -
      rho / ((1.0 - rho) * (1.0 - rho + static_cast<double>(p) * rho));
  CHECK(rep.C_lower == doctest::Approx(1.0 / diag_closed).epsilon(1e-8));
}

TEST_CASE("finite-sample factor arithmetic at the reference scale") {
  const Index p = 500;
  const std::vector<Index> S = [&] {
    std::vector<Index> s;
    for (Index j = 0; j < 20; ++j) s.push_back(j);
    return s;
  }();
  Vector beta = Vector::Zero(p);
  for (Index j : S) beta[j] = 2.0;
  const auto rep = population_condition_report(Matrix::Identity(p, p), S, beta,
                                               0.35255, 100.0, 1.0);
  // c_n = sqrt(20)/10, C_n = 4 sqrt(20) c_n / (1 - 2 c_n)^2
  const double c_n = std::sqrt(20.0) / 10.0;
  const double C_n = 4.0 * std::sqrt(20.0) * c_n / std::pow(1.0 - 2.0 * c_n, 2);
  CHECK(c_n == doctest::Approx(0.4472).epsilon(1e-3));
  CHECK(rep.C_n == doctest::Approx(C_n).epsilon(1e-9));
  CHECK_FALSE(rep.asymptotic_range);  // C_n ~ 718 >> 1
}

TEST_CASE("oracle estimator limits") {
  auto d = random_std_data(30, 8, 9);
  const std::vector<Index> S = {1, 4, 6};
  Vector beta = Vector::Zero(8);
  beta[1] = 1.5;
  beta[4] = -2.0;
  beta[6] = 0.5;
  const Vector eps = Vector::Zero(30);

  SUBCASE("noiseless, lambda to zero recovers beta") {
    const Vector oracle = oracle_estimator(d, S, beta, eps, 1e-12);
    CHECK((oracle - beta).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("orthonormal support Gram shrinks by lambda sgn") {
    auto od = orthonormal_design(30, 8, 10);
    const double lambda = 0.2;
    const Vector oracle = oracle_estimator(od, S, beta, eps, lambda);
    for (Index j : S) {
      const double expect = beta[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0);
      CHECK(oracle[j] == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK(oracle[0] == 0.0);
  }
}

TEST_CASE("oracle equals the lasso under sign consistency") {
  // strong signals, mild noise, small p: the lasso recovers the signs
  auto d = random_std_data(60, 6, 12);
  const std::vector<Index> S = {0, 1};
  Vector beta = Vector::Zero(6);
  beta[0] = 5.0;
  beta[1] = -5.0;
  CounterRng rng(SeedSpec{12, 7});
  Vector eps(60);
  for (Index i = 0; i < 60; ++i) eps[i] = 0.3 * rng.normal();
  d.y = d.X * beta + eps;

  const double lambda = 0.25;
  SolverConfig cfg;
  cfg.kkt_tol = 1e-11;
  const auto fit = fit_lasso(d, lambda, cfg);
  REQUIRE(fit.active_set == std::vector<Index>{0, 1});
  REQUIRE(fit.beta_hat[0] > 0.0);
  REQUIRE(fit.beta_hat[1] < 0.0);

  const Vector oracle = oracle_estimator(d, S, beta, eps, lambda);
  CHECK((oracle - fit.beta_hat).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("decomposition terms and identity") {
  auto d = random_std_data(50, 10, 20);
  const std::vector<Index> S = {0, 1, 2};
  Vector beta = Vector::Zero(10);
  beta[0] = 4.0;
  beta[1] = -4.0;
  beta[2] = 4.0;
  CounterRng rng(SeedSpec{20, 3});
  Vector eps(50);
  for (Index i = 0; i < 50; ++i) eps[i] = 0.4 * rng.normal();
  d.y = d.X * beta + eps;

  const double lambda = 0.3;
  SolverConfig cfg;
  cfg.kkt_tol = 1e-11;
  const auto fit = fit_lasso(d, lambda, cfg);
  const auto art = nodewise_direction(d, 0, lambda, cfg);
  const auto dec = decompose_error(d, S, beta, eps, fit, art, lambda);

  CHECK(std::abs(dec.total - (dec.noise + dec.bias + dec.remainder)) <= 1e-8);

  // sign-consistent instance: remainder is exactly zero
  bool sign_consistent = fit.active_set == S;
  for (Index j : S) {
    sign_consistent = sign_consistent && fit.beta_hat[j] * beta[j] > 0.0;
  }
  if (sign_consistent) {
    CHECK(dec.sign_form);
    CHECK(dec.remainder == 0.0);
  }
}

TEST_CASE("noiseless sign-consistent instance isolates the bias") {
  auto d = random_std_data(60, 8, 25);
  const std::vector<Index> S = {0, 3};
  Vector beta = Vector::Zero(8);
  beta[0] = 10.0;
  beta[3] = -10.0;
  const Vector eps = Vector::Zero(60);
  d.y = d.X * beta;

  const double lambda = 0.2;
  SolverConfig cfg;
  cfg.kkt_tol = 1e-12;
  const auto fit = fit_lasso(d, lambda, cfg);
  const auto art = nodewise_direction(d, 0, lambda, cfg);
  const auto dec = decompose_error(d, S, beta, eps, fit, art, lambda);
  CHECK(dec.noise == doctest::Approx(0.0));
  CHECK(dec.remainder == doctest::Approx(0.0));
  CHECK(dec.total == doctest::Approx(dec.bias).epsilon(1e-8));
}

TEST_CASE("remainder obeys the weak-signal bound when the event holds") {
  int event_count = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto d = random_std_data(80, 10, 300 + seed);
    const std::vector<Index> S = {0, 1, 2, 3};
    Vector beta = Vector::Zero(10);
    beta[0] = 3.0;
    beta[1] = -3.0;
    beta[2] = 0.15;  // weak
    beta[3] = 0.1;   // weak
    CounterRng rng(SeedSpec{seed, 17});
    Vector eps(80);
    for (Index i = 0; i < 80; ++i) eps[i] = 0.3 * rng.normal();
    d.y = d.X * beta + eps;

    const double lambda = 0.12;
    SolverConfig cfg;
    cfg.kkt_tol = 1e-11;
    const auto fit = fit_lasso(d, lambda, cfg);
    const auto art = nodewise_direction(d, 0, lambda, cfg);
    const auto rep = condition_report(d, S, art, beta, lambda, 0.3);

    bool inside = true;
    for (Index k : fit.active_set) {
      inside = inside && beta[k] != 0.0;
    }
    double max_err = 0.0;
    for (Index k : S) {
      max_err = std::max(max_err, std::abs(fit.beta_hat[k] - beta[k]));
    }
    if (!inside || max_err > rep.g1) continue;
    ++event_count;

    const auto dec = decompose_error(d, S, beta, eps, fit, art, lambda);
    const double bound = 2.0 * rep.K1 * rep.s_tilde * lambda * art.lambda_j /
                         (art.denom / 80.0);
    CHECK(std::abs(dec.remainder) <= bound + 1e-12);
  }
  CHECK(event_count > 0);  // the event is reachable at this scale
}

TEST_CASE("singular support Gram is rejected") {
  auto d = random_std_data(10, 4, 33);
  d.X.col(1) = d.X.col(0);  // duplicated column
  const std::vector<Index> S = {0, 1};
  Vector beta = Vector::Zero(4);
  beta[0] = 1.0;
  beta[1] = 1.0;
  const Vector eps = Vector::Zero(10);
  CHECK_THROWS_AS(oracle_estimator(d, S, beta, eps, 0.1),
                  SingularSupportGramError);
}

TEST_CASE("condition numbers match a direct recomputation") {
  auto d = random_std_data(40, 12, 71);
  const std::vector<Index> S = {1, 3, 8, 10};
  Vector beta = Vector::Zero(12);
  for (Index j : S) beta[j] = 2.0;
  const auto rep = condition_report(d, S, dummy_art(d, 1), beta, 0.2, 1.0);

  const auto s = static_cast<Index>(S.size());
  Matrix Xs(40, s);
  for (Index k = 0; k < s; ++k) Xs.col(k) = d.X.col(S[static_cast<std::size_t>(k)]);
  const Matrix G = Xs.transpose() * Xs / 40.0;
  const Matrix Gi = G.inverse();
  CHECK(std::abs(rep.K1 - Gi.cwiseAbs().rowwise().sum().maxCoeff()) <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  CHECK(std::abs(rep.C_min - eig.eigenvalues().minCoeff()) <= 1e-10);
  double kappa = 0.0;
  for (Index j = 0; j < 12; ++j) {
    if (std::find(S.begin(), S.end(), j) != S.end()) continue;
    const Vector row = (d.X.col(j).transpose() * Xs / 40.0) * Gi;
    kappa = std::max(kappa, row.cwiseAbs().sum());
  }
  CHECK(std::abs(rep.kappa - kappa) <= 1e-10);
  CHECK(rep.K0 == doctest::Approx(d.X.cwiseAbs().maxCoeff()));
}

TEST_CASE("reports serialize to text and JSON") {
  auto d = orthonormal_design(24, 8, 3);
  const std::vector<Index> S = {0, 2};
  Vector beta = Vector::Zero(8);
  beta[0] = 2.0;
  beta[2] = -2.0;
  const auto rep = condition_report(d, S, dummy_art(d, 0), beta, 0.3, 1.0);
  const std::string text = to_text(rep);
  CHECK(text.find("kappa = ") != std::string::npos);
  CHECK(text.find("s_tilde = ") != std::string::npos);
  const std::string json = to_json_string(rep);
  CHECK(json.find("\"K1\"") != std::string::npos);
}
