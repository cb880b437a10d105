#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "ptcure/errors.hpp"
#include "ptcure/model.hpp"

using namespace ptcure;
using doctest::Approx;
using fixtures::obs;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("ar1_covariance: entries, SPD, errors") {
  const auto a = ar1_covariance(2, 0.3, 1.0);
  CHECK(a(0, 1) == Approx(0.3));
  CHECK(a(1, 1) == 1.0);
  CHECK(ar1_covariance(10, 0.3, 1.0)(0, 2) == Approx(0.09));
  const auto b = ar1_covariance(3, 0.5, 0.1);
  Eigen::Matrix3d expect;
  expect << 0.1, 0.05, 0.025, 0.05, 0.1, 0.05, 0.025, 0.05, 0.1;
  CHECK((b - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b).eigenvalues().minCoeff() > 0.0);
  CHECK_THROWS_AS(ar1_covariance(3, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ar1_covariance(3, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ar1_covariance(0, 0.3, 1.0), ValidationError);
  CHECK_THROWS_AS(ar1_covariance(3, 0.3, 0.0), ValidationError);
}

TEST_CASE("ar1_covariance: positive definite up to n0 = 50 (property)") {
  for (double rho : {0.01, 0.3, 0.7, 0.95, 0.99})
    for (std::size_t n : {1u, 2u, 7u, 20u, 50u})
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ar1_covariance(n, rho, 1.0)).eigenvalues().minCoeff() > 0);
}

TEST_CASE("AR(1) closed-form quadratic form and log-det match a dense Cholesky") {
  Rng rng(17);
  for (std::size_t n : {1u, 2u, 3u, 11u, 30u}) {
    for (double rho : {0.1, 0.3, 0.8}) {
      const double scale = rng.uniform(0.05, 3.0);
      const auto cov = EtaCovariance::ar1(scale, rho);
      const auto dense = ar1_covariance(n, rho, scale);
      Eigen::VectorXd d(static_cast<Eigen::Index>(n));
      for (auto& v : d) v = rng.normal();
      const Eigen::LLT<Eigen::MatrixXd> llt(dense);
      const double quad = d.dot(llt.solve(d));
      const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      CHECK(cov.quad_form(d) == Approx(quad).epsilon(1e-10));
      CHECK(cov.log_det(n) == Approx(logdet).epsilon(1e-10));
      const auto explicit_cov = EtaCovariance::dense(dense);
      CHECK(explicit_cov.quad_form(d) == Approx(quad).epsilon(1e-10));
      CHECK(explicit_cov.log_det(n) == Approx(logdet).epsilon(1e-10));
    }
  }
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(EtaCovariance::dense(indefinite), ValidationError);
}

TEST_CASE("log1mexp is accurate on both branches") {
  for (double a : {1e-12, 1e-5, 0.1, 0.69, 0.7, 2.0, 30.0, 700.0}) {
    const double ref = a < 1.0 ? std::log(-std::expm1(-a)) : std::log1p(-std::exp(-a));
    CHECK(log1mexp(a) == Approx(ref).epsilon(1e-14));
  }
  CHECK(std::isinf(log1mexp(0.0)));
}

TEST_CASE("step_cdf: closed forms and limits") {
  const MonitoringGrid g1({1.0});
  CHECK(step_cdf(vec({std::log(-std::log(0.5))}), g1, 1.0) == Approx(0.5));
  CHECK(step_cdf(vec({3.0}), g1, 0.5) == 0.0);
  const MonitoringGrid g2({1.0, 2.0});
  CHECK(step_cdf(vec({0.0, 0.0}), g2, 2.5) == Approx(1.0 - std::exp(-2.0)));
  CHECK(step_cdf(vec({0.0, 0.0}), g2, 2.5) == Approx(0.864665).epsilon(1e-6));
  const auto at = step_cdf_at_knots(vec({0.0, 0.0}));
  CHECK(at[0] == Approx(1.0 - std::exp(-1.0)));
  // Large eta must not overflow to a NaN.
  const double big = step_cdf(vec({30.0, 30.0}), g2, 2.0);
  CHECK(big == 1.0);
  const double tiny = step_cdf(vec({-30.0, -30.0}), g2, 2.0);
  CHECK(tiny == Approx(2.0 * std::exp(-30.0)).epsilon(1e-9));
}

TEST_CASE("step_cdf is monotone in t and below 1 for moderate eta (property)") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = fixtures::random_instance(rng, 6, 1 + rng.below(6), 0);
    const auto& g = inst.data.grid();
    double prev = -1.0;
    for (double t = 0.0; t <= g.knots().back() + 1.0; t += 0.05) {
      const double f = step_cdf(inst.eta, g, t);
      CHECK(f >= prev);
      CHECK(f < 1.0);
      CHECK(f == Approx(oracle::F(fixtures::to_std(inst.eta), g.knots(), t)).epsilon(1e-12));
      prev = f;
    }
  }
}

TEST_CASE("pop_survival, cure_fraction and interval_probability") {
  const MonitoringGrid g({1.0, 2.0});
  ModelParams p{vec({0.0}), vec({0.0, 0.0})};
  const auto x = vec({1.0});
  CHECK(pop_survival(p, g, x, 0.5) == 1.0);
  CHECK(pop_survival(p, g, x, 2.0) == Approx(0.421194).epsilon(1e-6));
  CHECK(cure_fraction(vec({0.0}), x) == Approx(0.367879).epsilon(1e-6));
  CHECK(cure_fraction(vec({-0.2702, 0.8102}), vec({1, 0})) == Approx(0.4662).epsilon(1e-4));
  CHECK(cure_fraction(vec({-0.2702, 0.8102}), vec({1, 1})) == Approx(0.1798).epsilon(1e-3));
  CHECK(cure_fraction(vec({-1.7986, 0, 0, 0, 0}), vec({1, 0, 0, 0, 0})) == Approx(0.8474).epsilon(1e-4));
  CHECK_THROWS_AS(cure_fraction(vec({0.0, 1.0}), x), ValidationError);

  ModelParams half{vec({0.0}), vec({std::log(-std::log(0.5))})};
  const MonitoringGrid g1({1.0});
  CHECK(interval_probability(half, g1, obs(1.0, 1)) == Approx(0.393469).epsilon(1e-6));
  CHECK(interval_probability(half, g1, obs(0.5, 0)) == 1.0);
  CHECK(interval_probability(half, g1, obs(0.5, 1)) == 0.0);
}

TEST_CASE("survival invariants on random parameters (property)") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = fixtures::random_instance(rng, 5, 1 + rng.below(5), 1 + rng.below(2));
    const ModelParams p{inst.theta, inst.eta};
    const auto& g = inst.data.grid();
    for (const auto& o : inst.data.observations()) {
      auto other = o;
      other.delta = 1 - o.delta;
      CHECK(interval_probability(p, g, o) + interval_probability(p, g, other) == Approx(1.0).epsilon(1e-14));
      const double cure = cure_fraction(p.theta, o.x);
      double prev = 1.0;
      for (double t : g.knots()) {
        const double s = pop_survival(p, g, o.x, t);
        CHECK(s <= prev);
        CHECK(s >= cure);
        CHECK(s == Approx(std::exp(-std::exp(p.theta.dot(o.x)) * step_cdf(p.eta, g, t))).epsilon(1e-14));
        prev = s;
      }
    }
  }
}

TEST_CASE("log_likelihood: small closed forms") {
  CurrentStatusDataset empty({}, MonitoringGrid({1.0}), 1);
  ModelParams p{vec({0.3}), vec({0.1})};
  CHECK(log_likelihood(p, empty) == 0.0);
  CurrentStatusDataset one({obs(1.0, 0)});
  ModelParams half{vec({0.0}), vec({std::log(-std::log(0.5))})};
  CHECK(log_likelihood(half, one) == Approx(-0.5));
  CHECK_THROWS_AS(log_likelihood(ModelParams{vec({0.0, 1.0}), vec({0.0})}, one), ValidationError);
}

TEST_CASE("log_likelihood matches the scalar oracle on a 3-observation toy") {
  CurrentStatusDataset d({obs(0.5, 1, {1.0}), obs(1.0, 0, {-0.5}), obs(2.0, 1, {0.2})});
  ModelParams p{vec({0.2, -0.7}), vec({-1.0, 0.3, -0.4})};
  const double ref = oracle::loglik(fixtures::to_std(p.theta), fixtures::to_std(p.eta), d.grid().knots(),
                                    fixtures::to_oracle(d));
  CHECK(std::abs(log_likelihood(p, d) - ref) < 1e-12);
}

TEST_CASE("log_likelihood is additive over random splits (property)") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = fixtures::random_instance(rng, 10, 3, 2);
    const ModelParams p{inst.theta, inst.eta};
    std::vector<Observation> a, b;
    for (const auto& o : inst.data.observations()) (rng.bernoulli(0.5) ? a : b).push_back(o);
    const auto& g = inst.data.grid();
    const CurrentStatusDataset da(a, g, 3), db(b, g, 3);
    CHECK(log_likelihood(p, inst.data) == Approx(log_likelihood(p, da) + log_likelihood(p, db)).epsilon(1e-12));
  }
}

TEST_CASE("log_prior: closed forms") {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  PriorSpec prior;
  prior.tau = vec({0.5});
  prior.sigma_theta_diag = vec({1.0});
  prior.mu = vec({-0.2});
  prior.eta_cov = EtaCovariance::dense(Eigen::MatrixXd::Identity(1, 1));
  CHECK(log_prior({vec({1.5}), vec({-0.2})}, prior) == Approx(-log2pi - 0.5));
  CHECK(log_prior(prior.mean(), prior) == Approx(-log2pi));

  PriorSpec p2;
  p2.tau = vec({0.0, 1.0});
  p2.sigma_theta_diag = vec({4.0, 0.25});
  p2.mu = vec({0.0, 0.0, 0.0});
  p2.eta_cov = EtaCovariance::ar1(0.5, 0.3);
  const double expect = -0.5 * (2 * log2pi + std::log(4.0 * 0.25)) -
                        0.5 * (3 * log2pi + p2.eta_cov.log_det(3));
  CHECK(log_prior(p2.mean(), p2) == Approx(expect).epsilon(1e-12));
  // The explicit-matrix form of the same prior agrees.
  PriorSpec p3 = p2;
  p3.eta_cov = EtaCovariance::dense(ar1_covariance(3, 0.3, 0.5));
  const ModelParams q{vec({0.3, 0.1}), vec({1.0, -2.0, 0.5})};
  CHECK(log_prior(q, p2) == Approx(log_prior(q, p3)).epsilon(1e-12));
}

TEST_CASE("prior validation") {
  PriorSpec p;
  p.tau = vec({0.0});
  p.sigma_theta_diag = vec({0.0});
  p.mu = vec({0.0});
  CHECK_THROWS_AS(p.validate(1, 1), ValidationError);
  p.sigma_theta_diag = vec({1.0});
  CHECK_NOTHROW(p.validate(1, 1));
  CHECK_THROWS_AS(p.validate(2, 1), ValidationError);
  CHECK_THROWS_AS(p.validate(1, 2), ValidationError);
  p.eta_cov = EtaCovariance::dense(Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(p.validate(1, 1), ValidationError);
}

TEST_CASE("log_posterior: additivity, prior recovery, flat prior") {
  CurrentStatusDataset d({obs(0.5, 1, {1.0}), obs(1.0, 0, {-0.5}), obs(2.0, 1, {0.2})});
  PriorSpec prior;
  prior.tau = vec({0.0, 0.0});
  prior.sigma_theta_diag = vec({1e4, 1e4});
  prior.mu = vec({0.0, 0.0, 0.0});
  prior.eta_cov = EtaCovariance::ar1(1e4, 0.3);
  const ModelParams p{vec({0.2, -0.7}), vec({-1.0, 0.3, -0.4})};
  CHECK(log_posterior(p, d, prior) == Approx(log_prior(p, prior) + log_likelihood(p, d)).epsilon(1e-14));
  const double at_mean = log_prior(prior.mean(), prior);
  CHECK(std::abs(log_posterior(p, d, prior) - (log_likelihood(p, d) + at_mean)) < 1e-2);

  CurrentStatusDataset empty({}, d.grid(), 2);
  CHECK(log_posterior(p, empty, prior) == log_prior(p, prior));

  const LogPosterior lp(d, prior);
  CHECK(lp(p.flat()) == Approx(log_posterior(p, d, prior)).epsilon(1e-13));
  CHECK(lp.dim() == 5);
}

TEST_CASE("finite-difference gradient is stable across step sizes (smoothness)") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = fixtures::random_instance(rng, 8, 3, 1);
    PriorSpec prior;
    prior.tau = Eigen::VectorXd::Zero(2);
    prior.sigma_theta_diag = Eigen::VectorXd::Ones(2);
    prior.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.data.grid().n0()));
    const LogPosterior lp(inst.data, prior);
    const ModelParams p{inst.theta, inst.eta};
    const Eigen::VectorXd x = p.flat();
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      auto grad = [&](double rel) {
        Eigen::VectorXd a = x, b = x;
        const double h = rel * (1.0 + std::abs(x[j]));
        a[j] += h;
        b[j] -= h;
        return (lp(a) - lp(b)) / (2.0 * h);
      };
      const double g4 = grad(1e-4), g5 = grad(1e-5);
      CHECK(std::abs(g4 - g5) <= 1e-3 * std::max(1.0, std::abs(g5)));
    }
  }
}

TEST_CASE("ModelParams flat round trip") {
  const ModelParams p{vec({1, 2}), vec({3, 4, 5})};
  const auto q = ModelParams::from_flat(p.flat(), 2);
  CHECK(q.theta == p.theta);
  CHECK(q.eta == p.eta);
}
