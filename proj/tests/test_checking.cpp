#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "ptcure/checking.hpp"
#include "ptcure/errors.hpp"

using namespace ptcure;
using doctest::Approx;
using fixtures::obs;

namespace {
// One observation with delta = 0 and theta = log 2, so P = exp(-2F) and a
// draw with eta = log(-log(1 - F)) hits any survival probability above e^{-2}.
const double kTheta = std::log(2.0);
double eta_for_survival(double p) {
  const double F = -std::log(p) / 2.0;
  return std::log(-std::log1p(-F));   // F = 1 - exp(-e^eta)
}
}  // namespace

TEST_CASE("cpo: harmonic mean cases") {
  CurrentStatusDataset d({obs(1.0, 0)});
  Eigen::MatrixXd draws(2, 2);
  draws << kTheta, eta_for_survival(0.5), kTheta, eta_for_survival(0.25);
  const auto r = cpo(fixtures::chain_from(draws, 1), d);
  CHECK(r.cpo[0] == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.zero_probability.empty());

  const auto single = cpo(fixtures::chain_from(draws.topRows(1), 1), d);
  CHECK(single.cpo[0] == Approx(0.5).epsilon(1e-12));
  Eigen::MatrixXd same(5, 2);
  same.rowwise() = draws.row(1);
  CHECK(cpo(fixtures::chain_from(same, 1), d).cpo[0] == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("cpo: zero probabilities degrade to a flagged zero") {
  CurrentStatusDataset d({obs(1.0, 1), obs(1.0, 0)});
  Eigen::MatrixXd draws(2, 2);
  draws << 0.0, -800.0, 0.0, 0.0;  // first draw: F = 0, so P(delta = 1) = 0
  const auto r = cpo(fixtures::chain_from(draws, 1), d);
  CHECK(r.cpo[0] == 0.0);
  CHECK(r.zero_probability == std::vector<std::size_t>{0});
  CHECK(r.cpo[1] > 0.0);
  CHECK(std::isinf(lpml(r.cpo)));
  // The same draw has infinite deviance, which DIC reports as a numerical failure.
  CHECK_THROWS_AS(model_check(fixtures::chain_from(draws, 1), d), NumericalError);
}

TEST_CASE("lpml and scaled_cpo arithmetic") {
  CHECK(lpml({1.0, 1.0, 1.0}) == 0.0);
  CHECK(lpml({0.5, 0.25}) == Approx(std::log(0.125)));
  CHECK(std::isinf(lpml({0.5, 0.0})));
  CHECK(scaled_cpo({0.2, 0.4}) == std::vector<double>{0.5, 1.0});
  for (double v : scaled_cpo({0.3, 0.3, 0.3})) CHECK(v == 1.0);
  CHECK_THROWS_AS(scaled_cpo({0.0, 0.0}), ValidationError);
  CHECK(count_outliers({1.0, 0.005, 0.02, 0.0099}) == 2);
}

TEST_CASE("dic: identical draws, arithmetic, non-finite draw") {
  CurrentStatusDataset d({obs(1.0, 0), obs(2.0, 1)});
  Eigen::MatrixXd same(4, 3);
  same.rowwise() = Eigen::RowVector3d(0.2, -0.5, 0.1);
  const auto r = dic(fixtures::chain_from(same, 1), d);
  CHECK(r.dic == Approx(r.dbar));
  CHECK(r.dbar == Approx(r.dhat));
  CHECK(r.p_d == Approx(0.0).scale(1.0));

  Eigen::MatrixXd bad = same;
  bad(2, 1) = -900.0;
  bad(2, 2) = -900.0;
  try {
    dic(fixtures::chain_from(bad, 1), d);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("dic: two-draw arithmetic against a direct computation") {
  CurrentStatusDataset d({obs(1.0, 0), obs(2.0, 1)});
  Eigen::MatrixXd draws(2, 3);
  draws << 0.1, -0.5, 0.3, -0.4, 0.2, -0.1;
  const auto r = dic(fixtures::chain_from(draws, 1), d);
  const auto o = oracle::dic(fixtures::rows(draws), 1, d.grid().knots(), fixtures::to_oracle(d));
  CHECK(r.dbar == Approx(o.dbar).epsilon(1e-12));
  CHECK(r.dic == Approx(2 * r.dbar - r.dhat).epsilon(1e-14));
  CHECK(r.p_d == Approx(r.dbar - r.dhat).epsilon(1e-14));
}

TEST_CASE("checking invariants on random chains (property)") {
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = fixtures::random_instance(rng, 1 + rng.below(5), 1 + rng.below(4), rng.below(2));
    const auto& data = inst.data;
    const auto dim = inst.theta.size() + inst.eta.size();
    Eigen::MatrixXd draws(1 + rng.below(20), dim);
    for (Eigen::Index m = 0; m < draws.rows(); ++m) {
      draws.row(m).head(inst.theta.size()) = inst.theta.transpose();
      draws.row(m).tail(inst.eta.size()) = inst.eta.transpose();
      for (Eigen::Index j = 0; j < dim; ++j) draws(m, j) += 0.3 * rng.normal();
    }
    const auto chain = fixtures::chain_from(draws, static_cast<std::size_t>(inst.theta.size()));
    const auto rep = model_check(chain, data);
    // Harmonic mean bounds.
    for (std::size_t i = 0; i < data.size(); ++i) {
      double lo = 1.0, hi = 0.0;
      for (std::size_t m = 0; m < chain.m0(); ++m) {
        const double p = interval_probability(chain.draw(m), data.grid(), data.observations()[i]);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      CHECK(rep.cpo[i] >= lo * (1 - 1e-12));
      CHECK(rep.cpo[i] <= hi * (1 + 1e-12));
    }
    CHECK(*std::max_element(rep.scaled_cpo.begin(), rep.scaled_cpo.end()) == 1.0);
    // Draw order does not matter.
    Eigen::MatrixXd rev = draws.colwise().reverse();
    const auto rep2 = model_check(fixtures::chain_from(rev, chain.dim_theta), data);
    CHECK(rep2.lpml == Approx(rep.lpml).epsilon(1e-12));
    CHECK(rep2.dic == Approx(rep.dic).epsilon(1e-12));
  }
}

TEST_CASE("point-mass chain: LPML is the plug-in log likelihood") {
  Rng rng(59);
  auto inst = fixtures::random_instance(rng, 5, 3, 1);
  Eigen::MatrixXd draws(6, inst.theta.size() + inst.eta.size());
  for (Eigen::Index m = 0; m < draws.rows(); ++m) draws.row(m) << inst.theta.transpose(), inst.eta.transpose();
  const auto rep = model_check(fixtures::chain_from(draws, 2), inst.data);
  CHECK(rep.lpml == Approx(log_likelihood({inst.theta, inst.eta}, inst.data)).epsilon(1e-12));
}
