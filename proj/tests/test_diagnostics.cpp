#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "ptcure/diagnostics.hpp"
#include "ptcure/errors.hpp"
#include "ptcure/table.hpp"

using namespace ptcure;
using doctest::Approx;

namespace {
std::vector<double> ar1(Rng& rng, std::size_t n, double phi) {
  std::vector<double> x(n);
  double v = rng.normal() / std::sqrt(1 - phi * phi);
  for (auto& e : x) e = v = phi * v + rng.normal();
  return x;
}
std::vector<double> white(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& e : x) e = rng.normal();
  return x;
}
}  // namespace

TEST_CASE("autocorrelation: constant, alternating, AR(1)") {
  const std::vector<double> c(50, 3.0);
  const auto a = autocorrelation(c, 5);
  CHECK(a.zero_variance);
  CHECK(a.values == std::vector<double>{1, 0, 0, 0, 0, 0});

  std::vector<double> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
  CHECK(autocorrelation(alt, 2).values[1] == Approx(-1.0).epsilon(0.005));

  Rng rng(61);
  const auto x = ar1(rng, 100000, 0.8);
  const auto r = autocorrelation(x, 3);
  CHECK(r.values[0] == 1.0);
  CHECK(std::abs(r.values[1] - 0.8) < 0.02);
  CHECK_THROWS_AS(autocorrelation(c, 50), ValidationError);
  CHECK_THROWS_AS(autocorrelation(c, 0), ValidationError);
}

TEST_CASE("ess: white noise band, AR(1) ratio, constant flag") {
  Rng rng(67);
  for (int run = 0; run < 3; ++run) {
    const double e = ess(white(rng, 4000)).ess;
    CHECK(e >= 3400);
    CHECK(e <= 4600);
  }
  const auto x = ar1(rng, 100000, 0.8);
  CHECK(std::abs(ess(x).ess / 100000.0 - 0.2 / 1.8) < 0.02);
  const auto c = ess(std::vector<double>(30, 1.0));
  CHECK(c.zero_variance);
  CHECK(c.ess == 30.0);
  CHECK_THROWS_AS(ess(std::vector<double>(9, 1.0)), ValidationError);
  // Antithetic series hit the cap.
  std::vector<double> alt(200);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
  CHECK(ess(alt).ess <= kEssCap * 200.0);
}

TEST_CASE("ess is affine invariant (property)") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = ar1(rng, 500 + rng.below(2000), rng.uniform(-0.5, 0.95));
    const double a = rng.uniform(0.1, 10.0) * (rng.bernoulli(0.5) ? 1 : -1), b = rng.uniform(-100, 100);
    auto y = x;
    for (auto& v : y) v = a * v + b;
    CHECK(ess(y).ess == Approx(ess(x).ess).epsilon(1e-8));
  }
}

TEST_CASE("gelman_rubin: identical chains, separated chains, errors, split") {
  Rng rng(73);
  const auto x = white(rng, 1000);
  CHECK(std::abs(gelman_rubin({x, x, x}) - 1.0) < 1e-9);

  auto y = white(rng, 10000), z = white(rng, 10000);
  for (auto& v : z) v += 5.0;
  CHECK(gelman_rubin({y, z}) > 1.2);

  CHECK_THROWS_AS(gelman_rubin({x}), ValidationError);
  CHECK_THROWS_AS(gelman_rubin({x, white(rng, 999)}), ValidationError);
  CHECK_THROWS_AS(gelman_rubin({std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)}), ValidationError);

  const auto halves = split_chains({x});
  REQUIRE(halves.size() == 2);
  CHECK(halves[0].size() == 500);
  CHECK(halves[1].front() == x[500]);
  std::vector<double> trend(1000);
  std::iota(trend.begin(), trend.end(), 0.0);
  CHECK(gelman_rubin(split_chains({trend})) > 1.5);
}

TEST_CASE("psrf floor and affine invariance (property)") {
  Rng rng(79);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> chains;
    const auto k = 2 + rng.below(5);
    const auto n = 10 + rng.below(300);
    for (std::uint64_t c = 0; c < k; ++c) chains.push_back(ar1(rng, n, 0.5));
    const double r = gelman_rubin(chains);
    CHECK(r >= 1.0 - 1e-6);
    const double a = rng.uniform(0.1, 5.0), b = rng.uniform(-10, 10);
    auto t = chains;
    for (auto& c : t)
      for (auto& v : c) v = a * v + b;
    CHECK(gelman_rubin(t) == Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("histogram conserves counts") {
  Rng rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = white(rng, 1 + rng.below(500));
    const auto h = histogram(x, 50);
    CHECK(h.counts.size() == 50);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == x.size());
  }
  const auto flat = histogram(std::vector<double>(10, 2.0));
  CHECK(flat.counts[0] == 10);
}

TEST_CASE("trace and histogram export") {
  Rng rng(89);
  Eigen::MatrixXd d(10, 3);
  for (auto& v : d.reshaped()) v = rng.normal();
  auto c = fixtures::chain_from(d, 1);
  c.config.burn_in = 100;
  c.config.thin = 5;
  std::stringstream trace;
  write_trace(trace, c);
  const auto t = read_numeric_table(trace);
  REQUIRE(t.rows.size() == 10);
  CHECK(t.header == std::vector<std::string>{"iteration", "theta_0", "eta_1", "eta_2"});
  CHECK(t.rows[0][0] == 105);
  for (int m = 0; m < 10; ++m)
    for (int j = 0; j < 3; ++j) CHECK(t.rows[m][j + 1] == d(m, j));

  std::stringstream hist;
  write_histograms(hist, c);
  std::string line;
  std::getline(hist, line);
  CHECK(line == "parameter,bin,lower,upper,count");
  std::size_t rows = 0, total = 0;
  while (std::getline(hist, line)) {
    ++rows;
    total += std::stoul(line.substr(line.rfind(',') + 1));
  }
  CHECK(rows == 3 * 50);
  CHECK(total == 3 * 10);

  CHECK_THROWS_AS(export_trace(c, "/nonexistent-dir/x_"), ValidationError);
}

TEST_CASE("diagnose: report fields") {
  Rng rng(97);
  std::vector<PosteriorChain> chains;
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd d(400, 2);
    for (auto& v : d.reshaped()) v = rng.normal();
    chains.push_back(fixtures::chain_from(d, 1));
    chains.back().acceptance_rate = 0.1 * (k + 1);
  }
  const auto r = diagnose(chains, 20);
  CHECK(r.n_chains == 3);
  CHECK(r.m0 == 400);
  CHECK(r.acf[0][0] == 1.0);
  CHECK(r.acf[0].size() == 21);
  REQUIRE(r.psrf);
  CHECK_FALSE(r.psrf_split);
  for (double p : *r.psrf) CHECK(p >= 1.0 - 1e-6);
  for (double e : r.ess) CHECK(e <= kEssCap * 1200.0);
  CHECK(r.acceptance_rate == Approx(0.2));
  const auto single = diagnose({chains[0]}, 10);
  CHECK(single.psrf_split);
}
