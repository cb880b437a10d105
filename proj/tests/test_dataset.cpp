#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ptcure/dataset.hpp"
#include "ptcure/errors.hpp"
#include "ptcure/table.hpp"

using namespace ptcure;
using fixtures::obs;

TEST_CASE("dataset: parse builds grid and knot indices") {
  std::istringstream in("u,delta,z\n0.3,1,0.5\n0.6,0,-1.2\n");
  ColumnMapping m;
  m.covariate_cols = {"z"};
  const auto d = parse_dataset(in, m);
  CHECK(d.size() == 2);
  CHECK(d.dim() == 2);
  CHECK(d.grid().knots() == std::vector<double>{0.3, 0.6});
  CHECK(d.knot_index() == std::vector<std::size_t>{1, 2});
  CHECK(d.observations()[0].x[0] == 1.0);
  CHECK(d.observations()[1].x[1] == -1.2);
}

TEST_CASE("dataset: tab delimiter, comments and custom column names") {
  std::istringstream in("# exported\ntime\tstatus\n2\t1\n\n1\t0\n");
  ColumnMapping m{"time", "status", {}};
  const auto d = parse_dataset(in, m);
  CHECK(d.size() == 2);
  CHECK(d.knot_index() == std::vector<std::size_t>{2, 1});
}

TEST_CASE("dataset: duplicate times collapse to one knot") {
  CurrentStatusDataset d({obs(0.3, 1), obs(0.3, 0)});
  CHECK(d.grid().n0() == 1);
  CHECK(d.knot_index() == std::vector<std::size_t>{1, 1});
}

TEST_CASE("dataset: malformed input is rejected with context") {
  ColumnMapping m;
  SUBCASE("ragged row reports its line") {
    std::istringstream in("u,delta\n1,0\n2\n");
    try {
      parse_dataset(in, m);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("non-numeric cell") {
    std::istringstream in("u,delta\n1,zero\n");
    CHECK_THROWS_AS(parse_dataset(in, m), ParseError);
  }
  SUBCASE("status outside {0,1}") {
    std::istringstream in("u,delta\n1,2\n");
    CHECK_THROWS_AS(parse_dataset(in, m), ValidationError);
  }
  SUBCASE("non-positive time") {
    std::istringstream in("u,delta\n0,1\n");
    CHECK_THROWS_AS(parse_dataset(in, m), ValidationError);
  }
  SUBCASE("empty file") {
    std::istringstream in("u,delta\n");
    CHECK_THROWS_AS(parse_dataset(in, m), ValidationError);
  }
  SUBCASE("missing column") {
    std::istringstream in("t,delta\n1,1\n");
    CHECK_THROWS_AS(parse_dataset(in, m), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/data.csv", m), ValidationError);
  }
}

TEST_CASE("dataset: direct construction checks") {
  CHECK_THROWS_AS(CurrentStatusDataset({}), ValidationError);
  CHECK_THROWS_AS(CurrentStatusDataset({obs(1, 1), obs(2, 0, {1.0})}), ValidationError);
  auto bad = obs(1, 1);
  bad.x[0] = 2.0;
  CHECK_THROWS_AS(CurrentStatusDataset({bad}), ValidationError);
  // Explicit grid allows the empty dataset used for prior-only runs.
  CurrentStatusDataset empty({}, MonitoringGrid({1.0, 2.0}), 2);
  CHECK(empty.empty());
  CHECK(empty.grid().n0() == 2);
  CHECK_THROWS_AS(CurrentStatusDataset({obs(1.5, 1)}, MonitoringGrid({1.0, 2.0}), 1), ValidationError);
}

TEST_CASE("build_grid: sort, dedup, singleton, errors") {
  CHECK(build_grid({0.6, 0.3, 0.3}).knots() == std::vector<double>{0.3, 0.6});
  std::vector<double> ten;
  for (int l = 1; l <= 10; ++l) ten.push_back(0.3 * l);
  const auto g = build_grid(ten);
  CHECK(g.n0() == 10);
  CHECK(g.knot(1) == 0.3);
  CHECK(build_grid({5.0}).n0() == 1);
  CHECK_THROWS_AS(build_grid({}), ValidationError);
  CHECK_THROWS_AS(build_grid({1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(build_grid({0.0}), ValidationError);
}

TEST_CASE("build_grid: idempotent and index_of is consistent (property)") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t;
    const auto n = 1 + rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) t.push_back(std::round(rng.uniform(0.01, 10.0) * 10.0) / 10.0 + 0.1);
    const auto g = build_grid(t);
    CHECK(build_grid(g.knots()) == g);
    for (double u : t) {
      const auto l = g.index_of(u);
      REQUIRE(l >= 1);
      CHECK(g.knot(l) == u);
      CHECK((l == g.n0() || g.knot(l + 1) > u));
    }
    CHECK(g.index_of(g.knot(1) / 2.0) == 0);
  }
}

TEST_CASE("knot_index consistency on random datasets (property)") {
  Rng rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = fixtures::random_instance(rng, 1 + rng.below(20), 1 + rng.below(6), rng.below(3));
    const auto& d = inst.data;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto k = d.knot_index()[i];
      CHECK(d.grid().knot(k) == d.observations()[i].u);
      CHECK((k == d.grid().n0() || d.grid().knot(k + 1) > d.observations()[i].u));
    }
  }
}

TEST_CASE("lung tumour fixture has the eleven reference knots") {
  ColumnMapping m;
  m.covariate_cols = {"env"};
  const auto d = load_dataset(std::string(PTCURE_TEST_DATA_DIR) + "/lung_tumor.csv", m);
  CHECK(d.size() == 144);
  CHECK(d.grid().knots() == std::vector<double>{45, 381, 477, 515, 650, 679, 773, 779, 839, 888, 1008});
}

TEST_CASE("npmle: degenerate inputs") {
  CurrentStatusDataset none({obs(1, 0), obs(2, 0), obs(3, 0)});
  for (double s : npmle_survival(none).values) CHECK(s == 1.0);
  CurrentStatusDataset all({obs(1, 1), obs(2, 1), obs(3, 1)});
  for (double s : npmle_survival(all).values) CHECK(s == 0.0);
}

namespace {
double binomial_ll(const std::vector<double>& F, const std::vector<int>& events, const std::vector<int>& n) {
  double ll = 0.0;
  for (std::size_t l = 0; l < F.size(); ++l) {
    if (events[l] > 0) ll += events[l] * std::log(F[l]);
    if (n[l] - events[l] > 0) ll += (n[l] - events[l]) * std::log(1.0 - F[l]);
  }
  return ll;
}
}  // namespace

TEST_CASE("npmle: pooled fractions match a brute-force monotone grid search") {
  // Five subjects per knot with 3, 1 and 4 events: raw fractions 0.6, 0.2, 0.8.
  const std::vector<int> events{3, 1, 4}, n{5, 5, 5};
  std::vector<Observation> o;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < n[l]; ++i) o.push_back(obs(l + 1.0, i < events[l] ? 1 : 0));
  const auto est = npmle_survival(CurrentStatusDataset(o));
  CHECK(1.0 - est.values[0] == doctest::Approx(0.4));
  CHECK(1.0 - est.values[1] == doctest::Approx(0.4));
  CHECK(1.0 - est.values[2] == doctest::Approx(0.8));

  double best = -1e300;
  std::vector<double> arg;
  for (int a = 1; a < 100; ++a)
    for (int b = a; b < 100; ++b)
      for (int c = b; c < 100; ++c) {
        const std::vector<double> F{a / 100.0, b / 100.0, c / 100.0};
        const double ll = binomial_ll(F, events, n);
        if (ll > best) best = ll, arg = F;
      }
  for (int l = 0; l < 3; ++l) CHECK(1.0 - est.values[l] == doctest::Approx(arg[l]).epsilon(0.011));
}

TEST_CASE("npmle: monotone in [0,1], and equal to raw fractions when already increasing (property)") {
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = fixtures::random_instance(rng, 5 + rng.below(40), 1 + rng.below(8), 0);
    const auto est = npmle_survival(inst.data);
    for (std::size_t l = 0; l < est.values.size(); ++l) {
      CHECK(est.values[l] >= 0.0);
      CHECK(est.values[l] <= 1.0);
      if (l) CHECK(est.values[l] <= est.values[l - 1] + 1e-15);
    }
  }
  // fractions 1/4, 2/4, 3/4
  std::vector<Observation> o;
  for (int l = 1; l <= 3; ++l)
    for (int i = 0; i < 4; ++i) o.push_back(obs(l, i < l ? 1 : 0));
  const auto est = npmle_survival(CurrentStatusDataset(o));
  CHECK(est.values == std::vector<double>{0.75, 0.5, 0.25});
}

TEST_CASE("isotonic regression pools violators with weights") {
  const auto fit = isotonic_regression({1.0, 3.0, 2.0, 4.0}, {1.0, 1.0, 3.0, 1.0});
  CHECK(fit[0] == doctest::Approx(1.0));
  CHECK(fit[1] == doctest::Approx(2.25));
  CHECK(fit[2] == doctest::Approx(2.25));
  CHECK(fit[3] == doctest::Approx(4.0));
}

TEST_CASE("kaplan_meier: product-limit steps") {
  const auto km = kaplan_meier({1, 2, 2, 3, 4}, {1, 1, 0, 0, 1});
  CHECK(km.knots == std::vector<double>{1, 2, 3, 4});
  CHECK(km.values[0] == doctest::Approx(0.8));
  CHECK(km.values[1] == doctest::Approx(0.6));
  CHECK(km.values[2] == doctest::Approx(0.6));
  CHECK(km.values[3] == doctest::Approx(0.0));
}

TEST_CASE("write_step_estimate round-trips through the table reader") {
  StepEstimate est{{0.5, 1.5}, {0.9, 1.0 / 3.0}};
  std::ostringstream out;
  write_step_estimate(out, est, "survival");
  std::istringstream in(out.str());
  const auto t = read_numeric_table(in);
  CHECK(t.header == std::vector<std::string>{"knot", "survival"});
  const auto k = t.column("knot"), v = t.column("survival");
  REQUIRE(t.rows.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(t.rows[r][k] == est.knots[r]);
    CHECK(t.rows[r][v] == est.values[r]);
  }
}
