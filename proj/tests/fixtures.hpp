#pragma once

#include <vector>

#include <Eigen/Dense>

#include "oracle.hpp"
#include "ptcure/dataset.hpp"
#include "ptcure/rng.hpp"
#include "ptcure/sampler.hpp"

namespace fixtures {

inline ptcure::Observation obs(double u, int delta, std::vector<double> covariates = {}) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(covariates.size() + 1));
  x[0] = 1.0;
  for (std::size_t j = 0; j < covariates.size(); ++j) x[static_cast<Eigen::Index>(j + 1)] = covariates[j];
  return {u, delta, x};
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline std::vector<oracle::Obs> to_oracle(const ptcure::CurrentStatusDataset& d) {
  std::vector<oracle::Obs> out;
  for (const auto& o : d.observations()) out.push_back({o.u, o.delta, to_std(o.x)});
  return out;
}

// Random small instance: n subjects, n0 knots drawn from a pool, k covariates.
struct Instance {
  ptcure::CurrentStatusDataset data;
  Eigen::VectorXd theta, eta;
};

inline Instance random_instance(ptcure::Rng& rng, std::size_t n, std::size_t n0, std::size_t k) {
  std::vector<double> knots;
  double t = 0.0;
  for (std::size_t l = 0; l < n0; ++l) knots.push_back(t += rng.uniform(0.1, 2.0));
  std::vector<ptcure::Observation> o;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> cov;
    for (std::size_t j = 0; j < k; ++j) cov.push_back(rng.normal());
    o.push_back(obs(knots[static_cast<std::size_t>(rng.below(n0))], rng.bernoulli(0.5) ? 1 : 0, cov));
  }
  // Every knot must be used for the grid to keep n0 entries.
  for (std::size_t l = 0; l < n0 && l < n; ++l) o[l].u = knots[l];
  ptcure::CurrentStatusDataset data(std::move(o));
  Eigen::VectorXd theta(static_cast<Eigen::Index>(k + 1)), eta(static_cast<Eigen::Index>(data.grid().n0()));
  for (auto& v : theta) v = rng.uniform(-1.5, 1.5);
  for (auto& v : eta) v = rng.uniform(-3.0, 1.5);
  return {std::move(data), theta, eta};
}

inline ptcure::PosteriorChain chain_from(const Eigen::MatrixXd& draws, std::size_t dim_theta) {
  ptcure::PosteriorChain c;
  c.draws = draws;
  c.dim_theta = dim_theta;
  c.config.iterations = static_cast<std::size_t>(draws.rows());
  c.config.burn_in = 0;
  c.config.thin = 1;
  return c;
}

inline std::vector<std::vector<double>> rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_std(m.row(r).transpose()));
  return out;
}

}  // namespace fixtures
