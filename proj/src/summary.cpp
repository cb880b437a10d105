#include "ptcure/summary.hpp"

#include <algorithm>
#include <cmath>

#include "ptcure/errors.hpp"

namespace ptcure {

ModelParams posterior_mean(const PosteriorChain& chain) {
  if (chain.m0() == 0) throw ValidationError("posterior_mean: chain has no draws");
  return ModelParams::from_flat(chain.draws.colwise().mean().transpose(), chain.dim_theta);
}

Eigen::VectorXd posterior_sd(const PosteriorChain& chain) {
  const auto m = chain.draws.rows();
  if (m == 0) throw ValidationError("posterior_sd: chain has no draws");
  if (m == 1) return Eigen::VectorXd::Zero(chain.draws.cols());
  const Eigen::RowVectorXd mean = chain.draws.colwise().mean();
  const Eigen::MatrixXd centered = chain.draws.rowwise() - mean;
  return (centered.colwise().squaredNorm().transpose() / static_cast<double>(m - 1)).cwiseSqrt();
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Interval percentile_ci(std::span<const double> draws, double level) {
  if (draws.empty()) throw ValidationError("percentile_ci: no draws");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("percentile_ci: level must lie in (0,1)");
  std::vector<double> v(draws.begin(), draws.end());
  const double tail = 0.5 * (1.0 - level);
  return {empirical_quantile(v, tail), empirical_quantile(v, 1.0 - tail)};
}

std::vector<double> estimate_F(const Eigen::VectorXd& eta_mean, const MonitoringGrid& grid) {
  if (static_cast<std::size_t>(eta_mean.size()) != grid.n0()) throw ValidationError("estimate_F: eta length differs from grid");
  return step_cdf_at_knots(eta_mean);
}

std::vector<double> estimate_survival_curve(const Eigen::VectorXd& theta_mean, const Eigen::VectorXd& eta_mean,
                                            const MonitoringGrid& grid, const Eigen::VectorXd& x) {
  if (theta_mean.size() != x.size()) throw ValidationError("estimate_survival_curve: covariate dimension mismatch");
  const double beta = std::exp(theta_mean.dot(x));
  auto curve = estimate_F(eta_mean, grid);
  for (double& v : curve) v = std::exp(-beta * v);
  return curve;
}

double estimate_cure(const Eigen::VectorXd& theta_mean, const Eigen::VectorXd& x) {
  return cure_fraction(theta_mean, x);
}

PosteriorChain pool_chains(const std::vector<PosteriorChain>& chains) {
  if (chains.empty()) throw ValidationError("pool_chains: no chains");
  PosteriorChain pooled = chains.front();
  Eigen::Index rows = 0;
  std::size_t accepted = 0, iterations = 0;
  for (const auto& c : chains) {
    if (c.draws.cols() != pooled.draws.cols() || c.dim_theta != pooled.dim_theta)
      throw ValidationError("pool_chains: chains have different dimensions");
    rows += c.draws.rows();
    accepted += c.accept_count;
    iterations += c.config.iterations;
  }
  pooled.draws.resize(rows, chains.front().draws.cols());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    pooled.draws.middleRows(at, c.draws.rows()) = c.draws;
    at += c.draws.rows();
  }
  pooled.accept_count = accepted;
  pooled.acceptance_rate = iterations ? static_cast<double>(accepted) / static_cast<double>(iterations) : 0.0;
  return pooled;
}

FitSummary summarize(const std::vector<PosteriorChain>& chains, const MonitoringGrid& grid, double level,
                     bool functional_mean) {
  const PosteriorChain pooled = pool_chains(chains);
  if (pooled.m0() == 0) throw ValidationError("summarize: no draws");
  if (pooled.n0() != grid.n0()) throw ValidationError("summarize: chain and grid disagree on n0");
  FitSummary s;
  const ModelParams mean = posterior_mean(pooled);
  const Eigen::VectorXd sd = posterior_sd(pooled);
  const auto k = static_cast<Eigen::Index>(pooled.dim_theta);
  s.theta_mean = mean.theta;
  s.eta_mean = mean.eta;
  s.theta_sd = sd.head(k);
  s.eta_sd = sd.tail(sd.size() - k);
  for (Eigen::Index j = 0; j < pooled.draws.cols(); ++j) {
    const Eigen::VectorXd col = pooled.draws.col(j);
    const Interval ci = percentile_ci(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), level);
    (j < k ? s.theta_ci : s.eta_ci).push_back(ci);
  }
  s.knots = grid.knots();
  s.F_tilde = estimate_F(s.eta_mean, grid);
  if (functional_mean) {
    std::vector<double> acc(grid.n0(), 0.0);
    for (std::size_t m = 0; m < pooled.m0(); ++m) {
      const auto f = step_cdf_at_knots(pooled.draws.row(static_cast<Eigen::Index>(m)).tail(pooled.draws.cols() - k).transpose());
      for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += f[l];
    }
    for (double& v : acc) v /= static_cast<double>(pooled.m0());
    s.F_functional_mean = std::move(acc);
  }
  s.level = level;
  s.acceptance_rate = pooled.acceptance_rate;
  s.m0 = pooled.m0();
  s.n_chains = chains.size();
  return s;
}

}  // namespace ptcure
