#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ptcure/dataset.hpp"
#include "ptcure/model.hpp"
#include "ptcure/sampler.hpp"

namespace ptcure {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

/// Plug-in estimates from retained draws. Lower/upper are interpolated order
/// statistics; they need not bracket the mean.
struct FitSummary {
  Eigen::VectorXd theta_mean, eta_mean;
  Eigen::VectorXd theta_sd, eta_sd;
  std::vector<Interval> theta_ci, eta_ci;
  std::vector<double> knots;
  std::vector<double> F_tilde;  // step CDF at the mean eta, per knot
  // Posterior mean of F(s_l) over draws; only filled on request.
  std::optional<std::vector<double>> F_functional_mean;
  double level = 0.95;
  double acceptance_rate = 0.0;
  std::size_t m0 = 0;
  std::size_t n_chains = 1;
};

ModelParams posterior_mean(const PosteriorChain& chain);
// Column standard deviations with an m0 - 1 denominator (0 when m0 == 1).
Eigen::VectorXd posterior_sd(const PosteriorChain& chain);

// Linear interpolation between order statistics: 0-based position p * (m - 1).
double empirical_quantile(std::vector<double> values, double p);
// Quantiles at (1 - level)/2 and (1 + level)/2.
Interval percentile_ci(std::span<const double> draws, double level);

std::vector<double> estimate_F(const Eigen::VectorXd& eta_mean, const MonitoringGrid& grid);
std::vector<double> estimate_survival_curve(const Eigen::VectorXd& theta_mean, const Eigen::VectorXd& eta_mean,
                                            const MonitoringGrid& grid, const Eigen::VectorXd& x);
double estimate_cure(const Eigen::VectorXd& theta_mean, const Eigen::VectorXd& x);

// Stacks the draws of several chains (same dimensions); acceptance is the
// iteration-weighted average.
PosteriorChain pool_chains(const std::vector<PosteriorChain>& chains);

FitSummary summarize(const std::vector<PosteriorChain>& chains, const MonitoringGrid& grid, double level = 0.95,
                     bool functional_mean = false);

}  // namespace ptcure
