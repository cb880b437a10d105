#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ptcure/dataset.hpp"

namespace ptcure {

/// Regression coefficients theta (intercept first) and step-function
/// parameters eta, eta_l = log(-log r_l) with r_l the conditional survival
/// ratio across knot l. The sampler walks over the stacked vector (theta, eta).
struct ModelParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd eta;

  Eigen::VectorXd flat() const;
  static ModelParams from_flat(const Eigen::VectorXd& flat, std::size_t dim_theta);
};

// scale * rho^|i-j|.
Eigen::MatrixXd ar1_covariance(std::size_t n0, double rho, double scale);

/// Covariance of the eta prior: either scale * AR(1)(rho) of whatever size the
/// grid needs, or an explicit SPD matrix factorised once at construction.
class EtaCovariance {
 public:
  static EtaCovariance ar1(double scale, double rho);
  static EtaCovariance dense(const Eigen::MatrixXd& cov);

  bool is_ar1() const noexcept { return ar1_; }
  double scale() const noexcept { return scale_; }
  double rho() const noexcept { return rho_; }
  // Explicit matrices have a fixed size; AR(1) reports 0.
  std::size_t fixed_size() const noexcept { return static_cast<std::size_t>(dense_.rows()); }

  Eigen::MatrixXd matrix(std::size_t n0) const;
  // d' Sigma^{-1} d. AR(1) uses the closed-form tridiagonal inverse.
  double quad_form(const Eigen::VectorXd& d) const;
  double log_det(std::size_t n0) const;

 private:
  EtaCovariance() = default;
  bool ar1_ = true;
  double scale_ = 1.0;
  double rho_ = 0.3;
  Eigen::MatrixXd dense_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double dense_log_det_ = 0.0;
};

/// theta ~ N(tau, diag(sigma_theta_diag)), eta ~ N(mu, eta_cov), independent.
struct PriorSpec {
  Eigen::VectorXd tau;
  Eigen::VectorXd sigma_theta_diag;  // variances
  Eigen::VectorXd mu;
  EtaCovariance eta_cov = EtaCovariance::ar1(1.0, 0.3);

  // Throws ValidationError on wrong lengths, non-positive variances or
  // non-finite means.
  void validate(std::size_t dim_theta, std::size_t n0) const;
  ModelParams mean() const { return {tau, mu}; }
};

// log(1 - exp(-a)) for a >= 0, branch split at log 2; -inf at a == 0.
double log1mexp(double a) noexcept;

// log of e^{eta_1} + ... + e^{eta_l} for l = 1..n0 (cumulative baseline hazard
// at each knot), accumulated in log-sum-exp form.
std::vector<double> log_cumulative_hazard(const Eigen::VectorXd& eta);

// F_s(t) = 1 - exp(-sum_{l: s_l <= t} e^{eta_l}).
double step_cdf(const Eigen::VectorXd& eta, const MonitoringGrid& grid, double t);
std::vector<double> step_cdf_at_knots(const Eigen::VectorXd& eta);

double pop_survival(const ModelParams& params, const MonitoringGrid& grid, const Eigen::VectorXd& x, double t);
double cure_fraction(const Eigen::VectorXd& theta, const Eigen::VectorXd& x);

// P(T in (0,u]) when delta = 1, P(T > u) when delta = 0.
double interval_probability(const ModelParams& params, const MonitoringGrid& grid, const Observation& obs);
double log_interval_probability(const ModelParams& params, const MonitoringGrid& grid, const Observation& obs);

double log_likelihood(const ModelParams& params, const CurrentStatusDataset& data);
// Normal log densities with normalising constants.
double log_prior(const ModelParams& params, const PriorSpec& prior);
double log_posterior(const ModelParams& params, const CurrentStatusDataset& data, const PriorSpec& prior);

/// Unnormalised log posterior over stacked (theta, eta) vectors, bound to one
/// dataset and prior. Both must outlive this object.
class LogPosterior {
 public:
  LogPosterior(const CurrentStatusDataset& data, const PriorSpec& prior);

  double operator()(const Eigen::VectorXd& flat) const;
  double log_likelihood(const Eigen::VectorXd& flat) const;
  double log_prior(const Eigen::VectorXd& flat) const;

  std::size_t dim() const noexcept { return dim_theta_ + n0_; }
  std::size_t dim_theta() const noexcept { return dim_theta_; }
  std::size_t n0() const noexcept { return n0_; }
  const CurrentStatusDataset& data() const noexcept { return *data_; }
  const PriorSpec& prior() const noexcept { return *prior_; }

 private:
  const CurrentStatusDataset* data_;
  const PriorSpec* prior_;
  std::size_t dim_theta_;
  std::size_t n0_;
  double theta_log_norm_;
  double eta_log_norm_;
};

}  // namespace ptcure
