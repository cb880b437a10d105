#include "ptcure/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ptcure/errors.hpp"

namespace ptcure {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double log_add_exp(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

void check_dims(const ModelParams& params, std::size_t dim_theta, std::size_t n0) {
  if (static_cast<std::size_t>(params.theta.size()) != dim_theta)
    throw ValidationError("theta has length " + std::to_string(params.theta.size()) + ", expected " +
                          std::to_string(dim_theta));
  if (static_cast<std::size_t>(params.eta.size()) != n0)
    throw ValidationError("eta has length " + std::to_string(params.eta.size()) + ", expected " +
                          std::to_string(n0));
}

void check_x(const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
  if (theta.size() != x.size())
    throw ValidationError("covariate vector has length " + std::to_string(x.size()) + ", expected " +
                          std::to_string(theta.size()));
}

// log F at knot index l (1-based), -inf for l == 0.
double log_cdf_from_hazard(const std::vector<double>& log_cum, std::size_t l) {
  return l == 0 ? kNegInf : log1mexp(std::exp(log_cum[l - 1]));
}

// Log-likelihood contribution given log z = theta'x + log F(u).
double loglik_term(int delta, double log_z) noexcept {
  const double z = std::exp(log_z);
  return delta ? log1mexp(z) : -z;
}

double theta_norm_const(const Eigen::VectorXd& var) {
  return -0.5 * (static_cast<double>(var.size()) * kLog2Pi + var.array().log().sum());
}

double theta_log_kernel(const Eigen::VectorXd& theta, const PriorSpec& prior) {
  return -0.5 * ((theta - prior.tau).array().square() / prior.sigma_theta_diag.array()).sum();
}

double eta_norm_const(const PriorSpec& prior) {
  const auto n0 = static_cast<std::size_t>(prior.mu.size());
  return -0.5 * (static_cast<double>(n0) * kLog2Pi + prior.eta_cov.log_det(n0));
}

}  // namespace

Eigen::VectorXd ModelParams::flat() const {
  Eigen::VectorXd out(theta.size() + eta.size());
  out << theta, eta;
  return out;
}

ModelParams ModelParams::from_flat(const Eigen::VectorXd& flat, std::size_t dim_theta) {
  const auto k = static_cast<Eigen::Index>(dim_theta);
  if (k > flat.size()) throw ValidationError("parameter vector shorter than theta");
  return {flat.head(k), flat.tail(flat.size() - k)};
}

Eigen::MatrixXd ar1_covariance(std::size_t n0, double rho, double scale) {
  if (n0 < 1) throw ValidationError("ar1_covariance: n0 must be at least 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("ar1_covariance: rho must lie in (0,1)");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("ar1_covariance: scale must be positive");
  const auto n = static_cast<Eigen::Index>(n0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = scale * std::pow(rho, static_cast<double>(std::abs(i - j)));
  return m;
}

EtaCovariance EtaCovariance::ar1(double scale, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("eta covariance: rho must lie in (0,1)");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("eta covariance: scale must be positive");
  EtaCovariance c;
  c.ar1_ = true;
  c.scale_ = scale;
  c.rho_ = rho;
  return c;
}

EtaCovariance EtaCovariance::dense(const Eigen::MatrixXd& cov) {
  if (cov.rows() == 0 || cov.rows() != cov.cols()) throw ValidationError("eta covariance must be square and non-empty");
  if (!cov.allFinite()) throw ValidationError("eta covariance has non-finite entries");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw ValidationError("eta covariance must be symmetric");
  EtaCovariance c;
  c.ar1_ = false;
  c.dense_ = cov;
  c.chol_.compute(cov);
  if (c.chol_.info() != Eigen::Success) throw ValidationError("eta covariance is not positive definite");
  const Eigen::MatrixXd l = c.chol_.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) throw ValidationError("eta covariance is not positive definite");
    c.dense_log_det_ += 2.0 * std::log(l(i, i));
  }
  return c;
}

Eigen::MatrixXd EtaCovariance::matrix(std::size_t n0) const {
  if (ar1_) return ar1_covariance(n0, rho_, scale_);
  if (fixed_size() != n0) throw ValidationError("explicit eta covariance has the wrong size");
  return dense_;
}

double EtaCovariance::quad_form(const Eigen::VectorXd& d) const {
  const auto n = d.size();
  if (!ar1_) {
    if (n != dense_.rows()) throw ValidationError("explicit eta covariance has the wrong size");
    return chol_.matrixL().solve(d).squaredNorm();
  }
  if (n == 1) return d[0] * d[0] / scale_;
  const double r2 = rho_ * rho_;
  double q = d.squaredNorm() + r2 * d.segment(1, n - 2).squaredNorm();
  double cross = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) cross += d[i] * d[i + 1];
  q -= 2.0 * rho_ * cross;
  return q / ((1.0 - r2) * scale_);
}

double EtaCovariance::log_det(std::size_t n0) const {
  if (!ar1_) {
    if (fixed_size() != n0) throw ValidationError("explicit eta covariance has the wrong size");
    return dense_log_det_;
  }
  const double n = static_cast<double>(n0);
  return n * std::log(scale_) + (n - 1.0) * std::log1p(-rho_ * rho_);
}

void PriorSpec::validate(std::size_t dim_theta, std::size_t n0) const {
  if (static_cast<std::size_t>(tau.size()) != dim_theta)
    throw ValidationError("prior.theta.mean has length " + std::to_string(tau.size()) + ", expected " +
                          std::to_string(dim_theta));
  if (static_cast<std::size_t>(sigma_theta_diag.size()) != dim_theta)
    throw ValidationError("prior.theta.var has length " + std::to_string(sigma_theta_diag.size()) + ", expected " +
                          std::to_string(dim_theta));
  if (static_cast<std::size_t>(mu.size()) != n0)
    throw ValidationError("prior.eta.mean has length " + std::to_string(mu.size()) + ", expected " +
                          std::to_string(n0));
  if (!tau.allFinite() || !mu.allFinite()) throw ValidationError("prior means must be finite");
  for (Eigen::Index j = 0; j < sigma_theta_diag.size(); ++j)
    if (!(sigma_theta_diag[j] > 0.0) || !std::isfinite(sigma_theta_diag[j]))
      throw ValidationError("prior.theta.var entries must be positive");
  if (!eta_cov.is_ar1() && eta_cov.fixed_size() != n0)
    throw ValidationError("prior.eta.cov has size " + std::to_string(eta_cov.fixed_size()) + ", expected " +
                          std::to_string(n0));
}

double log1mexp(double a) noexcept {
  if (a <= 0.0) return a == 0.0 ? kNegInf : std::numeric_limits<double>::quiet_NaN();
  return a <= std::numbers::ln2 ? std::log(-std::expm1(-a)) : std::log1p(-std::exp(-a));
}

std::vector<double> log_cumulative_hazard(const Eigen::VectorXd& eta) {
  std::vector<double> out(static_cast<std::size_t>(eta.size()));
  double acc = kNegInf;
  for (Eigen::Index l = 0; l < eta.size(); ++l) {
    acc = log_add_exp(acc, eta[l]);
    out[static_cast<std::size_t>(l)] = acc;
  }
  return out;
}

double step_cdf(const Eigen::VectorXd& eta, const MonitoringGrid& grid, double t) {
  if (static_cast<std::size_t>(eta.size()) != grid.n0()) throw ValidationError("eta length differs from the grid");
  const auto l = grid.index_of(t);
  if (l == 0) return 0.0;
  const auto log_cum = log_cumulative_hazard(eta.head(static_cast<Eigen::Index>(l)));
  return -std::expm1(-std::exp(log_cum.back()));
}

std::vector<double> step_cdf_at_knots(const Eigen::VectorXd& eta) {
  auto out = log_cumulative_hazard(eta);
  for (double& v : out) v = -std::expm1(-std::exp(v));
  return out;
}

double pop_survival(const ModelParams& params, const MonitoringGrid& grid, const Eigen::VectorXd& x, double t) {
  check_x(params.theta, x);
  const double f = step_cdf(params.eta, grid, t);
  return std::exp(-std::exp(params.theta.dot(x)) * f);
}

double cure_fraction(const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
  check_x(theta, x);
  return std::exp(-std::exp(theta.dot(x)));
}

double log_interval_probability(const ModelParams& params, const MonitoringGrid& grid, const Observation& obs) {
  check_x(params.theta, obs.x);
  if (static_cast<std::size_t>(params.eta.size()) != grid.n0()) throw ValidationError("eta length differs from the grid");
  const auto l = grid.index_of(obs.u);
  if (l == 0) return obs.delta ? kNegInf : 0.0;
  const auto log_cum = log_cumulative_hazard(params.eta.head(static_cast<Eigen::Index>(l)));
  const double log_z = params.theta.dot(obs.x) + log_cdf_from_hazard(log_cum, l);
  return loglik_term(obs.delta, log_z);
}

double interval_probability(const ModelParams& params, const MonitoringGrid& grid, const Observation& obs) {
  return std::exp(log_interval_probability(params, grid, obs));
}

double log_likelihood(const ModelParams& params, const CurrentStatusDataset& data) {
  check_dims(params, data.dim(), data.grid().n0());
  if (data.empty()) return 0.0;
  const auto log_cum = log_cumulative_hazard(params.eta);
  std::vector<double> log_f(log_cum.size());
  for (std::size_t l = 0; l < log_cum.size(); ++l) log_f[l] = log1mexp(std::exp(log_cum[l]));
  const Eigen::VectorXd lin = data.design() * params.theta;
  const auto& idx = data.knot_index();
  const auto& status = data.status();
  double total = 0.0;
  for (Eigen::Index i = 0; i < lin.size(); ++i)
    total += loglik_term(status[i], lin[i] + log_f[idx[static_cast<std::size_t>(i)] - 1]);
  return total;
}

double log_prior(const ModelParams& params, const PriorSpec& prior) {
  check_dims(params, static_cast<std::size_t>(prior.tau.size()), static_cast<std::size_t>(prior.mu.size()));
  return theta_norm_const(prior.sigma_theta_diag) + theta_log_kernel(params.theta, prior) + eta_norm_const(prior) -
         0.5 * prior.eta_cov.quad_form(params.eta - prior.mu);
}

double log_posterior(const ModelParams& params, const CurrentStatusDataset& data, const PriorSpec& prior) {
  return log_prior(params, prior) + log_likelihood(params, data);
}

LogPosterior::LogPosterior(const CurrentStatusDataset& data, const PriorSpec& prior)
    : data_(&data), prior_(&prior), dim_theta_(data.dim()), n0_(data.grid().n0()) {
  prior.validate(dim_theta_, n0_);
  theta_log_norm_ = theta_norm_const(prior.sigma_theta_diag);
  eta_log_norm_ = eta_norm_const(prior);
}

double LogPosterior::log_likelihood(const Eigen::VectorXd& flat) const {
  return ptcure::log_likelihood(ModelParams::from_flat(flat, dim_theta_), *data_);
}

double LogPosterior::log_prior(const Eigen::VectorXd& flat) const {
  const auto k = static_cast<Eigen::Index>(dim_theta_);
  const Eigen::VectorXd d = flat.tail(static_cast<Eigen::Index>(n0_)) - prior_->mu;
  return theta_log_norm_ + theta_log_kernel(flat.head(k), *prior_) + eta_log_norm_ - 0.5 * prior_->eta_cov.quad_form(d);
}

double LogPosterior::operator()(const Eigen::VectorXd& flat) const {
  if (static_cast<std::size_t>(flat.size()) != dim()) throw ValidationError("parameter vector has the wrong length");
  const double lp = log_prior(flat);
  if (!std::isfinite(lp)) return lp;
  return lp + log_likelihood(flat);
}

}  // namespace ptcure
