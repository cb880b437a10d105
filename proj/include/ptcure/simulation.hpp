#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptcure/dataset.hpp"
#include "ptcure/model.hpp"
#include "ptcure/rng.hpp"
#include "ptcure/sampler.hpp"
#include "ptcure/summary.hpp"

namespace ptcure {

// S(t) = exp(-(b/a)(e^{at} - 1)).
struct GompertzParams {
  double a = 0.5;
  double b = 1.1;
  void validate() const;
};

double gompertz_survival(const GompertzParams& p, double t);
double gompertz_cdf(const GompertzParams& p, double t);
// t = log(1 - (a/b) log s) / a for s in (0, 1].
double gompertz_inverse_survival(const GompertzParams& p, double s);

struct Subject {
  double T = 0.0;  // +inf for a cured subject
  Eigen::VectorXd x;
  bool cured = false;
};

// Argument of S^{-1} for an uncured subject with e^{theta'x} = beta and
// uniform chi: 1 + log(1 - chi (1 - e^{-beta})) / beta, which lies in (0, 1).
double inversion_argument(double beta, double chi);

// x = (1, X1, X2) with X1 ~ Bernoulli(0.5), X2 ~ N(0, 1). The subject is
// uncured with probability 1 - exp(-e^{theta'x}); its event time then follows
// F conditioned on the promotion time model. theta_true must have length 3.
Subject generate_subject(const Eigen::VectorXd& theta_true, const GompertzParams& gompertz, Rng& rng);

// Equal-probability multinomial counts (n_1..n_k) over k cells.
std::vector<std::size_t> multinomial_equal(std::size_t n, std::size_t k, Rng& rng);
// Subjects 1..n_1 get s_1, the next n_2 get s_2, and so on.
std::vector<double> assign_monitoring_fixed(std::size_t n, const std::vector<double>& knots, Rng& rng);

struct RandomMonitoring {
  std::vector<double> knots;  // sorted
  std::vector<double> u;
};
RandomMonitoring assign_monitoring_random(std::size_t n, std::size_t count, double upper, Rng& rng);

enum class MonitoringScheme { fixed, random };

struct ScenarioConfig {
  std::size_t n = 200;
  Eigen::VectorXd theta_true = Eigen::Vector3d(0.6, -0.5, 0.7);
  GompertzParams gompertz;
  MonitoringScheme scheme = MonitoringScheme::fixed;
  std::vector<double> knots{0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7, 3.0};
  std::size_t random_count = 10;
  double random_upper = 3.0;
  std::size_t replicates = 500;
  std::uint64_t seed = 1;
  SamplerConfig sampler;
  // Study prior: theta_j ~ N(theta_prior_mean, theta_prior_var) and
  // eta ~ N(mu, eta_scale * AR1(eta_rho)) with mu elicited from the true
  // Gompertz survival at the realised grid.
  double theta_prior_mean = 1.0;
  double theta_prior_var = 100.0;
  double eta_scale = 1.0;
  double eta_rho = 0.3;
  double level = 0.95;

  void validate() const;
};

struct GeneratedData {
  CurrentStatusDataset data;
  std::vector<double> scheme_knots;  // the knots subjects were assigned to
  std::size_t cured = 0;
};

// Deterministic in (cfg.seed, rep); subjects are drawn before monitoring times.
GeneratedData generate_dataset(const ScenarioConfig& cfg, std::size_t rep);

PriorSpec study_prior(const ScenarioConfig& cfg, const MonitoringGrid& grid);

// mu_l = log(-log(S_l / S_{l-1})) with S_0 = 1. Throws ValidationError when a
// value is outside (0, 1] or the survival does not strictly decrease.
std::vector<double> elicit_mu(const std::vector<double>& survival);

// Same, for survival estimates that may be flat or reach zero (NPMLE, KM):
// values are clipped below at min_survival and every hazard increment is
// raised to at least min_increment.
std::vector<double> elicit_mu_floored(const std::vector<double>& survival, double min_increment,
                                      double min_survival);

// Baseline CDF from a population survival estimate at x = 0:
// F = -log S_pop / e^{intercept}. Values reaching 1 are a ValidationError.
std::vector<double> baseline_cdf_from_population(const std::vector<double>& pop_survival, double intercept);

struct ReplicateRecord {
  std::size_t rep = 0;
  bool ok = false;
  std::string error;
  Eigen::VectorXd theta_mean, theta_sd;
  std::vector<Interval> theta_ci;
  std::vector<double> scheme_knots;
  std::vector<double> F_tilde;  // fitted step CDF at the scheme knots
  std::vector<double> F_true;
  double acceptance_rate = 0.0;
  std::size_t cured = 0;
};

struct StudyReport {
  Eigen::VectorXd theta_true;
  Eigen::VectorXd mean, abs_bias, epsd, ssd, cp;
  std::vector<double> mse;  // per knot rank
  double max_mse = 0.0;
  std::size_t failures = 0;
  std::size_t completed = 0;
  std::vector<ReplicateRecord> records;  // ordered by rep
};

ReplicateRecord run_replicate(const ScenarioConfig& cfg, std::size_t rep);
// Aggregates successful records only; needs at least one.
StudyReport aggregate_study(std::vector<ReplicateRecord> records, const Eigen::VectorXd& theta_true);
// Replicates run on `workers` threads; the report does not depend on it.
StudyReport replication_study(const ScenarioConfig& cfg, std::size_t workers = 1);

}  // namespace ptcure
