#include "ptcure/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ptcure/errors.hpp"
#include "ptcure/parallel.hpp"

namespace ptcure {
namespace {

constexpr std::uint64_t kDataTag = 0x64617461;  // "data"
constexpr std::uint64_t kFitTag = 0x666974;     // "fit"

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void GompertzParams::validate() const {
  if (!finite_positive(a) || !finite_positive(b))
    throw ValidationError("gompertz: a and b must be positive and finite");
}

double gompertz_survival(const GompertzParams& p, double t) {
  if (!(t >= 0.0)) throw ValidationError("gompertz_survival: t must be >= 0");
  return std::exp(-(p.b / p.a) * std::expm1(p.a * t));
}

double gompertz_cdf(const GompertzParams& p, double t) {
  if (!(t >= 0.0)) throw ValidationError("gompertz_cdf: t must be >= 0");
  return -std::expm1(-(p.b / p.a) * std::expm1(p.a * t));
}

double gompertz_inverse_survival(const GompertzParams& p, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw ValidationError("gompertz_inverse_survival: s must lie in (0, 1]");
  return std::log1p(-(p.a / p.b) * std::log(s)) / p.a;
}

double inversion_argument(double beta, double chi) {
  return 1.0 + std::log1p(chi * std::expm1(-beta)) / beta;
}

Subject generate_subject(const Eigen::VectorXd& theta_true, const GompertzParams& gompertz, Rng& rng) {
  if (theta_true.size() != 3) throw ValidationError("generate_subject: theta_true must have length 3");
  Subject s;
  s.x = Eigen::Vector3d(1.0, rng.bernoulli(0.5) ? 1.0 : 0.0, rng.normal());
  const double beta = std::exp(theta_true.dot(s.x));
  const bool uncured = rng.bernoulli(-std::expm1(-beta));
  if (!uncured) {
    s.cured = true;
    s.T = std::numeric_limits<double>::infinity();
    return s;
  }
  const double arg = inversion_argument(beta, rng.uniform());
  if (!(arg > 0.0 && arg <= 1.0)) throw NumericalError("generate_subject: inversion argument left (0, 1]");
  s.T = gompertz_inverse_survival(gompertz, arg);
  return s;
}

std::vector<std::size_t> multinomial_equal(std::size_t n, std::size_t k, Rng& rng) {
  if (k == 0) throw ValidationError("multinomial: need at least one cell");
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(k)];
  return counts;
}

std::vector<double> assign_monitoring_fixed(std::size_t n, const std::vector<double>& knots, Rng& rng) {
  if (knots.empty()) throw ValidationError("assign_monitoring_fixed: no knots");
  const auto counts = multinomial_equal(n, knots.size(), rng);
  std::vector<double> u;
  u.reserve(n);
  for (std::size_t l = 0; l < knots.size(); ++l) u.insert(u.end(), counts[l], knots[l]);
  return u;
}

RandomMonitoring assign_monitoring_random(std::size_t n, std::size_t count, double upper, Rng& rng) {
  if (count == 0 || !finite_positive(upper))
    throw ValidationError("assign_monitoring_random: need count >= 1 and upper > 0");
  RandomMonitoring m;
  for (std::size_t l = 0; l < count; ++l) m.knots.push_back(rng.uniform(0.0, upper));
  std::sort(m.knots.begin(), m.knots.end());
  m.u = assign_monitoring_fixed(n, m.knots, rng);
  return m;
}

void ScenarioConfig::validate() const {
  if (n == 0) throw ValidationError("scenario.n must be positive");
  if (theta_true.size() != 3 || !theta_true.allFinite())
    throw ValidationError("scenario.theta_true must be 3 finite values");
  gompertz.validate();
  if (scheme == MonitoringScheme::fixed) {
    if (knots.empty()) throw ValidationError("scenario.knots must not be empty");
    for (std::size_t l = 0; l < knots.size(); ++l)
      if (!finite_positive(knots[l]) || (l > 0 && knots[l] <= knots[l - 1]))
        throw ValidationError("scenario.knots must be positive and strictly increasing");
  } else {
    if (random_count == 0) throw ValidationError("scenario.random_count must be >= 1");
    if (!finite_positive(random_upper)) throw ValidationError("scenario.random_upper must be > 0");
  }
  if (replicates == 0) throw ValidationError("scenario.replicates must be positive");
  if (!std::isfinite(theta_prior_mean)) throw ValidationError("scenario.theta_prior_mean must be finite");
  if (!finite_positive(theta_prior_var)) throw ValidationError("scenario.theta_prior_var must be > 0");
  if (!finite_positive(eta_scale)) throw ValidationError("scenario.eta_scale must be > 0");
  if (!(eta_rho > 0.0 && eta_rho < 1.0)) throw ValidationError("scenario.eta_rho must lie in (0, 1)");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("scenario.level must lie in (0, 1)");
  sampler.validate();
}

GeneratedData generate_dataset(const ScenarioConfig& cfg, std::size_t rep) {
  Rng rng(derive_seed(cfg.seed, kDataTag, rep));
  std::vector<Subject> subjects;
  subjects.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) subjects.push_back(generate_subject(cfg.theta_true, cfg.gompertz, rng));

  std::vector<double> u, scheme_knots;
  if (cfg.scheme == MonitoringScheme::fixed) {
    scheme_knots = cfg.knots;
    u = assign_monitoring_fixed(cfg.n, cfg.knots, rng);
  } else {
    auto m = assign_monitoring_random(cfg.n, cfg.random_count, cfg.random_upper, rng);
    scheme_knots = std::move(m.knots);
    u = std::move(m.u);
  }

  std::vector<Observation> obs;
  obs.reserve(cfg.n);
  std::size_t cured = 0;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    cured += subjects[i].cured ? 1 : 0;
    obs.push_back({u[i], subjects[i].T <= u[i] ? 1 : 0, subjects[i].x});
  }
  return {CurrentStatusDataset(std::move(obs)), std::move(scheme_knots), cured};
}

PriorSpec study_prior(const ScenarioConfig& cfg, const MonitoringGrid& grid) {
  std::vector<double> s;
  for (double k : grid.knots()) s.push_back(gompertz_survival(cfg.gompertz, k));
  const auto mu = elicit_mu(s);
  PriorSpec prior;
  const auto d = cfg.theta_true.size();
  prior.tau = Eigen::VectorXd::Constant(d, cfg.theta_prior_mean);
  prior.sigma_theta_diag = Eigen::VectorXd::Constant(d, cfg.theta_prior_var);
  prior.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  prior.eta_cov = EtaCovariance::ar1(cfg.eta_scale, cfg.eta_rho);
  return prior;
}

std::vector<double> elicit_mu(const std::vector<double>& survival) {
  std::vector<double> mu;
  double prev = 1.0;
  for (std::size_t l = 0; l < survival.size(); ++l) {
    const double s = survival[l];
    if (!(s > 0.0 && s <= 1.0))
      throw ValidationError("elicit_mu: survival value " + std::to_string(l + 1) + " outside (0, 1]");
    const double h = -std::log(s / prev);
    if (!(h > 0.0))
      throw ValidationError("elicit_mu: survival does not decrease at knot " + std::to_string(l + 1));
    mu.push_back(std::log(h));
    prev = s;
  }
  return mu;
}

std::vector<double> elicit_mu_floored(const std::vector<double>& survival, double min_increment,
                                      double min_survival) {
  if (!finite_positive(min_increment) || !(min_survival > 0.0 && min_survival < 1.0))
    throw ValidationError("elicit_mu_floored: need min_increment > 0 and min_survival in (0, 1)");
  std::vector<double> mu;
  double prev_h = 0.0;
  for (double s : survival) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("elicit_mu_floored: survival outside [0, 1]");
    const double h = -std::log(std::max(s, min_survival));
    mu.push_back(std::log(std::max(h - prev_h, min_increment)));
    prev_h = std::max(h, prev_h);
  }
  return mu;
}

std::vector<double> baseline_cdf_from_population(const std::vector<double>& pop_survival, double intercept) {
  std::vector<double> F;
  const double scale = std::exp(intercept);
  for (double s : pop_survival) {
    if (!(s > 0.0 && s <= 1.0)) throw ValidationError("baseline_cdf_from_population: survival outside (0, 1]");
    const double f = -std::log(s) / scale;
    if (!(f < 1.0)) throw ValidationError("baseline_cdf_from_population: implied F reaches 1");
    F.push_back(f);
  }
  return F;
}

ReplicateRecord run_replicate(const ScenarioConfig& cfg, std::size_t rep) {
  ReplicateRecord r;
  r.rep = rep;
  try {
    const auto gen = generate_dataset(cfg, rep);
    r.scheme_knots = gen.scheme_knots;
    r.cured = gen.cured;
    const auto prior = study_prior(cfg, gen.data.grid());
    SamplerConfig sc = cfg.sampler;
    sc.seed = derive_seed(cfg.seed, kFitTag, rep);
    sc.workers = 1;
    const auto chains = run_chains(gen.data, prior, sc);
    const auto fit = summarize(chains, gen.data.grid(), cfg.level);
    r.theta_mean = fit.theta_mean;
    r.theta_sd = fit.theta_sd;
    r.theta_ci = fit.theta_ci;
    r.acceptance_rate = fit.acceptance_rate;
    for (double s : r.scheme_knots) {
      r.F_tilde.push_back(step_cdf(fit.eta_mean, gen.data.grid(), s));
      r.F_true.push_back(gompertz_cdf(cfg.gompertz, s));
    }
    r.ok = true;
  } catch (const NumericalError& e) {
    r.error = e.what();
  }
  return r;
}

StudyReport aggregate_study(std::vector<ReplicateRecord> records, const Eigen::VectorXd& theta_true) {
  StudyReport rep;
  rep.theta_true = theta_true;
  const auto d = theta_true.size();
  std::vector<const ReplicateRecord*> ok;
  for (const auto& r : records) {
    if (r.ok)
      ok.push_back(&r);
    else
      ++rep.failures;
  }
  if (ok.empty()) throw NumericalError("replication study: every replicate failed");
  rep.completed = ok.size();
  const double m = static_cast<double>(ok.size());

  rep.mean = Eigen::VectorXd::Zero(d);
  rep.epsd = Eigen::VectorXd::Zero(d);
  rep.cp = Eigen::VectorXd::Zero(d);
  for (const auto* r : ok) {
    if (r->theta_mean.size() != d) throw ValidationError("replication study: record dimension mismatch");
    rep.mean += r->theta_mean;
    rep.epsd += r->theta_sd;
    for (Eigen::Index j = 0; j < d; ++j) rep.cp[j] += r->theta_ci[j].contains(theta_true[j]) ? 1.0 : 0.0;
  }
  rep.mean /= m;
  rep.epsd /= m;
  rep.cp /= m;
  rep.abs_bias = (rep.mean - theta_true).cwiseAbs();

  rep.ssd = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
  if (ok.size() > 1) {
    rep.ssd.setZero();
    for (const auto* r : ok) rep.ssd += (r->theta_mean - rep.mean).cwiseAbs2();
    rep.ssd = (rep.ssd / (m - 1.0)).cwiseSqrt();
  }

  const auto k = ok.front()->F_tilde.size();
  rep.mse.assign(k, 0.0);
  for (const auto* r : ok) {
    if (r->F_tilde.size() != k) throw ValidationError("replication study: knot count differs between replicates");
    for (std::size_t l = 0; l < k; ++l) rep.mse[l] += (r->F_tilde[l] - r->F_true[l]) * (r->F_tilde[l] - r->F_true[l]);
  }
  for (auto& v : rep.mse) v /= m;
  rep.max_mse = rep.mse.empty() ? 0.0 : *std::max_element(rep.mse.begin(), rep.mse.end());

  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.rep < b.rep; });
  rep.records = std::move(records);
  return rep;
}

StudyReport replication_study(const ScenarioConfig& cfg, std::size_t workers) {
  cfg.validate();
  if (cfg.replicates < 2) throw ValidationError("scenario.replicates must be >= 2 for a study");
  std::vector<ReplicateRecord> records(cfg.replicates);
  parallel_for(cfg.replicates, workers, [&](std::size_t i) { records[i] = run_replicate(cfg, i); });
  return aggregate_study(std::move(records), cfg.theta_true);
}

}  // namespace ptcure
