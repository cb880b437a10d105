#include "ptcure/sampler.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "ptcure/optimize.hpp"
#include "ptcure/parallel.hpp"
#include "ptcure/table.hpp"

namespace ptcure {
namespace {

constexpr double kAdaptScale = 2.38 * 2.38;
constexpr double kAdaptJitter = 1e-6;
constexpr double kHessianStep = 1e-4;

Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("proposal covariance is not positive definite");
  Eigen::MatrixXd l = llt.matrixL();
  if (!l.allFinite() || (l.diagonal().array() <= 0.0).any())
    throw NumericalError("proposal covariance is not positive definite");
  return l;
}

}  // namespace

void SamplerConfig::validate() const {
  if (iterations == 0) throw ValidationError("sampler.iterations must be positive");
  if (burn_in >= iterations) throw ValidationError("sampler.burn_in must be smaller than sampler.iterations");
  if (thin == 0) throw ValidationError("sampler.thin must be positive");
  if (retained() < 1) throw ValidationError("sampler: (iterations - burn_in) / thin must retain at least one draw");
  if (adapt_interval == 0) throw ValidationError("sampler.adapt_interval must be positive");
  if (!(adapt_fraction > 0.0 && adapt_fraction <= 1.0))
    throw ValidationError("sampler.adapt_fraction must lie in (0,1]");
  if (n_chains == 0) throw ValidationError("sampler.n_chains must be positive");
  if (workers == 0) throw ValidationError("sampler.workers must be positive");
}

ChainState ChainState::start(const LogDensity& target, Eigen::VectorXd x0, const Eigen::MatrixXd& cov, Rng rng) {
  ChainState s;
  s.log_post = target(x0);
  if (!std::isfinite(s.log_post)) throw NumericalError("chain start has a non-finite log posterior");
  s.current = std::move(x0);
  s.rng = rng;
  s.set_proposal_cov(cov);
  return s;
}

void ChainState::set_proposal_cov(const Eigen::MatrixXd& cov) {
  proposal_chol = cholesky_or_throw(cov);
  proposal_cov = cov;
}

Eigen::VectorXd map_estimate(const LogDensity& target, const Eigen::VectorXd& init, const Eigen::VectorXd& fallback) {
  const Objective neg = [&](const Eigen::VectorXd& x) { return -target(x); };
  NelderMeadOptions opts;
  opts.max_evaluations = 2000 * static_cast<std::size_t>(std::max<Eigen::Index>(init.size(), 1));
  opts.ftol = 1e-8;
  auto res = nelder_mead(neg, init, opts);
  if (res.converged) return res.x;
  const Eigen::VectorXd retry_from = init.isApprox(fallback) ? res.x : fallback;
  auto retry = nelder_mead(neg, retry_from, opts);
  if (retry.converged) return retry.x;
  const auto& best = retry.value < res.value ? retry : res;
  throw MapError("MAP search did not converge within " + std::to_string(opts.max_evaluations) +
                     " evaluations per attempt (best log posterior " + format_double(-best.value) + ")",
                 best.x, -best.value);
}

ModelParams map_estimate(const CurrentStatusDataset& data, const PriorSpec& prior, const ModelParams& init) {
  const LogPosterior lp(data, prior);
  const LogDensity target = std::cref(lp);
  return ModelParams::from_flat(map_estimate(target, init.flat(), prior.mean().flat()), data.dim());
}

ModelParams map_estimate(const CurrentStatusDataset& data, const PriorSpec& prior) {
  return map_estimate(data, prior, prior.mean());
}

Eigen::MatrixXd observed_information(const LogDensity& target, const Eigen::VectorXd& at) {
  const Objective neg = [&](const Eigen::VectorXd& x) { return -target(x); };
  Eigen::MatrixXd info = numerical_hessian(neg, at, kHessianStep);
  for (Eigen::Index i = 0; i < info.rows(); ++i)
    for (Eigen::Index j = 0; j < info.cols(); ++j)
      if (!std::isfinite(info(i, j)))
        throw NumericalError("observed information is not finite at coordinate (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
  return info;
}

Eigen::MatrixXd observed_information(const CurrentStatusDataset& data, const PriorSpec& prior, const ModelParams& at) {
  const LogPosterior lp(data, prior);
  return observed_information(LogDensity(std::cref(lp)), at.flat());
}

Eigen::MatrixXd initial_proposal_cov(const Eigen::MatrixXd& info) {
  const auto n = info.rows();
  Eigen::MatrixXd sym = 0.5 * (info + info.transpose());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  if (!sym.allFinite()) throw NumericalError("observed information has non-finite entries");
  double base = n > 0 ? sym.diagonal().cwiseAbs().maxCoeff() : 1.0;
  if (!(base > 0.0)) base = 1.0;
  double lambda = 1e-6 * base;
  Eigen::MatrixXd work = sym;
  while (true) {
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd cov = llt.solve(eye);
      cov = 0.5 * (cov + cov.transpose());
      if (Eigen::LLT<Eigen::MatrixXd>(cov).info() == Eigen::Success) return cov;
    }
    work = sym + lambda * eye;
    lambda *= 2.0;
  }
}

bool mh_step(ChainState& state, const LogDensity& target) {
  const auto d = state.current.size();
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = state.rng.normal();
  Eigen::VectorXd proposal = state.current + state.proposal_chol * z;
  const double log_omega = std::log(state.rng.uniform());
  ++state.iteration;
  const double lp = target(proposal);
  if (!std::isfinite(lp)) return false;
  if (log_omega <= lp - state.log_post) {
    state.current = std::move(proposal);
    state.log_post = lp;
    ++state.accept_count;
    return true;
  }
  return false;
}

ChainState mh_step(ChainState state, const CurrentStatusDataset& data, const PriorSpec& prior) {
  const LogPosterior lp(data, prior);
  mh_step(state, LogDensity(std::cref(lp)));
  return state;
}

Eigen::MatrixXd adapt_covariance(const Eigen::MatrixXd& history, std::size_t rows, double fraction,
                                 const Eigen::MatrixXd& current) {
  const auto d = history.cols();
  rows = std::min(rows, static_cast<std::size_t>(history.rows()));
  auto window = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(rows)));
  window = std::min(window, rows);
  if (window < static_cast<std::size_t>(d) + 2) return current;
  const auto w = static_cast<Eigen::Index>(window);
  const auto block = history.middleRows(static_cast<Eigen::Index>(rows) - w, w);
  const Eigen::RowVectorXd mean = block.colwise().mean();
  const Eigen::MatrixXd centered = block.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(w - 1);
  cov = (kAdaptScale / static_cast<double>(d)) * cov;
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += kAdaptJitter;
  return cov;
}

ModelParams PosteriorChain::draw(std::size_t m) const {
  return ModelParams::from_flat(draws.row(static_cast<Eigen::Index>(m)).transpose(), dim_theta);
}

std::vector<std::string> parameter_names(std::size_t dim_theta, std::size_t n0) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < dim_theta; ++j) names.push_back("theta_" + std::to_string(j));
  for (std::size_t l = 1; l <= n0; ++l) names.push_back("eta_" + std::to_string(l));
  return names;
}

std::vector<std::string> PosteriorChain::parameter_names() const { return ptcure::parameter_names(dim_theta, n0()); }

ChainStart prepare_chain_start(const LogPosterior& target) {
  const LogDensity f = std::cref(target);
  const Eigen::VectorXd mean = target.prior().mean().flat();
  ChainStart start;
  start.point = map_estimate(f, mean, mean);
  start.proposal_cov = initial_proposal_cov(observed_information(f, start.point));
  return start;
}

PosteriorChain run_adaptive_mh(const LogDensity& target, const ChainStart& start, const SamplerConfig& config,
                               std::size_t chain_id, std::size_t dim_theta) {
  config.validate();
  const auto d = start.point.size();
  ChainState state = ChainState::start(target, start.point, start.proposal_cov, Rng(config.seed, chain_id));

  PosteriorChain chain;
  chain.dim_theta = dim_theta;
  chain.map_point = start.point;
  chain.config = config;
  chain.chain_id = chain_id;
  chain.draws.resize(static_cast<Eigen::Index>(config.retained()), d);

  Eigen::MatrixXd history(static_cast<Eigen::Index>(config.adapt ? config.burn_in : 0), d);
  Eigen::Index kept = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t it = 0; it < config.iterations; ++it) {
    mh_step(state, target);
    const std::size_t done = it + 1;
    if (it < config.burn_in) {
      if (config.adapt) {
        history.row(static_cast<Eigen::Index>(it)) = state.current.transpose();
        if (done % config.adapt_interval == 0) {
          const Eigen::MatrixXd cov = adapt_covariance(history, done, config.adapt_fraction, state.proposal_cov);
          // A numerically singular estimate keeps the previous kernel.
          try {
            state.set_proposal_cov(cov);
          } catch (const NumericalError&) {
          }
        }
      }
    } else if ((done - config.burn_in) % config.thin == 0 && kept < chain.draws.rows()) {
      chain.draws.row(kept++) = state.current.transpose();
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  chain.seconds_per_iteration =
      std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(config.iterations);
  chain.accept_count = state.accept_count;
  chain.acceptance_rate = static_cast<double>(state.accept_count) / static_cast<double>(config.iterations);
  chain.final_proposal_cov = state.proposal_cov;
  return chain;
}

PosteriorChain run_chain(const CurrentStatusDataset& data, const PriorSpec& prior, const SamplerConfig& config,
                         std::size_t chain_id) {
  config.validate();
  const LogPosterior lp(data, prior);
  const ChainStart start = prepare_chain_start(lp);
  return run_adaptive_mh(LogDensity(std::cref(lp)), start, config, chain_id, data.dim());
}

std::vector<PosteriorChain> run_chains(const CurrentStatusDataset& data, const PriorSpec& prior,
                                       const SamplerConfig& config) {
  config.validate();
  const LogPosterior lp(data, prior);
  const ChainStart start = prepare_chain_start(lp);
  std::vector<PosteriorChain> chains(config.n_chains);
  parallel_for(config.n_chains, config.workers, [&](std::size_t c) {
    chains[c] = run_adaptive_mh(LogDensity(std::cref(lp)), start, config, c, data.dim());
  });
  return chains;
}

void write_chain(std::ostream& out, const PosteriorChain& chain) {
  out << "# chain_id: " << chain.chain_id << "\n# iterations: " << chain.config.iterations
      << "\n# burn_in: " << chain.config.burn_in << "\n# thin: " << chain.config.thin
      << "\n# acceptance_rate: " << format_double(chain.acceptance_rate) << '\n';
  const auto names = chain.parameter_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (Eigen::Index m = 0; m < chain.draws.rows(); ++m) {
    for (Eigen::Index j = 0; j < chain.draws.cols(); ++j) out << (j ? "," : "") << format_double(chain.draws(m, j));
    out << '\n';
  }
}

PosteriorChain read_chain(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  PosteriorChain chain;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("# ", 0) != 0) continue;
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const char* value = line.c_str() + colon + 1;
      char* end = nullptr;
      const double v = std::strtod(value, &end);
      if (end == value) continue;
      if (key == "chain_id") chain.chain_id = static_cast<std::size_t>(v);
      else if (key == "iterations") chain.config.iterations = static_cast<std::size_t>(v);
      else if (key == "burn_in") chain.config.burn_in = static_cast<std::size_t>(v);
      else if (key == "thin") chain.config.thin = static_cast<std::size_t>(v);
      else if (key == "acceptance_rate") chain.acceptance_rate = v;
    }
  }
  std::istringstream body(text);
  const NumericTable table = read_numeric_table(body);
  std::size_t n_theta = 0, n_eta = 0;
  for (const auto& h : table.header) {
    if (h.rfind("theta_", 0) == 0) {
      if (n_eta > 0) throw ValidationError("chain columns: theta_* must precede eta_*");
      ++n_theta;
    } else if (h.rfind("eta_", 0) == 0) {
      ++n_eta;
    } else {
      throw ValidationError("chain columns: unexpected column '" + h + "'");
    }
  }
  if (n_theta == 0 || n_eta == 0) throw ValidationError("chain needs theta_* and eta_* columns");
  if (table.rows.empty()) throw ValidationError("chain has no draws");
  chain.dim_theta = n_theta;
  const auto d = static_cast<Eigen::Index>(table.header.size());
  chain.draws.resize(static_cast<Eigen::Index>(table.rows.size()), d);
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (Eigen::Index j = 0; j < d; ++j) chain.draws(static_cast<Eigen::Index>(r), j) = table.rows[r][static_cast<std::size_t>(j)];
  return chain;
}

}  // namespace ptcure
