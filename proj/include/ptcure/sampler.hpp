#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptcure/errors.hpp"
#include "ptcure/model.hpp"
#include "ptcure/rng.hpp"

namespace ptcure {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct SamplerConfig {
  std::size_t iterations = 70000;
  std::size_t burn_in = 10000;
  std::size_t thin = 15;
  // Proposal covariance is refreshed every adapt_interval iterations during
  // burn-in from the last adapt_fraction of the history, then frozen.
  std::size_t adapt_interval = 500;
  double adapt_fraction = 0.5;
  bool adapt = true;
  std::uint64_t seed = 1;
  std::size_t n_chains = 1;
  // Threads used by run_chains; results do not depend on it.
  std::size_t workers = 1;

  void validate() const;
  // m0 = floor((iterations - burn_in) / thin).
  std::size_t retained() const noexcept { return (iterations - burn_in) / thin; }
};

/// The random-walk state. log_post is always the target evaluated at
/// `current`; proposal_chol is the lower Cholesky factor of proposal_cov.
struct ChainState {
  Eigen::VectorXd current;
  double log_post = 0.0;
  Eigen::MatrixXd proposal_cov;
  Eigen::MatrixXd proposal_chol;
  std::size_t accept_count = 0;
  std::size_t iteration = 0;
  Rng rng{0};

  static ChainState start(const LogDensity& target, Eigen::VectorXd x0, const Eigen::MatrixXd& cov, Rng rng);
  // Throws NumericalError if cov is not positive definite.
  void set_proposal_cov(const Eigen::MatrixXd& cov);
};

// Thrown when the MAP search exhausts its budget; carries the best point.
class MapError : public NumericalError {
 public:
  MapError(const std::string& what, Eigen::VectorXd best, double best_value)
      : NumericalError(what), best_(std::move(best)), best_value_(best_value) {}
  const Eigen::VectorXd& best_point() const noexcept { return best_; }
  double best_log_posterior() const noexcept { return best_value_; }

 private:
  Eigen::VectorXd best_;
  double best_value_;
};

// Derivative-free maximisation of the log posterior with a 2000 * d
// evaluation budget per attempt and 1e-8 tolerance; a failed attempt is
// retried from the prior mean.
ModelParams map_estimate(const CurrentStatusDataset& data, const PriorSpec& prior, const ModelParams& init);
ModelParams map_estimate(const CurrentStatusDataset& data, const PriorSpec& prior);
Eigen::VectorXd map_estimate(const LogDensity& target, const Eigen::VectorXd& init, const Eigen::VectorXd& fallback);

// Central-difference Hessian of -target; throws NumericalError naming the
// first non-finite coordinate.
Eigen::MatrixXd observed_information(const LogDensity& target, const Eigen::VectorXd& at);
Eigen::MatrixXd observed_information(const CurrentStatusDataset& data, const PriorSpec& prior, const ModelParams& at);

// Inverse of info, ridge-regularised (lambda doubling from 1e-6 max|diag|)
// until positive definite.
Eigen::MatrixXd initial_proposal_cov(const Eigen::MatrixXd& info);

// One Metropolis step with a Gaussian proposal. RNG use per step: d normals
// for the increment (chol * z), then one uniform for omega. Accept iff
// log(omega) <= target(proposal) - log_post; non-finite targets reject.
// Returns whether the proposal was accepted.
bool mh_step(ChainState& state, const LogDensity& target);
ChainState mh_step(ChainState state, const CurrentStatusDataset& data, const PriorSpec& prior);

// (2.38^2 / d) * SampleCov(last ceil(fraction * rows) rows of history) + 1e-6 I,
// using the first `rows` rows of `history`. Fewer than d + 2 usable rows
// returns `current` unchanged.
Eigen::MatrixXd adapt_covariance(const Eigen::MatrixXd& history, std::size_t rows, double fraction,
                                 const Eigen::MatrixXd& current);

struct PosteriorChain {
  Eigen::MatrixXd draws;  // m0 x (dim_theta + n0)
  std::size_t dim_theta = 0;
  std::size_t accept_count = 0;
  double acceptance_rate = 0.0;  // accept_count / iterations
  Eigen::VectorXd map_point;
  Eigen::MatrixXd final_proposal_cov;
  SamplerConfig config;
  std::size_t chain_id = 0;
  double seconds_per_iteration = 0.0;  // sampling loop only

  std::size_t m0() const noexcept { return static_cast<std::size_t>(draws.rows()); }
  std::size_t n0() const noexcept { return static_cast<std::size_t>(draws.cols()) - dim_theta; }
  ModelParams draw(std::size_t m) const;
  std::vector<std::string> parameter_names() const;
};

// theta_0..theta_{k}, eta_1..eta_{n0}.
std::vector<std::string> parameter_names(std::size_t dim_theta, std::size_t n0);

struct ChainStart {
  Eigen::VectorXd point;
  Eigen::MatrixXd proposal_cov;
};

// MAP, observed information and initial proposal, shared by every chain.
ChainStart prepare_chain_start(const LogPosterior& target);

// Iterates mh_step from `start`, adapting during burn-in only. Deterministic
// given (config.seed, chain_id).
PosteriorChain run_adaptive_mh(const LogDensity& target, const ChainStart& start, const SamplerConfig& config,
                               std::size_t chain_id, std::size_t dim_theta);

PosteriorChain run_chain(const CurrentStatusDataset& data, const PriorSpec& prior, const SamplerConfig& config,
                         std::size_t chain_id = 0);
// n_chains independent chains, chain c on RNG stream (seed, c), ordered by id.
std::vector<PosteriorChain> run_chains(const CurrentStatusDataset& data, const PriorSpec& prior,
                                       const SamplerConfig& config);

// "# key: value" lines (chain_id, iterations, burn_in, thin, acceptance_rate),
// header theta_0,...,eta_n0, then one row per retained draw at full precision.
void write_chain(std::ostream& out, const PosteriorChain& chain);
// Reads the format above, restoring the metadata lines it recognises; other
// comment lines are ignored. dim_theta is the theta_* column count.
PosteriorChain read_chain(std::istream& in);

}  // namespace ptcure
