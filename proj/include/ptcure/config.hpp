#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptcure/dataset.hpp"
#include "ptcure/model.hpp"
#include "ptcure/sampler.hpp"
#include "ptcure/simulation.hpp"

namespace ptcure {

struct DataConfig {
  std::string path;  // resolved against the config file's directory
  ColumnMapping mapping;
};

// Where the eta prior mean comes from.
enum class MuSource { explicit_values, npmle, gompertz };

struct EtaPriorConfig {
  MuSource source = MuSource::npmle;
  std::vector<double> mu;  // explicit_values
  double min_increment = 0.01;
  double min_survival = 0.01;
  GompertzParams gompertz;  // source == gompertz
  double scale = 1.0;
  double rho = 0.3;
  std::optional<Eigen::MatrixXd> cov;  // replaces scale * AR1(rho)
};

struct PriorConfig {
  std::vector<double> theta_mean;
  std::vector<double> theta_var;
  EtaPriorConfig eta;
};

// A named covariate vector (intercept included) for cure and survival output.
struct Profile {
  std::string name;
  Eigen::VectorXd x;
};

struct OutputConfig {
  double level = 0.95;
  bool functional_mean = false;
  std::size_t acf_lags = 50;
  std::vector<Profile> profiles;
};

/// Everything one CLI run needs. Sections a command does not use may be absent.
struct RunConfig {
  std::optional<DataConfig> data;
  std::optional<PriorConfig> prior;
  SamplerConfig sampler;
  OutputConfig output;
  std::optional<ScenarioConfig> scenario;
  std::size_t simulate_rep = 0;
  std::vector<std::string> diagnose_chains;

  std::string canonical;  // resolved config as compact JSON, workers excluded
  std::uint64_t hash = 0;  // FNV-1a of canonical
  std::string hash_hex() const;
};

struct ConfigOverrides {
  std::optional<std::size_t> chains;
  std::optional<std::uint64_t> seed;  // sampler and scenario seeds
  std::optional<std::size_t> workers;
};

std::uint64_t fnv1a64(const std::string& bytes) noexcept;

// Throws ValidationError whose message starts with the offending field path,
// e.g. "prior.theta_var[1]: must be > 0". Unknown keys are rejected.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".",
                           const ConfigOverrides& overrides = {});
RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides = {});

// Builds the prior for a dataset, eliciting mu from the NPMLE or a Gompertz
// curve when requested.
PriorSpec build_prior(const PriorConfig& cfg, const CurrentStatusDataset& data);

}  // namespace ptcure
