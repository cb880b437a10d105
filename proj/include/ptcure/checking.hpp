#pragma once

#include <cstddef>
#include <vector>

#include "ptcure/dataset.hpp"
#include "ptcure/sampler.hpp"

namespace ptcure {

struct CpoResult {
  std::vector<double> cpo;
  // Observations for which some draw gave a zero interval probability; their
  // CPO collapses to 0.
  std::vector<std::size_t> zero_probability;
};

struct DicResult {
  double dbar = 0.0;  // mean deviance over draws
  double dhat = 0.0;  // deviance at the posterior means
  double p_d = 0.0;
  double dic = 0.0;
};

struct CheckReport {
  std::vector<double> cpo;
  std::vector<double> scaled_cpo;
  double lpml = 0.0;
  double dbar = 0.0, dhat = 0.0, p_d = 0.0, dic = 0.0;
  std::size_t outlier_count = 0;  // scaled CPO below kOutlierThreshold
  std::vector<std::size_t> zero_probability;
  bool lpml_degenerate = false;  // some CPO was 0, so LPML is -inf
};

inline constexpr double kOutlierThreshold = 0.01;

// Harmonic mean of interval probabilities over draws, in the log domain.
CpoResult cpo(const PosteriorChain& chain, const CurrentStatusDataset& data);
// Sum of log CPO; -inf if any CPO is 0.
double lpml(const std::vector<double>& cpo_values);
// Deviance -2 log L (constant 0). Throws NumericalError naming the first draw
// whose deviance is not finite.
DicResult dic(const PosteriorChain& chain, const CurrentStatusDataset& data);
std::vector<double> scaled_cpo(const std::vector<double>& cpo_values);
std::size_t count_outliers(const std::vector<double>& scaled, double threshold = kOutlierThreshold);

CheckReport model_check(const PosteriorChain& chain, const CurrentStatusDataset& data);

}  // namespace ptcure
