#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptcure/sampler.hpp"

namespace ptcure {

struct AcfResult {
  std::vector<double> values;  // lags 0..max_lag
  bool zero_variance = false;
};

// Biased (1/m normalised) sample autocorrelations. A constant series yields
// (1, 0, 0, ...) with zero_variance set.
AcfResult autocorrelation(std::span<const double> series, std::size_t max_lag);

struct EssResult {
  double ess = 0.0;
  bool zero_variance = false;
};

/// m / (1 + 2 sum rho_t) with Geyer's initial positive sequence: lag pairs
/// (rho_{2k}, rho_{2k+1}) are summed until the first pair with negative sum.
/// Capped at kEssCap * m. Constant series report m with zero_variance set.
EssResult ess(std::span<const double> series);
inline constexpr double kEssCap = 1.05;

// Classic PSRF sqrt(V/W), V = (n-1)/n W + B/n, floored at 1. Every chain must
// have the same length >= 10; fewer than two chains is a ValidationError.
double gelman_rubin(const std::vector<std::vector<double>>& chains);
// Halves of each chain treated as separate chains (odd lengths drop the middle draw).
std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains);

struct Histogram {
  double lower = 0.0, upper = 0.0;
  std::vector<std::size_t> counts;
};
// Equal-width bins over [min, max]; the maximum falls in the last bin.
Histogram histogram(std::span<const double> values, std::size_t bins = 50);

struct DiagnosticsReport {
  std::vector<std::string> names;
  std::vector<std::vector<double>> acf;  // chain 0, per parameter
  std::vector<double> ess;               // summed over chains
  std::vector<double> min_chain_ess;     // smallest single-chain value
  std::optional<std::vector<double>> psrf;
  bool psrf_split = false;  // single chain: split-chain PSRF
  std::vector<bool> zero_variance;
  double acceptance_rate = 0.0;
  double seconds_per_iteration = 0.0;
  std::size_t n_chains = 0;
  std::size_t m0 = 0;  // per chain
};

DiagnosticsReport diagnose(const std::vector<PosteriorChain>& chains, std::size_t max_lag = 50);

// Column j of the draws as a vector.
std::vector<double> column(const PosteriorChain& chain, std::size_t j);

// trace: header iteration,theta_0,...; one row per retained draw, iteration
// being the MH iteration it was taken at. hist: parameter,bin,lower,upper,count.
void write_trace(std::ostream& out, const PosteriorChain& chain);
void write_histograms(std::ostream& out, const PosteriorChain& chain, std::size_t bins = 50);
void write_acf(std::ostream& out, const DiagnosticsReport& report);
// Writes <prefix>trace.csv and <prefix>hist.csv; throws ValidationError if a
// file cannot be opened.
void export_trace(const PosteriorChain& chain, const std::string& path_prefix);

}  // namespace ptcure
