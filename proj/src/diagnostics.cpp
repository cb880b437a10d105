#include "ptcure/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "ptcure/errors.hpp"
#include "ptcure/table.hpp"

namespace ptcure {
namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sum of (x_t - mean)(x_{t+lag} - mean) over t.
double lagged_sum(std::span<const double> x, double mean, std::size_t lag) {
  double s = 0.0;
  for (std::size_t t = 0; t + lag < x.size(); ++t) s += (x[t] - mean) * (x[t + lag] - mean);
  return s;
}

double sample_variance(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

AcfResult autocorrelation(std::span<const double> series, std::size_t max_lag) {
  if (max_lag < 1 || series.size() <= max_lag)
    throw ValidationError("autocorrelation: need series length > max_lag >= 1");
  AcfResult r;
  r.values.assign(max_lag + 1, 0.0);
  r.values[0] = 1.0;
  const double mean = mean_of(series);
  const double c0 = lagged_sum(series, mean, 0);
  if (!(c0 > 0.0)) {
    r.zero_variance = true;
    return r;
  }
  for (std::size_t lag = 1; lag <= max_lag; ++lag) r.values[lag] = lagged_sum(series, mean, lag) / c0;
  return r;
}

EssResult ess(std::span<const double> series) {
  const auto m = series.size();
  if (m < 10) throw ValidationError("ess: need at least 10 draws");
  EssResult r;
  const double mean = mean_of(series);
  const double c0 = lagged_sum(series, mean, 0);
  if (!(c0 > 0.0)) {
    r.zero_variance = true;
    r.ess = static_cast<double>(m);
    return r;
  }
  // tau = -1 + 2 * sum_k (rho_{2k} + rho_{2k+1}) = 1 + 2 * sum_{t>=1} rho_t
  double pair_total = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < m; ++k) {
    const double pair = (lagged_sum(series, mean, 2 * k) + lagged_sum(series, mean, 2 * k + 1)) / c0;
    if (pair < 0.0) break;
    pair_total += pair;
  }
  const double tau = -1.0 + 2.0 * pair_total;
  const double md = static_cast<double>(m);
  r.ess = tau > 0.0 ? std::min(md / tau, kEssCap * md) : kEssCap * md;
  return r;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2)
    throw ValidationError("gelman_rubin needs at least two chains; use split_chains() for a single chain");
  const auto n = chains.front().size();
  if (n < 10) throw ValidationError("gelman_rubin: chains need at least 10 draws");
  for (const auto& c : chains)
    if (c.size() != n) throw ValidationError("gelman_rubin: chains must have equal length");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(chains.size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const double mu = mean_of(c);
    means.push_back(mu);
    vars.push_back(sample_variance(c, mu));
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / md;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / md;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= md - 1.0;
  if (!(w > 0.0)) return b_over_n > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double v = (nd - 1.0) / nd * w + b_over_n;
  return std::max(1.0, std::sqrt(v / w));
}

std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const auto half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty() || bins == 0) throw ValidationError("histogram: need values and at least one bin");
  Histogram h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.lower = *lo;
  h.upper = *hi;
  h.counts.assign(bins, 0);
  const double width = (h.upper - h.lower) / static_cast<double>(bins);
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - h.lower) / width) : 0;
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

std::vector<double> column(const PosteriorChain& chain, std::size_t j) {
  const Eigen::VectorXd c = chain.draws.col(static_cast<Eigen::Index>(j));
  return {c.data(), c.data() + c.size()};
}

DiagnosticsReport diagnose(const std::vector<PosteriorChain>& chains, std::size_t max_lag) {
  if (chains.empty()) throw ValidationError("diagnose: no chains");
  DiagnosticsReport r;
  const auto& first = chains.front();
  r.names = first.parameter_names();
  r.n_chains = chains.size();
  r.m0 = first.m0();
  const auto d = static_cast<std::size_t>(first.draws.cols());
  const std::size_t lag = std::min(max_lag, r.m0 > 1 ? r.m0 - 1 : std::size_t{1});
  std::vector<double> psrf;
  double accept = 0.0, seconds = 0.0;
  for (const auto& c : chains) {
    if (static_cast<std::size_t>(c.draws.cols()) != d || c.m0() != r.m0)
      throw ValidationError("diagnose: chains must share dimensions and length");
    accept += c.acceptance_rate;
    seconds += c.seconds_per_iteration;
  }
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<std::vector<double>> cols;
    for (const auto& c : chains) cols.push_back(column(c, j));
    const auto acf = autocorrelation(cols.front(), lag);
    r.acf.push_back(acf.values);
    double total = 0.0, smallest = std::numeric_limits<double>::infinity();
    bool flat = false;
    for (const auto& col : cols) {
      const auto e = ess(col);
      total += e.ess;
      smallest = std::min(smallest, e.ess);
      flat = flat || e.zero_variance;
    }
    r.ess.push_back(total);
    r.min_chain_ess.push_back(smallest);
    r.zero_variance.push_back(flat);
    psrf.push_back(cols.size() >= 2 ? gelman_rubin(cols) : gelman_rubin(split_chains(cols)));
  }
  r.psrf = std::move(psrf);
  r.psrf_split = chains.size() < 2;
  r.acceptance_rate = accept / static_cast<double>(chains.size());
  r.seconds_per_iteration = seconds / static_cast<double>(chains.size());
  return r;
}

void write_trace(std::ostream& out, const PosteriorChain& chain) {
  const auto names = chain.parameter_names();
  out << "iteration";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index m = 0; m < chain.draws.rows(); ++m) {
    out << chain.config.burn_in + static_cast<std::size_t>(m + 1) * chain.config.thin;
    for (Eigen::Index j = 0; j < chain.draws.cols(); ++j) out << ',' << format_double(chain.draws(m, j));
    out << '\n';
  }
}

void write_histograms(std::ostream& out, const PosteriorChain& chain, std::size_t bins) {
  const auto names = chain.parameter_names();
  out << "parameter,bin,lower,upper,count\n";
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto col = column(chain, j);
    const auto h = histogram(col, bins);
    const double width = (h.upper - h.lower) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b)
      out << names[j] << ',' << b << ',' << format_double(h.lower + width * static_cast<double>(b)) << ','
          << format_double(b + 1 == bins ? h.upper : h.lower + width * static_cast<double>(b + 1)) << ','
          << h.counts[b] << '\n';
  }
}

void write_acf(std::ostream& out, const DiagnosticsReport& report) {
  out << "lag";
  for (const auto& n : report.names) out << ',' << n;
  out << '\n';
  if (report.acf.empty()) return;
  for (std::size_t lag = 0; lag < report.acf.front().size(); ++lag) {
    out << lag;
    for (const auto& a : report.acf) out << ',' << format_double(a[lag]);
    out << '\n';
  }
}

void export_trace(const PosteriorChain& chain, const std::string& path_prefix) {
  std::ofstream trace(path_prefix + "trace.csv");
  if (!trace) throw ValidationError("cannot write '" + path_prefix + "trace.csv'");
  write_trace(trace, chain);
  std::ofstream hist(path_prefix + "hist.csv");
  if (!hist) throw ValidationError("cannot write '" + path_prefix + "hist.csv'");
  write_histograms(hist, chain);
}

}  // namespace ptcure
