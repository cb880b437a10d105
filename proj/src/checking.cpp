#include "ptcure/checking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptcure/errors.hpp"
#include "ptcure/summary.hpp"

namespace ptcure {

CpoResult cpo(const PosteriorChain& chain, const CurrentStatusDataset& data) {
  const auto m0 = chain.m0();
  if (m0 == 0) throw ValidationError("cpo: chain has no draws");
  const auto n = data.size();
  // neg_log_p(i, m) = -log P_i^{(m)}
  Eigen::MatrixXd neg_log_p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m0));
  for (std::size_t m = 0; m < m0; ++m) {
    const ModelParams p = chain.draw(m);
    for (std::size_t i = 0; i < n; ++i)
      neg_log_p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
          -log_interval_probability(p, data.grid(), data.observations()[i]);
  }
  CpoResult out;
  out.cpo.resize(n);
  const double log_m0 = std::log(static_cast<double>(m0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = neg_log_p.row(static_cast<Eigen::Index>(i));
    const double top = row.maxCoeff();
    if (!std::isfinite(top)) {
      out.cpo[i] = 0.0;
      out.zero_probability.push_back(i);
      continue;
    }
    const double lse = top + std::log((row.array() - top).exp().sum());
    out.cpo[i] = std::exp(-(lse - log_m0));
  }
  return out;
}

double lpml(const std::vector<double>& cpo_values) {
  double total = 0.0;
  for (double c : cpo_values) total += c > 0.0 ? std::log(c) : -std::numeric_limits<double>::infinity();
  return total;
}

DicResult dic(const PosteriorChain& chain, const CurrentStatusDataset& data) {
  const auto m0 = chain.m0();
  if (m0 == 0) throw ValidationError("dic: chain has no draws");
  double sum = 0.0;
  for (std::size_t m = 0; m < m0; ++m) {
    const double dev = -2.0 * log_likelihood(chain.draw(m), data);
    if (!std::isfinite(dev)) throw NumericalError("dic: deviance is not finite at retained draw " + std::to_string(m));
    sum += dev;
  }
  DicResult r;
  r.dbar = sum / static_cast<double>(m0);
  r.dhat = -2.0 * log_likelihood(posterior_mean(chain), data);
  if (!std::isfinite(r.dhat)) throw NumericalError("dic: deviance at the posterior mean is not finite");
  r.p_d = r.dbar - r.dhat;
  r.dic = 2.0 * r.dbar - r.dhat;
  return r;
}

std::vector<double> scaled_cpo(const std::vector<double>& cpo_values) {
  if (cpo_values.empty()) throw ValidationError("scaled_cpo: no values");
  const double top = *std::max_element(cpo_values.begin(), cpo_values.end());
  if (!(top > 0.0)) throw ValidationError("scaled_cpo: every CPO is zero");
  std::vector<double> out(cpo_values.size());
  std::transform(cpo_values.begin(), cpo_values.end(), out.begin(), [top](double c) { return c / top; });
  return out;
}

std::size_t count_outliers(const std::vector<double>& scaled, double threshold) {
  return static_cast<std::size_t>(std::count_if(scaled.begin(), scaled.end(), [threshold](double v) { return v < threshold; }));
}

CheckReport model_check(const PosteriorChain& chain, const CurrentStatusDataset& data) {
  CheckReport r;
  auto c = cpo(chain, data);
  r.cpo = std::move(c.cpo);
  r.zero_probability = std::move(c.zero_probability);
  r.lpml = lpml(r.cpo);
  r.lpml_degenerate = !r.zero_probability.empty();
  if (!r.cpo.empty()) {
    r.scaled_cpo = scaled_cpo(r.cpo);
    r.outlier_count = count_outliers(r.scaled_cpo);
  }
  const auto d = dic(chain, data);
  r.dbar = d.dbar;
  r.dhat = d.dhat;
  r.p_d = d.p_d;
  r.dic = d.dic;
  return r;
}

}  // namespace ptcure
