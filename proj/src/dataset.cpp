#include "ptcure/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "ptcure/errors.hpp"
#include "ptcure/table.hpp"

namespace ptcure {

MonitoringGrid::MonitoringGrid(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw ValidationError("monitoring grid needs at least one knot");
  for (std::size_t l = 0; l < knots_.size(); ++l) {
    if (!(knots_[l] > 0.0) || !std::isfinite(knots_[l]))
      throw ValidationError("monitoring grid knots must be positive and finite");
    if (l > 0 && !(knots_[l] > knots_[l - 1]))
      throw ValidationError("monitoring grid knots must be strictly increasing");
  }
}

std::size_t MonitoringGrid::index_of(double t) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
}

MonitoringGrid build_grid(std::vector<double> times) {
  if (times.empty()) throw ValidationError("build_grid: no monitoring times");
  for (double t : times)
    if (!(t > 0.0) || !std::isfinite(t))
      throw ValidationError("build_grid: monitoring times must be positive and finite");
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return MonitoringGrid(std::move(times));
}

namespace {

std::vector<double> monitoring_times(const std::vector<Observation>& obs) {
  std::vector<double> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(o.u);
  return out;
}

}  // namespace

CurrentStatusDataset::CurrentStatusDataset(std::vector<Observation> observations) : obs_(std::move(observations)) {
  if (obs_.empty()) throw ValidationError("dataset has no observations");
  dim_ = static_cast<std::size_t>(obs_.front().x.size());
  for (const auto& o : obs_)
    if (!(o.u > 0.0) || !std::isfinite(o.u)) throw ValidationError("monitoring time must be positive and finite");
  grid_ = build_grid(monitoring_times(obs_));
  validate_and_index();
}

CurrentStatusDataset::CurrentStatusDataset(std::vector<Observation> observations, MonitoringGrid grid, std::size_t dim)
    : obs_(std::move(observations)), grid_(std::move(grid)), dim_(dim) {
  if (grid_.n0() == 0) throw ValidationError("dataset grid is empty");
  validate_and_index();
}

void CurrentStatusDataset::validate_and_index() {
  if (dim_ == 0) throw ValidationError("covariate vector must contain the intercept");
  const auto n = obs_.size();
  knot_index_.resize(n);
  design_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim_));
  status_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = obs_[i];
    const std::string where = "observation " + std::to_string(i + 1) + ": ";
    if (!(o.u > 0.0) || !std::isfinite(o.u)) throw ValidationError(where + "monitoring time must be positive");
    if (o.delta != 0 && o.delta != 1) throw ValidationError(where + "status must be 0 or 1");
    if (static_cast<std::size_t>(o.x.size()) != dim_)
      throw ValidationError(where + "covariate dimension differs from the first observation");
    if (o.x[0] != 1.0) throw ValidationError(where + "x[0] must be the intercept 1");
    if (!o.x.allFinite()) throw ValidationError(where + "covariates must be finite");
    const auto l = grid_.index_of(o.u);
    if (l == 0 || grid_.knot(l) != o.u) throw ValidationError(where + "monitoring time is not a grid knot");
    knot_index_[i] = l;
    design_.row(static_cast<Eigen::Index>(i)) = o.x.transpose();
    status_[static_cast<Eigen::Index>(i)] = o.delta;
  }
}

CurrentStatusDataset parse_dataset(std::istream& in, const ColumnMapping& mapping) {
  const NumericTable table = read_numeric_table(in);
  const auto tcol = table.column(mapping.time_col);
  const auto scol = table.column(mapping.status_col);
  std::vector<std::size_t> xcols;
  for (const auto& name : mapping.covariate_cols) xcols.push_back(table.column(name));
  if (table.rows.empty()) throw ValidationError("dataset has no observations");

  std::vector<Observation> obs;
  obs.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "line " + std::to_string(table.line_numbers[r]) + ": ";
    Observation o;
    o.u = row[tcol];
    if (!(o.u > 0.0) || !std::isfinite(o.u)) throw ValidationError(where + "monitoring time must be positive");
    const double d = row[scol];
    if (d != 0.0 && d != 1.0) throw ValidationError(where + "status must be 0 or 1");
    o.delta = static_cast<int>(d);
    o.x.resize(static_cast<Eigen::Index>(xcols.size() + 1));
    o.x[0] = 1.0;
    for (std::size_t j = 0; j < xcols.size(); ++j) {
      const double v = row[xcols[j]];
      if (!std::isfinite(v)) throw ValidationError(where + "covariate '" + mapping.covariate_cols[j] + "' is not finite");
      o.x[static_cast<Eigen::Index>(j + 1)] = v;
    }
    obs.push_back(std::move(o));
  }
  return CurrentStatusDataset(std::move(obs));
}

CurrentStatusDataset load_dataset(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  return parse_dataset(in, mapping);
}

std::vector<double> isotonic_regression(const std::vector<double>& y, const std::vector<double>& w) {
  struct Block {
    double value, weight;
    std::size_t size;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double total = a.weight + b.weight;
      a.value = (a.value * a.weight + b.value * b.weight) / total;
      a.weight = total;
      a.size += b.size;
    }
  }
  std::vector<double> fit;
  fit.reserve(y.size());
  for (const auto& b : blocks) fit.insert(fit.end(), b.size, b.value);
  return fit;
}

StepEstimate npmle_survival(const CurrentStatusDataset& data) {
  if (data.empty()) throw ValidationError("npmle_survival: dataset is empty");
  const auto n0 = data.grid().n0();
  std::vector<double> events(n0, 0.0), counts(n0, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto l = data.knot_index()[i] - 1;
    counts[l] += 1.0;
    events[l] += data.observations()[i].delta;
  }
  // Knots come from the data, so every count is positive.
  std::vector<double> frac(n0);
  for (std::size_t l = 0; l < n0; ++l) frac[l] = events[l] / counts[l];
  const auto cdf = isotonic_regression(frac, counts);
  StepEstimate est{data.grid().knots(), std::vector<double>(n0)};
  for (std::size_t l = 0; l < n0; ++l) est.values[l] = std::clamp(1.0 - cdf[l], 0.0, 1.0);
  return est;
}

StepEstimate kaplan_meier(const std::vector<double>& times, const std::vector<int>& events) {
  if (times.size() != events.size()) throw ValidationError("kaplan_meier: length mismatch");
  if (times.empty()) throw ValidationError("kaplan_meier: no observations");
  std::map<double, std::pair<double, double>> at;  // time -> (events, removals)
  for (std::size_t i = 0; i < times.size(); ++i) {
    auto& slot = at[times[i]];
    slot.first += events[i] ? 1.0 : 0.0;
    slot.second += 1.0;
  }
  StepEstimate est;
  double at_risk = static_cast<double>(times.size());
  double s = 1.0;
  for (const auto& [t, c] : at) {
    if (at_risk > 0.0) s *= 1.0 - c.first / at_risk;
    at_risk -= c.second;
    est.knots.push_back(t);
    est.values.push_back(s);
  }
  return est;
}

void write_step_estimate(std::ostream& out, const StepEstimate& est, const std::string& value_name) {
  out << "knot," << value_name << '\n';
  for (std::size_t l = 0; l < est.knots.size(); ++l)
    out << format_double(est.knots[l]) << ',' << format_double(est.values[l]) << '\n';
}

}  // namespace ptcure
