#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ptcure {

// One subject: monitoring time u, status delta = I(T <= u) and covariates with a
// leading intercept entry x[0] == 1.
struct Observation {
  double u = 0.0;
  int delta = 0;
  Eigen::VectorXd x;
};

/// Sorted distinct monitoring times s_1 < ... < s_n0. The baseline step CDF
/// can only jump at these knots.
class MonitoringGrid {
 public:
  MonitoringGrid() = default;
  // Knots must already be strictly increasing and positive.
  explicit MonitoringGrid(std::vector<double> knots);

  const std::vector<double>& knots() const noexcept { return knots_; }
  std::size_t n0() const noexcept { return knots_.size(); }
  double knot(std::size_t l) const { return knots_.at(l - 1); }  // 1-based

  // max{l : s_l <= t}, or 0 when t < s_1.
  std::size_t index_of(double t) const noexcept;

  bool operator==(const MonitoringGrid&) const = default;

 private:
  std::vector<double> knots_;
};

// Sort and deduplicate; throws ValidationError on an empty list or a value that
// is not positive and finite.
MonitoringGrid build_grid(std::vector<double> times);

/// Validated current status data with its monitoring grid. Immutable.
class CurrentStatusDataset {
 public:
  // Grid built from the observations' own monitoring times.
  explicit CurrentStatusDataset(std::vector<Observation> observations);
  // Explicit grid; every u must be a knot. This is the only way to build an
  // empty dataset (prior-only runs), which is why the dimension is passed.
  CurrentStatusDataset(std::vector<Observation> observations, MonitoringGrid grid, std::size_t dim);

  const std::vector<Observation>& observations() const noexcept { return obs_; }
  const MonitoringGrid& grid() const noexcept { return grid_; }
  // 1-based knot index of each observation.
  const std::vector<std::size_t>& knot_index() const noexcept { return knot_index_; }
  std::size_t size() const noexcept { return obs_.size(); }
  bool empty() const noexcept { return obs_.empty(); }
  // k + 1, intercept included.
  std::size_t dim() const noexcept { return dim_; }
  // n x (k+1) covariate matrix and n-vector of statuses, for vectorised use.
  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Eigen::VectorXi& status() const noexcept { return status_; }

 private:
  void validate_and_index();

  std::vector<Observation> obs_;
  MonitoringGrid grid_;
  std::vector<std::size_t> knot_index_;
  std::size_t dim_ = 0;
  Eigen::MatrixXd design_;
  Eigen::VectorXi status_;
};

struct ColumnMapping {
  std::string time_col = "u";
  std::string status_col = "delta";
  std::vector<std::string> covariate_cols;
};

// The intercept column is synthesised, never read.
CurrentStatusDataset parse_dataset(std::istream& in, const ColumnMapping& mapping);
CurrentStatusDataset load_dataset(const std::string& path, const ColumnMapping& mapping);

// Step estimate evaluated at the grid knots.
struct StepEstimate {
  std::vector<double> knots;
  std::vector<double> values;
};

// Current status NPMLE of the survival function: pool-adjacent-violators on the
// per-knot event fractions, weighted by per-knot counts, then S = 1 - F.
StepEstimate npmle_survival(const CurrentStatusDataset& data);

// Weighted isotonic (non-decreasing) regression.
std::vector<double> isotonic_regression(const std::vector<double>& y, const std::vector<double>& w);

// Product-limit estimate at each distinct time, treating (time, event) as
// right-censored data.
StepEstimate kaplan_meier(const std::vector<double>& times, const std::vector<int>& events);

// Two columns (knot, survival) with a header.
void write_step_estimate(std::ostream& out, const StepEstimate& est, const std::string& value_name);

}  // namespace ptcure
