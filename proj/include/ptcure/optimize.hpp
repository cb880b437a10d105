#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace ptcure {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  // Converged when max f - min f over the simplex is at most ftol.
  double ftol = 1e-8;
  // Initial simplex edge along coordinate i is step * (1 + |x_i|).
  double step = 0.1;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Minimises `f` with the dimension-adaptive Nelder-Mead coefficients
/// (reflection 1, expansion 1 + 2/d, contraction 0.75 - 1/(2d), shrink 1 - 1/d;
/// classic values for d < 3).
/// Non-finite values are treated as +inf. After the simplex collapses, the
/// search restarts from the best vertex with a fresh simplex and only stops
/// once a restart yields no improvement beyond ftol.
NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadOptions& opts);

// Central-difference Hessian of f at x with per-coordinate step
// h_i = rel_step * (1 + |x_i|); returned symmetrised as (H + H')/2.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-4);

}  // namespace ptcure
