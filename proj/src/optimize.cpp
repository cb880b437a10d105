#include "ptcure/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace ptcure {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<Eigen::VectorXd> vertices;
  std::vector<double> values;
};

// One collapse-to-tolerance run; returns false when the budget ran out first.
bool run_simplex(const Objective& f, Simplex& s, const NelderMeadOptions& opts, std::size_t& evals) {
  const auto n = s.vertices.size() - 1;
  // The adaptive coefficients reduce to the classic (1, 2, 1/2, 1/2) at d = 2
  // and degenerate below it.
  const double d = static_cast<double>(n);
  const double dd = std::max(d, 2.0);
  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / dd;
  const double rho = 0.75 - 1.0 / (2.0 * dd);
  const double sigma = 1.0 - 1.0 / dd;

  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  std::vector<std::size_t> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    const double spread = s.values[worst] - s.values[best];
    if (std::isfinite(spread) && spread <= opts.ftol) return true;
    if (evals >= opts.max_evaluations) return false;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(s.vertices[0].size());
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst) centroid += s.vertices[i];
    centroid /= d;

    const Eigen::VectorXd xr = centroid + alpha * (centroid - s.vertices[worst]);
    const double fr = eval(xr);
    if (fr < s.values[best]) {
      const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        s.vertices[worst] = xe;
        s.values[worst] = fe;
      } else {
        s.vertices[worst] = xr;
        s.values[worst] = fr;
      }
      continue;
    }
    if (fr < s.values[second]) {
      s.vertices[worst] = xr;
      s.values[worst] = fr;
      continue;
    }
    const bool outside = fr < s.values[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + rho * (xr - centroid)) : Eigen::VectorXd(centroid + rho * (s.vertices[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : s.values[worst])) {
      s.vertices[worst] = xc;
      s.values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      s.vertices[i] = s.vertices[best] + sigma * (s.vertices[i] - s.vertices[best]);
      s.values[i] = eval(s.vertices[i]);
    }
  }
}

Simplex make_simplex(const Objective& f, const Eigen::VectorXd& x0, double f0, double step, std::size_t& evals) {
  const auto n = static_cast<std::size_t>(x0.size());
  Simplex s;
  s.vertices.push_back(x0);
  s.values.push_back(f0);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    const auto j = static_cast<Eigen::Index>(i);
    v[j] += step * (1.0 + std::abs(x0[j]));
    ++evals;
    const double fv = f(v);
    s.vertices.push_back(std::move(v));
    s.values.push_back(std::isfinite(fv) ? fv : kInf);
  }
  return s;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadOptions& opts) {
  NelderMeadResult res;
  res.x = start;
  ++res.evaluations;
  res.value = f(start);
  if (!std::isfinite(res.value)) res.value = kInf;
  if (start.size() == 0) {
    res.converged = true;
    return res;
  }
  double step = opts.step;
  while (true) {
    Simplex s = make_simplex(f, res.x, res.value, step, res.evaluations);
    const bool collapsed = run_simplex(f, s, opts, res.evaluations);
    const auto best = static_cast<std::size_t>(std::min_element(s.values.begin(), s.values.end()) - s.values.begin());
    const double improvement = res.value - s.values[best];
    if (s.values[best] < res.value) {
      res.x = s.vertices[best];
      res.value = s.values[best];
    }
    if (!collapsed) return res;
    if (!(improvement > opts.ftol)) {
      res.converged = std::isfinite(res.value);
      return res;
    }
    // Later restarts probe a smaller neighbourhood of the incumbent.
    step = std::max(step * 0.5, 1e-4);
  }
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const auto n = x.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = rel_step * (1.0 + std::abs(x[i]));
  const double f0 = f(x);
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = x[i] + h[i];
    const double fp = f(p);
    p[i] = x[i] - h[i];
    const double fm = f(p);
    p[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      p[i] = x[i] + h[i];
      p[j] = x[j] + h[j];
      const double fpp = f(p);
      p[j] = x[j] - h[j];
      const double fpm = f(p);
      p[i] = x[i] - h[i];
      const double fmm = f(p);
      p[j] = x[j] + h[j];
      const double fmp = f(p);
      p[i] = x[i];
      p[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace ptcure
