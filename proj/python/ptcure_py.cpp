#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ptcure/checking.hpp"
#include "ptcure/cli.hpp"
#include "ptcure/diagnostics.hpp"
#include "ptcure/errors.hpp"
#include "ptcure/model.hpp"
#include "ptcure/sampler.hpp"
#include "ptcure/simulation.hpp"
#include "ptcure/summary.hpp"

namespace py = pybind11;
using namespace ptcure;

namespace {

// X holds covariates without the intercept column.
CurrentStatusDataset make_dataset(const Eigen::VectorXd& u, const Eigen::VectorXi& delta, const Eigen::MatrixXd& X) {
  if (u.size() != delta.size() || u.size() != X.rows())
    throw ValidationError("u, delta and X must have the same number of rows");
  std::vector<Observation> obs;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    Eigen::VectorXd x(X.cols() + 1);
    x[0] = 1.0;
    x.tail(X.cols()) = X.row(i).transpose();
    obs.push_back({u[i], delta[i], x});
  }
  return CurrentStatusDataset(std::move(obs));
}

PriorSpec make_prior(const Eigen::VectorXd& tau, const Eigen::VectorXd& theta_var, const Eigen::VectorXd& mu,
                     double scale, double rho, std::optional<Eigen::MatrixXd> cov) {
  PriorSpec p;
  p.tau = tau;
  p.sigma_theta_diag = theta_var;
  p.mu = mu;
  p.eta_cov = cov ? EtaCovariance::dense(*cov) : EtaCovariance::ar1(scale, rho);
  return p;
}

py::dict summary_dict(const FitSummary& s) {
  py::dict d;
  d["theta_mean"] = s.theta_mean;
  d["theta_sd"] = s.theta_sd;
  d["eta_mean"] = s.eta_mean;
  d["eta_sd"] = s.eta_sd;
  std::vector<std::pair<double, double>> ci;
  for (const auto& i : s.theta_ci) ci.emplace_back(i.lower, i.upper);
  d["theta_ci"] = ci;
  d["knots"] = s.knots;
  d["F_tilde"] = s.F_tilde;
  d["acceptance_rate"] = s.acceptance_rate;
  d["m0"] = s.m0;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ptcure, m) {
  m.doc() = "Bayesian promotion time cure model for current status data";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<CurrentStatusDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("u"), py::arg("delta"), py::arg("X"))
      .def_property_readonly("size", &CurrentStatusDataset::size)
      .def_property_readonly("dim", &CurrentStatusDataset::dim)
      .def_property_readonly("knots", [](const CurrentStatusDataset& d) { return d.grid().knots(); })
      .def("npmle", [](const CurrentStatusDataset& d) { return npmle_survival(d).values; });

  py::class_<PriorSpec>(m, "Prior")
      .def(py::init(&make_prior), py::arg("tau"), py::arg("theta_var"), py::arg("mu"), py::arg("scale") = 1.0,
           py::arg("rho") = 0.3, py::arg("cov") = std::nullopt);

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &SamplerConfig::iterations)
      .def_readwrite("burn_in", &SamplerConfig::burn_in)
      .def_readwrite("thin", &SamplerConfig::thin)
      .def_readwrite("adapt_interval", &SamplerConfig::adapt_interval)
      .def_readwrite("adapt_fraction", &SamplerConfig::adapt_fraction)
      .def_readwrite("adapt", &SamplerConfig::adapt)
      .def_readwrite("seed", &SamplerConfig::seed)
      .def_readwrite("n_chains", &SamplerConfig::n_chains)
      .def_readwrite("workers", &SamplerConfig::workers);

  py::class_<PosteriorChain>(m, "Chain")
      .def_readonly("draws", &PosteriorChain::draws)
      .def_readonly("acceptance_rate", &PosteriorChain::acceptance_rate)
      .def_readonly("map_point", &PosteriorChain::map_point)
      .def_readonly("chain_id", &PosteriorChain::chain_id)
      .def_property_readonly("names", &PosteriorChain::parameter_names);

  m.def(
      "log_likelihood",
      [](const Eigen::VectorXd& theta, const Eigen::VectorXd& eta, const CurrentStatusDataset& d) {
        return log_likelihood({theta, eta}, d);
      },
      py::arg("theta"), py::arg("eta"), py::arg("data"));
  m.def(
      "log_posterior",
      [](const Eigen::VectorXd& theta, const Eigen::VectorXd& eta, const CurrentStatusDataset& d, const PriorSpec& p) {
        return log_posterior({theta, eta}, d, p);
      },
      py::arg("theta"), py::arg("eta"), py::arg("data"), py::arg("prior"));
  m.def("step_cdf_at_knots", &step_cdf_at_knots, py::arg("eta"));
  m.def("cure_fraction", &cure_fraction, py::arg("theta"), py::arg("x"));

  m.def("run_chains", &run_chains, py::arg("data"), py::arg("prior"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "summarize",
      [](const std::vector<PosteriorChain>& chains, const CurrentStatusDataset& d, double level) {
        return summary_dict(summarize(chains, d.grid(), level));
      },
      py::arg("chains"), py::arg("data"), py::arg("level") = 0.95);
  m.def(
      "model_check",
      [](const std::vector<PosteriorChain>& chains, const CurrentStatusDataset& d) {
        const auto r = model_check(pool_chains(chains), d);
        py::dict out;
        out["cpo"] = r.cpo;
        out["scaled_cpo"] = r.scaled_cpo;
        out["lpml"] = r.lpml;
        out["dic"] = r.dic;
        out["dbar"] = r.dbar;
        out["dhat"] = r.dhat;
        out["p_d"] = r.p_d;
        out["outliers"] = r.outlier_count;
        return out;
      },
      py::arg("chains"), py::arg("data"));
  m.def(
      "diagnose",
      [](const std::vector<PosteriorChain>& chains, std::size_t max_lag) {
        const auto r = diagnose(chains, max_lag);
        py::dict out;
        out["names"] = r.names;
        out["ess"] = r.ess;
        out["psrf"] = r.psrf ? py::cast(*r.psrf) : py::none();
        out["psrf_split"] = r.psrf_split;
        out["acceptance_rate"] = r.acceptance_rate;
        out["acf"] = r.acf;
        return out;
      },
      py::arg("chains"), py::arg("max_lag") = 50);
  m.def(
      "ess", [](const std::vector<double>& x) { return ess(x).ess; }, py::arg("series"));
  m.def("gelman_rubin", &gelman_rubin, py::arg("chains"));

  m.def(
      "gompertz_survival", [](double a, double b, double t) { return gompertz_survival({a, b}, t); }, py::arg("a"),
      py::arg("b"), py::arg("t"));
  m.def(
      "gompertz_inverse_survival", [](double a, double b, double s) { return gompertz_inverse_survival({a, b}, s); },
      py::arg("a"), py::arg("b"), py::arg("s"));
  m.def("elicit_mu", &elicit_mu, py::arg("survival"));
  m.def(
      "simulate",
      [](std::size_t n, const Eigen::VectorXd& theta_true, std::uint64_t seed, std::size_t rep) {
        ScenarioConfig cfg;
        cfg.n = n;
        cfg.theta_true = theta_true;
        cfg.seed = seed;
        cfg.validate();
        return generate_dataset(cfg, rep).data;
      },
      py::arg("n") = 200, py::arg("theta_true") = Eigen::VectorXd(Eigen::Vector3d(0.6, -0.5, 0.7)),
      py::arg("seed") = 1, py::arg("rep") = 0);

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config, const std::string& out) {
        CliOptions opts;
        opts.config_path = config;
        opts.out_dir = out;
        std::ostringstream log, err;
        int code;
        {
          py::gil_scoped_release release;
          code = ptcure::run_command(command, opts, log, err);
        }
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out"));
}
