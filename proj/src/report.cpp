#include "ptcure/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"
#include "ptcure/table.hpp"

namespace ptcure {
namespace {

using json = nlohmann::json;

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json intervals(const std::vector<Interval>& ci) {
  json a = json::array();
  for (const auto& i : ci) a.push_back({i.lower, i.upper});
  return a;
}

// NaN and infinities have no JSON spelling; they become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<ProfileEstimate> profile_estimates(const FitSummary& fit, const MonitoringGrid& grid,
                                               const std::vector<Profile>& profiles) {
  std::vector<ProfileEstimate> out;
  for (const auto& p : profiles) {
    ProfileEstimate e{p.name, p.x, estimate_cure(fit.theta_mean, p.x),
                      estimate_survival_curve(fit.theta_mean, fit.eta_mean, grid, p.x)};
    out.push_back(std::move(e));
  }
  return out;
}

void write_hash_comment(std::ostream& out, const std::string& hash) { out << "# config_hash: " << hash << '\n'; }

std::string fit_json(const FitSummary& fit, const CheckReport& check, const DiagnosticsReport& diag,
                     const std::vector<ProfileEstimate>& profiles, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["summary"] = {{"theta_mean", vec(fit.theta_mean)},
                  {"theta_sd", vec(fit.theta_sd)},
                  {"theta_ci", intervals(fit.theta_ci)},
                  {"eta_mean", vec(fit.eta_mean)},
                  {"eta_sd", vec(fit.eta_sd)},
                  {"eta_ci", intervals(fit.eta_ci)},
                  {"knots", fit.knots},
                  {"F_tilde", fit.F_tilde},
                  {"level", fit.level},
                  {"m0", fit.m0},
                  {"chains", fit.n_chains},
                  {"acceptance_rate", fit.acceptance_rate}};
  if (fit.F_functional_mean) j["summary"]["F_functional_mean"] = *fit.F_functional_mean;
  json prof = json::array();
  for (const auto& p : profiles)
    prof.push_back({{"name", p.name}, {"x", vec(p.x)}, {"cure", p.cure}, {"survival", p.survival}});
  j["profiles"] = prof;
  j["check"] = {{"lpml", num(check.lpml)},        {"dic", num(check.dic)},
                {"dbar", num(check.dbar)},        {"dhat", num(check.dhat)},
                {"p_d", num(check.p_d)},          {"outliers", check.outlier_count},
                {"zero_probability", check.zero_probability}};
  j["diagnostics"] = json::parse(diagnostics_json(diag, hash));
  j["diagnostics"].erase("config_hash");
  return j.dump(2) + "\n";
}

std::string timing_json(const std::vector<PosteriorChain>& chains, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  json per = json::array();
  for (const auto& c : chains) per.push_back(c.seconds_per_iteration);
  j["seconds_per_iteration"] = per;
  return j.dump(2) + "\n";
}

std::string diagnostics_json(const DiagnosticsReport& diag, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["parameters"] = diag.names;
  j["ess"] = diag.ess;
  j["min_chain_ess"] = diag.min_chain_ess;
  if (diag.psrf) {
    json p = json::array();
    for (double v : *diag.psrf) p.push_back(num(v));
    j["psrf"] = p;
    j["psrf_split"] = diag.psrf_split;
  }
  j["zero_variance"] = diag.zero_variance;
  j["acceptance_rate"] = diag.acceptance_rate;
  j["chains"] = diag.n_chains;
  j["m0"] = diag.m0;
  return j.dump(2) + "\n";
}

std::string study_json(const StudyReport& r, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  auto col = [](const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
  };
  j["true"] = col(r.theta_true);
  j["mean"] = col(r.mean);
  j["abs_bias"] = col(r.abs_bias);
  j["epsd"] = col(r.epsd);
  j["ssd"] = col(r.ssd);
  j["cp"] = col(r.cp);
  j["mse"] = r.mse;
  j["max_mse"] = r.max_mse;
  j["completed"] = r.completed;
  j["failures"] = r.failures;
  return j.dump(2) + "\n";
}

void write_study_table(std::ostream& out, const StudyReport& r) {
  out << "parameter,True,Mean,Abs. bias,EPSD,SSD,CP\n";
  for (Eigen::Index j = 0; j < r.theta_true.size(); ++j)
    out << "theta_" << j << ',' << format_double(r.theta_true[j]) << ',' << format_double(r.mean[j]) << ','
        << format_double(r.abs_bias[j]) << ',' << format_double(r.epsd[j]) << ',' << format_double(r.ssd[j]) << ','
        << format_double(r.cp[j]) << '\n';
  out << "MaxMSE,," << format_double(r.max_mse) << ",,,,\n";
}

void write_replicates(std::ostream& out, const StudyReport& r) {
  const auto d = r.theta_true.size();
  out << "rep,ok,cured,acceptance_rate";
  for (Eigen::Index j = 0; j < d; ++j) out << ",mean_" << j << ",sd_" << j << ",covered_" << j;
  out << ",max_sq_error_F,error\n";
  for (const auto& rec : r.records) {
    out << rec.rep << ',' << (rec.ok ? 1 : 0) << ',' << rec.cured << ',' << format_double(rec.acceptance_rate);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (rec.ok)
        out << ',' << format_double(rec.theta_mean[j]) << ',' << format_double(rec.theta_sd[j]) << ','
            << (rec.theta_ci[j].contains(r.theta_true[j]) ? 1 : 0);
      else
        out << ",,,";
    }
    double worst = 0.0;
    for (std::size_t l = 0; l < rec.F_tilde.size(); ++l)
      worst = std::max(worst, (rec.F_tilde[l] - rec.F_true[l]) * (rec.F_tilde[l] - rec.F_true[l]));
    std::string err = rec.error;
    for (auto& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << ',' << (rec.ok ? format_double(worst) : "") << ',' << err << '\n';
  }
}

void write_scaled_cpo(std::ostream& out, const CheckReport& check, const CurrentStatusDataset& data) {
  out << "index,u,scaled_cpo\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << i + 1 << ',' << format_double(data.observations()[i].u) << ',' << format_double(check.scaled_cpo[i]) << '\n';
}

void write_survival_curves(std::ostream& out, const std::vector<double>& knots,
                           const std::vector<ProfileEstimate>& profiles) {
  out << "knot";
  for (const auto& p : profiles) out << ',' << p.name;
  out << '\n';
  for (std::size_t l = 0; l < knots.size(); ++l) {
    out << format_double(knots[l]);
    for (const auto& p : profiles) out << ',' << format_double(p.survival[l]);
    out << '\n';
  }
}

void write_F_tilde(std::ostream& out, const FitSummary& fit) {
  out << "knot,F_tilde" << (fit.F_functional_mean ? ",F_functional_mean" : "") << '\n';
  for (std::size_t l = 0; l < fit.knots.size(); ++l) {
    out << format_double(fit.knots[l]) << ',' << format_double(fit.F_tilde[l]);
    if (fit.F_functional_mean) out << ',' << format_double((*fit.F_functional_mean)[l]);
    out << '\n';
  }
}

void write_text_report(std::ostream& out, const FitSummary& fit, const CheckReport& check,
                       const std::vector<ProfileEstimate>& profiles) {
  const int pct = static_cast<int>(std::lround(fit.level * 100.0));
  out << "Posterior summary (" << fit.n_chains << " chain" << (fit.n_chains == 1 ? "" : "s") << ", m0 = " << fit.m0
      << " draws per chain, acceptance " << fixed(fit.acceptance_rate, 3) << ")\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %10s   %s\n", "Parameter", "Estimate", "Post. SD",
                (std::to_string(pct) + "% BCI").c_str());
  out << line;
  for (Eigen::Index j = 0; j < fit.theta_mean.size(); ++j) {
    std::snprintf(line, sizeof line, "%-10s %10s %10s   (%s, %s)\n", ("theta_" + std::to_string(j)).c_str(),
                  fixed(fit.theta_mean[j]).c_str(), fixed(fit.theta_sd[j]).c_str(),
                  fixed(fit.theta_ci[j].lower).c_str(), fixed(fit.theta_ci[j].upper).c_str());
    out << line;
  }
  if (!profiles.empty()) {
    out << "\nCure rates\n";
    for (const auto& p : profiles) {
      std::snprintf(line, sizeof line, "  %-20s %s\n", p.name.c_str(), fixed(p.cure).c_str());
      out << line;
    }
  }
  out << "\nLPML " << fixed(check.lpml, 2) << "   DIC " << fixed(check.dic, 2) << "   p_D " << fixed(check.p_d, 2)
      << "\nScaled CPO below " << kOutlierThreshold << ": " << check.outlier_count << '\n';
  if (!check.zero_probability.empty())
    out << "warning: " << check.zero_probability.size() << " observation(s) had a zero interval probability\n";
}

void write_dataset(std::ostream& out, const CurrentStatusDataset& data, const std::vector<std::string>& covariate_names,
                   const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "u,delta";
  for (const auto& n : covariate_names) out << ',' << n;
  out << '\n';
  for (const auto& o : data.observations()) {
    out << format_double(o.u) << ',' << o.delta;
    for (Eigen::Index j = 1; j < o.x.size(); ++j) out << ',' << format_double(o.x[j]);
    out << '\n';
  }
}

}  // namespace ptcure
