#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptcure/checking.hpp"
#include "ptcure/config.hpp"
#include "ptcure/dataset.hpp"
#include "ptcure/diagnostics.hpp"
#include "ptcure/simulation.hpp"
#include "ptcure/summary.hpp"

namespace ptcure {

struct ProfileEstimate {
  std::string name;
  Eigen::VectorXd x;
  double cure = 0.0;
  std::vector<double> survival;  // plug-in population survival at each knot
};

std::vector<ProfileEstimate> profile_estimates(const FitSummary& fit, const MonitoringGrid& grid,
                                               const std::vector<Profile>& profiles);

// Every file carries the config hash: a "config_hash" member in JSON and a
// leading "# config_hash: ..." comment line in delimited tables.
void write_hash_comment(std::ostream& out, const std::string& hash);

std::string fit_json(const FitSummary& fit, const CheckReport& check, const DiagnosticsReport& diag,
                     const std::vector<ProfileEstimate>& profiles, const std::string& hash);
// Wall-clock timing is kept apart so every other output is reproducible.
std::string timing_json(const std::vector<PosteriorChain>& chains, const std::string& hash);
std::string diagnostics_json(const DiagnosticsReport& diag, const std::string& hash);
std::string study_json(const StudyReport& report, const std::string& hash);

// parameter,True,Mean,Abs. bias,EPSD,SSD,CP then a MaxMSE row.
void write_study_table(std::ostream& out, const StudyReport& report);
// One row per replicate: rep, ok, theta means/sds, coverage and F errors.
void write_replicates(std::ostream& out, const StudyReport& report);

// index (1-based), u, scaled CPO.
void write_scaled_cpo(std::ostream& out, const CheckReport& check, const CurrentStatusDataset& data);
// knot, then one survival column per profile.
void write_survival_curves(std::ostream& out, const std::vector<double>& knots,
                           const std::vector<ProfileEstimate>& profiles);
void write_F_tilde(std::ostream& out, const FitSummary& fit);

// Estimates, posterior sds and credible intervals, then cure rates and fit criteria.
void write_text_report(std::ostream& out, const FitSummary& fit, const CheckReport& check,
                       const std::vector<ProfileEstimate>& profiles);

// u,delta,<covariates>; comment lines first.
void write_dataset(std::ostream& out, const CurrentStatusDataset& data, const std::vector<std::string>& covariate_names,
                   const std::vector<std::string>& comments);

}  // namespace ptcure
