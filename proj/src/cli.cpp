#include "ptcure/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "ptcure/checking.hpp"
#include "ptcure/diagnostics.hpp"
#include "ptcure/errors.hpp"
#include "ptcure/report.hpp"
#include "ptcure/sampler.hpp"
#include "ptcure/simulation.hpp"
#include "ptcure/summary.hpp"
#include "ptcure/table.hpp"

namespace ptcure {
namespace fs = std::filesystem;

namespace {

// Files are rendered in memory first and written together at the end.
struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, const std::string& body) { files.emplace_back(name, body); }
  void add_table(const std::string& name, const std::string& hash, const std::function<void(std::ostream&)>& fn) {
    std::ostringstream s;
    write_hash_comment(s, hash);
    fn(s);
    add(name, s.str());
  }
  void write(const std::string& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("--out: cannot create '" + dir + "': " + ec.message());
    for (const auto& [name, body] : files) {
      const auto path = (fs::path(dir) / name).string();
      std::ofstream out(path, std::ios::binary);
      if (!out || !(out << body)) throw ValidationError("--out: cannot write '" + path + "'");
    }
  }
};

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const MapError& e) {
    err << "numerical error: " << e.what() << " (best log posterior " << format_double(e.best_log_posterior())
        << ")\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
}

CurrentStatusDataset load_data(const DataConfig& d) {
  if (!fs::exists(d.path)) throw ValidationError("data.path: file not found: '" + d.path + "'");
  try {
    return load_dataset(d.path, d.mapping);
  } catch (const ParseError& e) {
    throw ValidationError("data.path: '" + d.path + "' " + e.what());
  }
}

std::vector<Profile> default_profiles(const OutputConfig& out, std::size_t dim) {
  if (!out.profiles.empty()) {
    for (std::size_t i = 0; i < out.profiles.size(); ++i)
      if (static_cast<std::size_t>(out.profiles[i].x.size()) != dim)
        throw ValidationError("output.profiles[" + std::to_string(i) + "].x: must have " + std::to_string(dim) +
                              " entries (intercept first)");
    return out.profiles;
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  x[0] = 1.0;
  return {{"baseline", x}};
}

void add_chain_files(OutputSet& files, const std::vector<PosteriorChain>& chains, const std::string& hash,
                     bool with_draws) {
  for (const auto& c : chains) {
    const auto id = std::to_string(c.chain_id);
    if (with_draws) files.add_table("chain_" + id + ".csv", hash, [&](auto& s) { write_chain(s, c); });
    files.add_table("chain_" + id + "_trace.csv", hash, [&](auto& s) { write_trace(s, c); });
    files.add_table("chain_" + id + "_hist.csv", hash, [&](auto& s) { write_histograms(s, c); });
  }
}

}  // namespace

int cmd_fit(const CliOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_run_config(opts.config_path, opts.overrides);
    if (!cfg.data) throw ValidationError("data: section is required for fit");
    if (!cfg.prior) throw ValidationError("prior: section is required for fit");
    const auto data = load_data(*cfg.data);
    const auto prior = build_prior(*cfg.prior, data);
    const auto profiles_in = default_profiles(cfg.output, data.dim());
    const auto hash = cfg.hash_hex();

    log << "fit: n = " << data.size() << ", knots = " << data.grid().n0() << ", chains = " << cfg.sampler.n_chains
        << '\n';
    const auto chains = run_chains(data, prior, cfg.sampler);
    const auto fit = summarize(chains, data.grid(), cfg.output.level, cfg.output.functional_mean);
    const auto check = model_check(pool_chains(chains), data);
    const auto diag = diagnose(chains, cfg.output.acf_lags);
    const auto profiles = profile_estimates(fit, data.grid(), profiles_in);
    const auto npmle = npmle_survival(data);

    OutputSet files;
    files.add("summary.json", fit_json(fit, check, diag, profiles, hash));
    files.add("timing.json", timing_json(chains, hash));
    add_chain_files(files, chains, hash, true);
    files.add_table("acf.csv", hash, [&](auto& s) { write_acf(s, diag); });
    files.add_table("scaled_cpo.csv", hash, [&](auto& s) { write_scaled_cpo(s, check, data); });
    files.add_table("survival.csv", hash, [&](auto& s) { write_survival_curves(s, fit.knots, profiles); });
    files.add_table("F_tilde.csv", hash, [&](auto& s) { write_F_tilde(s, fit); });
    files.add_table("npmle.csv", hash, [&](auto& s) { write_step_estimate(s, npmle, "survival"); });
    std::ostringstream text;
    write_text_report(text, fit, check, profiles);
    text << "\nconfig_hash " << hash << '\n';
    files.add("report.txt", text.str());
    files.write(opts.out_dir);
    log << text.str();
    return kExitOk;
  });
}

int cmd_simulate(const CliOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_run_config(opts.config_path, opts.overrides);
    if (!cfg.scenario) throw ValidationError("scenario: section is required for simulate");
    const auto& sc = *cfg.scenario;
    const auto gen = generate_dataset(sc, cfg.simulate_rep);
    std::ostringstream knots;
    for (double k : gen.scheme_knots) knots << ' ' << format_double(k);
    std::vector<std::string> comments{
        "config_hash: " + cfg.hash_hex(),
        "seed: " + std::to_string(sc.seed) + "  rep: " + std::to_string(cfg.simulate_rep),
        "theta_true: " + format_double(sc.theta_true[0]) + ' ' + format_double(sc.theta_true[1]) + ' ' +
            format_double(sc.theta_true[2]),
        "gompertz: a " + format_double(sc.gompertz.a) + " b " + format_double(sc.gompertz.b),
        std::string("scheme: ") + (sc.scheme == MonitoringScheme::fixed ? "fixed" : "random") + " knots" + knots.str(),
        "cured (latent): " + std::to_string(gen.cured)};
    OutputSet files;
    std::ostringstream body;
    write_dataset(body, gen.data, {"x1", "x2"}, comments);
    files.add("dataset.csv", body.str());
    files.write(opts.out_dir);
    log << "simulate: wrote " << gen.data.size() << " rows to " << (fs::path(opts.out_dir) / "dataset.csv").string()
        << '\n';
    return kExitOk;
  });
}

int cmd_study(const CliOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_run_config(opts.config_path, opts.overrides);
    if (!cfg.scenario) throw ValidationError("scenario: section is required for study");
    const auto hash = cfg.hash_hex();
    const auto report = replication_study(*cfg.scenario, cfg.sampler.workers);
    OutputSet files;
    files.add("study.json", study_json(report, hash));
    files.add_table("study.csv", hash, [&](auto& s) { write_study_table(s, report); });
    files.add_table("study_replicates.csv", hash, [&](auto& s) { write_replicates(s, report); });
    files.write(opts.out_dir);
    std::ostringstream table;
    write_study_table(table, report);
    log << table.str() << "failures " << report.failures << " of " << report.records.size() << '\n';
    if (report.failures > 0) {
      err << "study: " << report.failures << " replicate fit(s) failed; see study_replicates.csv\n";
      return kExitNumerical;
    }
    return kExitOk;
  });
}

int cmd_diagnose(const CliOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_run_config(opts.config_path, opts.overrides);
    if (cfg.diagnose_chains.empty()) throw ValidationError("diagnose.chains: required for diagnose");
    std::vector<PosteriorChain> chains;
    for (std::size_t i = 0; i < cfg.diagnose_chains.size(); ++i) {
      const auto& path = cfg.diagnose_chains[i];
      std::ifstream in(path);
      if (!in) throw ValidationError("diagnose.chains[" + std::to_string(i) + "]: cannot open '" + path + "'");
      try {
        chains.push_back(read_chain(in));
      } catch (const ParseError& e) {
        throw ValidationError("diagnose.chains[" + std::to_string(i) + "]: " + e.what());
      }
      chains.back().chain_id = i;
    }
    const auto hash = cfg.hash_hex();
    const auto diag = diagnose(chains, cfg.output.acf_lags);
    OutputSet files;
    files.add("diagnostics.json", diagnostics_json(diag, hash));
    files.add_table("acf.csv", hash, [&](auto& s) { write_acf(s, diag); });
    add_chain_files(files, chains, hash, false);
    files.write(opts.out_dir);
    log << "diagnose: " << chains.size() << " chain(s), m0 = " << diag.m0 << '\n';
    for (std::size_t j = 0; j < diag.names.size(); ++j) {
      log << "  " << diag.names[j] << "  ess " << format_double(diag.ess[j]);
      if (diag.psrf) log << "  psrf " << format_double((*diag.psrf)[j]) << (diag.psrf_split ? " (split)" : "");
      log << '\n';
    }
    return kExitOk;
  });
}

int run_command(const std::string& command, const CliOptions& opts, std::ostream& log, std::ostream& err) {
  if (command == "fit") return cmd_fit(opts, log, err);
  if (command == "simulate") return cmd_simulate(opts, log, err);
  if (command == "study") return cmd_study(opts, log, err);
  if (command == "diagnose") return cmd_diagnose(opts, log, err);
  err << "unknown command '" << command << "' (expected fit, simulate, study or diagnose)\n";
  return kExitValidation;
}

}  // namespace ptcure
