#include "ptcure/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "ptcure/errors.hpp"

namespace ptcure {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& object_at(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(join(path, key), "unknown key");
  }
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj.at(key), join(path, key)) : fallback;
}

std::uint64_t unsigned_value(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) fail(path, "must be >= 0");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(path, "must be a non-negative integer");
}

std::size_t count_or(const json& obj, const char* key, const std::string& path, std::size_t fallback,
                     std::size_t minimum) {
  if (!obj.contains(key)) return fallback;
  const auto v = unsigned_value(obj.at(key), join(path, key));
  if (v < minimum) fail(join(path, key), "must be >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

bool bool_or(const json& obj, const char* key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(join(path, key), "must be true or false");
  return obj.at(key).get<bool>();
}

std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string() || j.get<std::string>().empty()) fail(path, "must be a non-empty string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index_path(path, i)));
  return out;
}

std::vector<std::string> strings(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string_at(j[i], index_path(path, i)));
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string resolve_path(const std::string& p, const std::string& base_dir) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

GompertzParams parse_gompertz(const json& j, const std::string& path) {
  object_at(j, path, {"a", "b"});
  GompertzParams g{number_or(j, "a", path, 0.5), number_or(j, "b", path, 1.1)};
  if (!(g.a > 0.0)) fail(join(path, "a"), "must be > 0");
  if (!(g.b > 0.0)) fail(join(path, "b"), "must be > 0");
  return g;
}

DataConfig parse_data(const json& j, const std::string& base_dir) {
  const std::string path = "data";
  object_at(j, path, {"path", "time_col", "status_col", "covariates"});
  if (!j.contains("path")) fail(join(path, "path"), "is required");
  DataConfig d;
  d.path = resolve_path(string_at(j.at("path"), join(path, "path")), base_dir);
  if (j.contains("time_col")) d.mapping.time_col = string_at(j.at("time_col"), join(path, "time_col"));
  if (j.contains("status_col")) d.mapping.status_col = string_at(j.at("status_col"), join(path, "status_col"));
  if (j.contains("covariates")) d.mapping.covariate_cols = strings(j.at("covariates"), join(path, "covariates"));
  return d;
}

EtaPriorConfig parse_eta(const json& j, const std::string& path) {
  object_at(j, path, {"mu", "min_increment", "min_survival", "gompertz", "scale", "rho", "cov"});
  EtaPriorConfig e;
  if (j.contains("mu")) {
    const auto& mu = j.at("mu");
    const auto mp = join(path, "mu");
    if (mu.is_string()) {
      const auto s = mu.get<std::string>();
      if (s == "npmle")
        e.source = MuSource::npmle;
      else if (s == "gompertz")
        e.source = MuSource::gompertz;
      else
        fail(mp, "must be \"npmle\", \"gompertz\" or an array of numbers");
    } else {
      e.source = MuSource::explicit_values;
      e.mu = numbers(mu, mp);
    }
  }
  e.min_increment = number_or(j, "min_increment", path, e.min_increment);
  if (!(e.min_increment > 0.0)) fail(join(path, "min_increment"), "must be > 0");
  e.min_survival = number_or(j, "min_survival", path, e.min_survival);
  if (!(e.min_survival > 0.0 && e.min_survival < 1.0)) fail(join(path, "min_survival"), "must lie in (0, 1)");
  if (j.contains("gompertz")) e.gompertz = parse_gompertz(j.at("gompertz"), join(path, "gompertz"));
  e.scale = number_or(j, "scale", path, e.scale);
  if (!(e.scale > 0.0)) fail(join(path, "scale"), "must be > 0");
  e.rho = number_or(j, "rho", path, e.rho);
  if (!(e.rho > 0.0 && e.rho < 1.0)) fail(join(path, "rho"), "must lie in (0, 1)");
  if (j.contains("cov")) {
    const auto& c = j.at("cov");
    const auto cp = join(path, "cov");
    if (!c.is_array() || c.empty()) fail(cp, "must be a square array of rows");
    const auto n = c.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = numbers(c[r], index_path(cp, r));
      if (row.size() != n) fail(index_path(cp, r), "must have " + std::to_string(n) + " entries");
      for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
    }
    try {
      (void)EtaCovariance::dense(m);
    } catch (const std::exception& ex) {
      fail(cp, ex.what());
    }
    e.cov = m;
  }
  return e;
}

PriorConfig parse_prior(const json& j) {
  const std::string path = "prior";
  object_at(j, path, {"theta_mean", "theta_var", "eta"});
  PriorConfig p;
  if (!j.contains("theta_mean")) fail(join(path, "theta_mean"), "is required");
  if (!j.contains("theta_var")) fail(join(path, "theta_var"), "is required");
  p.theta_mean = numbers(j.at("theta_mean"), join(path, "theta_mean"));
  p.theta_var = numbers(j.at("theta_var"), join(path, "theta_var"));
  if (p.theta_var.size() != p.theta_mean.size())
    fail(join(path, "theta_var"), "must have the same length as theta_mean");
  for (std::size_t i = 0; i < p.theta_var.size(); ++i)
    if (!(p.theta_var[i] > 0.0)) fail(index_path(join(path, "theta_var"), i), "must be > 0");
  if (j.contains("eta")) p.eta = parse_eta(j.at("eta"), join(path, "eta"));
  return p;
}

SamplerConfig parse_sampler(const json& j) {
  const std::string path = "sampler";
  object_at(j, path,
            {"iterations", "burn_in", "thin", "adapt_interval", "adapt_fraction", "adapt", "seed", "chains", "workers"});
  SamplerConfig s;
  s.iterations = count_or(j, "iterations", path, s.iterations, 1);
  s.burn_in = count_or(j, "burn_in", path, s.burn_in, 0);
  s.thin = count_or(j, "thin", path, s.thin, 1);
  s.adapt_interval = count_or(j, "adapt_interval", path, s.adapt_interval, 1);
  s.adapt_fraction = number_or(j, "adapt_fraction", path, s.adapt_fraction);
  s.adapt = bool_or(j, "adapt", path, s.adapt);
  if (j.contains("seed")) s.seed = unsigned_value(j.at("seed"), join(path, "seed"));
  s.n_chains = count_or(j, "chains", path, s.n_chains, 1);
  s.workers = count_or(j, "workers", path, s.workers, 1);
  if (!(s.adapt_fraction > 0.0 && s.adapt_fraction <= 1.0)) fail(join(path, "adapt_fraction"), "must lie in (0, 1]");
  if (s.burn_in >= s.iterations) fail(join(path, "burn_in"), "must be smaller than iterations");
  if (s.retained() == 0) fail(join(path, "thin"), "leaves no retained draws");
  return s;
}

OutputConfig parse_output(const json& j) {
  const std::string path = "output";
  object_at(j, path, {"level", "functional_mean", "acf_lags", "profiles"});
  OutputConfig o;
  o.level = number_or(j, "level", path, o.level);
  if (!(o.level > 0.0 && o.level < 1.0)) fail(join(path, "level"), "must lie in (0, 1)");
  o.functional_mean = bool_or(j, "functional_mean", path, o.functional_mean);
  o.acf_lags = count_or(j, "acf_lags", path, o.acf_lags, 1);
  if (j.contains("profiles")) {
    const auto& ps = j.at("profiles");
    const auto pp = join(path, "profiles");
    if (!ps.is_array()) fail(pp, "must be an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto ip = index_path(pp, i);
      object_at(ps[i], ip, {"name", "x"});
      if (!ps[i].contains("name") || !ps[i].contains("x")) fail(ip, "needs name and x");
      o.profiles.push_back({string_at(ps[i].at("name"), join(ip, "name")), to_vector(numbers(ps[i].at("x"), join(ip, "x")))});
    }
  }
  return o;
}

ScenarioConfig parse_scenario(const json& j, const SamplerConfig& sampler, std::size_t& rep) {
  const std::string path = "scenario";
  object_at(j, path,
            {"n", "theta_true", "gompertz", "scheme", "knots", "random_count", "random_upper", "replicates", "seed",
             "rep", "level", "prior"});
  ScenarioConfig s;
  s.sampler = sampler;
  s.n = count_or(j, "n", path, s.n, 1);
  if (j.contains("theta_true")) {
    const auto t = numbers(j.at("theta_true"), join(path, "theta_true"));
    if (t.size() != 3) fail(join(path, "theta_true"), "must have 3 entries (intercept, X1, X2)");
    s.theta_true = to_vector(t);
  }
  if (j.contains("gompertz")) s.gompertz = parse_gompertz(j.at("gompertz"), join(path, "gompertz"));
  if (j.contains("scheme")) {
    const auto scheme = string_at(j.at("scheme"), join(path, "scheme"));
    if (scheme == "fixed")
      s.scheme = MonitoringScheme::fixed;
    else if (scheme == "random")
      s.scheme = MonitoringScheme::random;
    else
      fail(join(path, "scheme"), "must be \"fixed\" or \"random\"");
  }
  if (j.contains("knots")) {
    s.knots = numbers(j.at("knots"), join(path, "knots"));
    for (std::size_t l = 0; l < s.knots.size(); ++l)
      if (!(s.knots[l] > 0.0) || (l > 0 && s.knots[l] <= s.knots[l - 1]))
        fail(index_path(join(path, "knots"), l), "knots must be positive and strictly increasing");
  }
  s.random_count = count_or(j, "random_count", path, s.random_count, 1);
  s.random_upper = number_or(j, "random_upper", path, s.random_upper);
  if (!(s.random_upper > 0.0)) fail(join(path, "random_upper"), "must be > 0");
  s.replicates = count_or(j, "replicates", path, s.replicates, 1);
  if (j.contains("seed")) s.seed = unsigned_value(j.at("seed"), join(path, "seed"));
  rep = count_or(j, "rep", path, 0, 0);
  s.level = number_or(j, "level", path, s.level);
  if (!(s.level > 0.0 && s.level < 1.0)) fail(join(path, "level"), "must lie in (0, 1)");
  if (j.contains("prior")) {
    const auto pp = join(path, "prior");
    const auto& p = object_at(j.at("prior"), pp, {"theta_mean", "theta_var", "eta_scale", "eta_rho"});
    s.theta_prior_mean = number_or(p, "theta_mean", pp, s.theta_prior_mean);
    s.theta_prior_var = number_or(p, "theta_var", pp, s.theta_prior_var);
    s.eta_scale = number_or(p, "eta_scale", pp, s.eta_scale);
    s.eta_rho = number_or(p, "eta_rho", pp, s.eta_rho);
    if (!(s.theta_prior_var > 0.0)) fail(join(pp, "theta_var"), "must be > 0");
    if (!(s.eta_scale > 0.0)) fail(join(pp, "eta_scale"), "must be > 0");
    if (!(s.eta_rho > 0.0 && s.eta_rho < 1.0)) fail(join(pp, "eta_rho"), "must lie in (0, 1)");
  }
  s.validate();
  return s;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir,
                           const ConfigOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("<config>: invalid JSON: ") + e.what());
  }
  object_at(root, "", {"data", "prior", "sampler", "output", "scenario", "diagnose"});

  if (overrides.chains) root["sampler"]["chains"] = *overrides.chains;
  if (overrides.seed) {
    root["sampler"]["seed"] = *overrides.seed;
    if (root.contains("scenario")) root["scenario"]["seed"] = *overrides.seed;
  }
  if (overrides.workers) root["sampler"]["workers"] = *overrides.workers;

  RunConfig cfg;
  if (root.contains("data")) cfg.data = parse_data(root.at("data"), base_dir);
  if (root.contains("prior")) cfg.prior = parse_prior(root.at("prior"));
  cfg.sampler = parse_sampler(root.contains("sampler") ? root.at("sampler") : json::object());
  cfg.output = parse_output(root.contains("output") ? root.at("output") : json::object());
  if (root.contains("scenario")) cfg.scenario = parse_scenario(root.at("scenario"), cfg.sampler, cfg.simulate_rep);
  if (root.contains("diagnose")) {
    const auto& d = object_at(root.at("diagnose"), "diagnose", {"chains"});
    if (!d.contains("chains")) fail("diagnose.chains", "is required");
    for (const auto& p : strings(d.at("chains"), "diagnose.chains"))
      cfg.diagnose_chains.push_back(resolve_path(p, base_dir));
    if (cfg.diagnose_chains.empty()) fail("diagnose.chains", "must list at least one chain file");
  }

  // Worker count never changes results, so it stays out of the hash.
  json hashed = root;
  if (hashed.contains("sampler")) hashed["sampler"].erase("workers");
  cfg.canonical = hashed.dump();
  cfg.hash = fnv1a64(cfg.canonical);
  return cfg;
}

RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("--config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_run_config(buf.str(), dir.empty() ? "." : dir.string(), overrides);
}

PriorSpec build_prior(const PriorConfig& cfg, const CurrentStatusDataset& data) {
  PriorSpec prior;
  prior.tau = to_vector(cfg.theta_mean);
  prior.sigma_theta_diag = to_vector(cfg.theta_var);
  const auto& e = cfg.eta;
  std::vector<double> mu;
  switch (e.source) {
    case MuSource::explicit_values:
      mu = e.mu;
      break;
    case MuSource::npmle:
      mu = elicit_mu_floored(npmle_survival(data).values, e.min_increment, e.min_survival);
      break;
    case MuSource::gompertz: {
      std::vector<double> s;
      for (double k : data.grid().knots()) s.push_back(gompertz_survival(e.gompertz, k));
      mu = elicit_mu(s);
      break;
    }
  }
  prior.mu = to_vector(mu);
  prior.eta_cov = e.cov ? EtaCovariance::dense(*e.cov) : EtaCovariance::ar1(e.scale, e.rho);
  try {
    prior.validate(data.dim(), data.grid().n0());
  } catch (const ValidationError& ex) {
    throw ValidationError(std::string("prior: ") + ex.what());
  }
  return prior;
}

}  // namespace ptcure
