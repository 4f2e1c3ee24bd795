#include "olps/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>

#include <fmt/format.h>

#include "olps/strategies.hpp"

namespace olps {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, value));
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: expected a count, got '{}'", key, value));
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("{}: expected on/off, got '{}'", key, value));
}

std::pair<double, double> to_pair(const std::string& key, const std::string& value) {
  const auto comma = value.find(',');
  if (comma == std::string::npos) throw ConfigError(fmt::format("{}: expected 'a,b', got '{}'", key, value));
  return {to_double(key, trim(value.substr(0, comma))), to_double(key, trim(value.substr(comma + 1)))};
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

std::string ExperimentConfig::label() const {
  if (!name.empty()) return name;
  std::string upper = strategy;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  return oracle ? upper + "-O" : upper;
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("dataset is required");
  if (dataset_format != "relatives" && dataset_format != "prices") {
    throw ConfigError(fmt::format("dataset.format must be 'relatives' or 'prices', got '{}'", dataset_format));
  }
  const auto roster = strategy_roster();
  if (std::find(roster.begin(), roster.end(), strategy) == roster.end()) {
    throw ConfigError(fmt::format("strategy '{}' is not in the roster", strategy));
  }
  const auto specs = strategy_params(strategy);
  for (const auto& [key, _] : params) {
    if (std::none_of(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == key; })) {
      throw ConfigError(fmt::format("strategy '{}' has no parameter '{}'", strategy, key));
    }
  }
  if (oracle) {
    if (specs.empty()) throw ConfigError(fmt::format("strategy '{}' has no tunable parameters", strategy));
    for (const auto& spec : specs) {
      const auto it = bounds.find(spec.name);
      if (it == bounds.end()) throw ConfigError(fmt::format("oracle on but bounds.{} missing", spec.name));
      if (!(it->second.first < it->second.second)) throw ConfigError(fmt::format("bounds.{} needs lo < hi", spec.name));
    }
    try {
      oracle_config.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!(periods_per_year > 0.0)) throw ConfigError("metrics.periods_per_year must be positive");
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  bool synthetic_seed_set = false;
  auto& oc = cfg.oracle_config;
  auto& pso = oc.pso;
  auto& pr = oc.priors;

  auto log_normal = [](gp::LogNormalPrior& p) {
    return [&p](const std::string& k, const std::string& v) { std::tie(p.mu, p.sigma) = to_pair(k, v); };
  };
  auto gamma = [](gp::GammaPrior& p) {
    return [&p](const std::string& k, const std::string& v) { std::tie(p.shape, p.scale) = to_pair(k, v); };
  };
  auto real = [](double& x) { return [&x](const std::string& k, const std::string& v) { x = to_double(k, v); }; };
  auto size = [](std::size_t& x) {
    return [&x](const std::string& k, const std::string& v) { x = static_cast<std::size_t>(to_count(k, v)); };
  };
  auto flag = [](bool& x) { return [&x](const std::string& k, const std::string& v) { x = to_bool(k, v); }; };

  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
      {"name", [&](const std::string&, const std::string& v) { cfg.name = v; }},
      {"dataset", [&](const std::string&, const std::string& v) { cfg.dataset = v; }},
      {"dataset.format", [&](const std::string&, const std::string& v) { cfg.dataset_format = v; }},
      {"synthetic.seed",
       [&](const std::string& k, const std::string& v) {
         cfg.synthetic_seed = to_count(k, v);
         synthetic_seed_set = true;
       }},
      {"synthetic.days", size(cfg.synthetic_days)},
      {"strategy", [&](const std::string&, const std::string& v) { cfg.strategy = v; }},
      {"oracle", flag(cfg.oracle)},
      {"oracle.kappa", real(oc.kappa)},
      {"oracle.window_capacity", size(oc.window_capacity)},
      {"oracle.n_init", size(oc.n_init)},
      {"oracle.restarts", [&](const std::string& k, const std::string& v) { oc.restarts = static_cast<int>(to_count(k, v)); }},
      {"oracle.refit_every_period", flag(oc.refit_every_period)},
      {"oracle.dense_refit_limit", size(oc.dense_refit_limit)},
      {"oracle.refit_interval", size(oc.refit_interval)},
      {"oracle.standardize_targets", flag(oc.standardize_targets)},
      {"oracle.split_temporal_lengthscale", flag(oc.split_temporal_lengthscale)},
      {"oracle.time_varying_ratio", real(oc.time_varying_ratio)},
      {"pso.particles", size(pso.particles)},
      {"pso.iterations", size(pso.iterations)},
      {"pso.inertia", real(pso.inertia)},
      {"pso.cognitive", real(pso.cognitive)},
      {"pso.social", real(pso.social)},
      {"pso.velocity_clamp", real(pso.velocity_clamp)},
      {"prior.sigma_f", log_normal(pr.sigma_f)},
      {"prior.lengthscale", log_normal(pr.lengthscale)},
      {"prior.alpha", log_normal(pr.alpha)},
      {"prior.noise", log_normal(pr.noise)},
      {"prior.temporal_l", gamma(pr.temporal_l)},
      {"prior.temporal_alpha", gamma(pr.temporal_alpha)},
      {"metrics.periods_per_year", real(cfg.periods_per_year)},
      {"metrics.risk_free", real(cfg.risk_free)},
      {"metrics.exclude_warmup", flag(cfg.exclude_warmup)},
      {"output_dir", [&](const std::string&, const std::string& v) { cfg.output_dir = v; }},
      {"seed", [&](const std::string& k, const std::string& v) { cfg.seed = to_count(k, v); }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (starts_with(key, "param.")) {
      cfg.params[key.substr(6)] = to_double(key, value);
    } else if (starts_with(key, "const.")) {
      cfg.constants[key.substr(6)] = to_double(key, value);
    } else if (starts_with(key, "bounds.")) {
      cfg.bounds[key.substr(7)] = to_pair(key, value);
    } else if (const auto it = setters.find(key); it != setters.end()) {
      it->second(key, value);
    } else {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
  }
  if (!synthetic_seed_set) cfg.synthetic_seed = cfg.seed;
  oc.seed = cfg.seed;
  if (!base_dir.empty()) {
    if (!starts_with(cfg.dataset, "synthetic:") && std::filesystem::path(cfg.dataset).is_relative()) {
      cfg.dataset = (base_dir / cfg.dataset).lexically_normal().string();
    }
    if (cfg.output_dir.is_relative()) cfg.output_dir = (base_dir / cfg.output_dir).lexically_normal();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  return parse_config(in, path.parent_path());
}

}  // namespace olps
