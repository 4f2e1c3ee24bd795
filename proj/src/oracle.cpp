#include "olps/oracle.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace olps::oracle {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void OracleConfig::validate() const {
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be nonnegative");
  if (n_init < 1 || window_capacity < n_init) throw std::invalid_argument("need window_capacity >= n_init >= 1");
  if (refit_interval < 1) throw std::invalid_argument("refit_interval must be at least 1");
}

double ucb(const gp::Posterior& posterior, std::span<const double> theta, double t, double kappa) {
  const auto p = posterior.predict(theta, t);
  return p.mean + kappa * std::sqrt(p.variance);
}

void update_observation(std::deque<Observation>& window, std::span<const double> theta, long t, double gross_return,
                        std::size_t capacity) {
  if (!(gross_return > 0.0) || !std::isfinite(gross_return)) {
    throw std::invalid_argument(fmt::format("gross return must be positive and finite, got {}", gross_return));
  }
  window.push_back({std::vector<double>(theta.begin(), theta.end()), t, std::log(gross_return)});
  while (window.size() > capacity) window.pop_front();
}

ConfigurationOracle::ConfigurationOracle(ParamBounds bounds, OracleConfig config)
    : bounds_(std::move(bounds)), config_(std::move(config)) {
  bounds_.validate();
  config_.validate();
  design_ = lhs_init(bounds_, config_.n_init, mix(config_.seed));
}

std::vector<double> ConfigurationOracle::select(long t) {
  if (t < 1) throw std::invalid_argument("periods are 1-based");
  if (!trace_.empty() && t != trace_.back().period + 1) {
    throw std::logic_error(fmt::format("oracle stepped out of order: period {} after {}", t, trace_.back().period));
  }
  if (static_cast<std::size_t>(t) <= config_.n_init || window_.empty()) {
    const auto idx = static_cast<std::size_t>(t - 1) % design_.size();
    pending_ = Selection{design_[idx], kNaN, kNaN, false, false, std::nullopt};
  } else {
    pending_ = select_with_gp(t);
  }
  pending_period_ = t;
  return pending_->theta;
}

std::vector<double> ConfigurationOracle::best_so_far() const {
  const Observation* best = &window_.front();
  for (const auto& o : window_) {
    if (o.log_metric > best->log_metric) best = &o;
  }
  return best->theta;
}

ConfigurationOracle::Selection ConfigurationOracle::select_with_gp(long t) {
  const auto D = static_cast<Eigen::Index>(bounds_.dims());
  const auto n = static_cast<Eigen::Index>(window_.size());
  const double t0 = static_cast<double>(window_.front().period);
  const double horizon = std::max(1.0, static_cast<double>(t) - t0);

  gp::GPDataset data;
  data.inputs.resize(n, D + 1);
  data.targets.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& o = window_[static_cast<std::size_t>(j)];
    for (Eigen::Index d = 0; d < D; ++d) {
      const auto dd = static_cast<std::size_t>(d);
      data.inputs(j, d) = (o.theta[dd] - bounds_.lo[dd]) / bounds_.width(dd);
    }
    data.inputs(j, D) = (static_cast<double>(o.period) - t0) / horizon;
    data.targets[j] = o.log_metric;
  }
  double y_mean = 0.0;
  double y_scale = 1.0;
  if (config_.standardize_targets) {
    y_mean = data.targets.mean();
    const double sd = std::sqrt((data.targets.array() - y_mean).square().mean());
    if (sd > 1e-12) y_scale = sd;
    data.targets = (data.targets.array() - y_mean) / y_scale;
  }

  Selection out;
  try {
    const bool refit = !fitted_ || config_.refit_every_period || window_.size() < config_.dense_refit_limit ||
                       fits_since_refit_ + 1 >= config_.refit_interval;
    gp::KernelHyperparams hp =
        fitted_ ? *fitted_ : gp::KernelHyperparams::defaults(bounds_.dims(), config_.split_temporal_lengthscale);
    if (refit) {
      gp::FitOptions options;
      options.restarts = config_.restarts;
      options.seed = mix(config_.seed ^ mix(static_cast<std::uint64_t>(t)));
      hp = gp::fit_map(data, hp, config_.priors, options).hyperparams;
      fits_since_refit_ = 0;
    } else {
      ++fits_since_refit_;
    }
    fitted_ = hp;
    const gp::Posterior posterior(std::move(data), hp);

    const double kappa = config_.kappa;
    const BatchObjective acquisition = [&](const Eigen::MatrixXd& thetas) {
      Eigen::MatrixXd scaled(thetas.rows(), thetas.cols());
      for (Eigen::Index d = 0; d < D; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        scaled.row(d) = (thetas.row(d).array() - bounds_.lo[dd]) / bounds_.width(dd);
      }
      Eigen::VectorXd mean, variance;
      posterior.predict_batch(scaled, 1.0, mean, variance);
      return Eigen::VectorXd(mean.array() + kappa * variance.array().sqrt());
    };
    const auto best = pso_maximize(acquisition, bounds_, config_.pso, mix(config_.seed + static_cast<std::uint64_t>(t)));
    out.theta = best.best;
    out.acquisition = y_mean + y_scale * best.value;

    gp::KernelHyperparams in_periods = hp;
    in_periods.temporal_l *= horizon;
    if (in_periods.temporal_l2) *in_periods.temporal_l2 *= horizon;
    const auto diagnostic = gp::temporal_lengthscale_diagnostic(in_periods, horizon, config_.time_varying_ratio);
    out.temporal_lengthscale = in_periods.temporal_l;
    out.time_varying = diagnostic.time_varying;
    out.hyperparams = hp;
  } catch (const gp::FactorizationError& e) {
    std::cerr << fmt::format("oracle: period {}: GP fit failed ({}); using best-so-far parameters\n", t, e.what());
    out = Selection{best_so_far(), kNaN, kNaN, false, true, std::nullopt};
    fitted_.reset();
  }
  out.theta = bounds_.clip(out.theta);
  return out;
}

void ConfigurationOracle::record(std::span<const double> theta, long t, double gross_return) {
  if (!pending_ || t != pending_period_) {
    throw std::logic_error(fmt::format("record for period {} without a matching select", t));
  }
  update_observation(window_, theta, t, gross_return, config_.window_capacity);
  TraceRecord rec;
  rec.period = t;
  rec.theta.assign(theta.begin(), theta.end());
  rec.acquisition = pending_->acquisition;
  rec.realized_return = gross_return;
  rec.temporal_lengthscale = pending_->temporal_lengthscale;
  rec.time_varying = pending_->time_varying;
  rec.warmup = static_cast<std::size_t>(t) <= config_.n_init;
  rec.fallback = pending_->fallback;
  rec.hyperparams = pending_->hyperparams;
  trace_.push_back(std::move(rec));
  pending_.reset();
}

}  // namespace olps::oracle
