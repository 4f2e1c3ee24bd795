#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olps/gp.hpp"

namespace olps::oracle {

/// Box constraints on the strategy parameters.
struct ParamBounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dims() const { return lo.size(); }
  double width(std::size_t d) const { return hi[d] - lo[d]; }
  /// Throws std::invalid_argument unless lo < hi and both are finite.
  void validate() const;
  std::vector<double> clip(std::span<const double> theta) const;
  bool contains(std::span<const double> theta) const;
};

/// Latin hypercube design: per dimension, one point in each of n equal strata.
std::vector<std::vector<double>> lhs_init(const ParamBounds& bounds, std::size_t n, std::uint64_t seed);

/// Posterior mean plus kappa posterior standard deviations.
double ucb(const gp::Posterior& posterior, std::span<const double> theta, double t, double kappa);

struct PsoConfig {
  std::size_t particles = 40;
  std::size_t iterations = 60;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double velocity_clamp = 0.5;  // fraction of the box width
};

/// Values at the columns of a D x P matrix of candidate points.
using BatchObjective = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct PsoResult {
  std::vector<double> best;
  double value = 0.0;
  std::vector<double> initial_values;  // objective at the LHS-seeded swarm
};

/// Particle swarm maximization inside the box, LHS-seeded and clipped.
PsoResult pso_maximize(const BatchObjective& objective, const ParamBounds& bounds, const PsoConfig& config,
                       std::uint64_t seed);
PsoResult pso_maximize(const std::function<double(std::span<const double>)>& objective, const ParamBounds& bounds,
                       const PsoConfig& config, std::uint64_t seed);

struct OracleConfig {
  double kappa = 2.0;
  std::size_t window_capacity = 300;
  std::size_t n_init = 10;
  PsoConfig pso;
  std::uint64_t seed = 0;

  gp::HyperPriors priors;
  int restarts = 5;
  bool split_temporal_lengthscale = false;
  /// Full MAP refit every period while the window is smaller than this,
  /// afterwards every `refit_interval` periods with posterior-only updates
  /// in between. `refit_every_period` disables the thinning.
  std::size_t dense_refit_limit = 100;
  std::size_t refit_interval = 5;
  bool refit_every_period = false;
  /// Center and scale the log-metric targets of the window before fitting.
  bool standardize_targets = true;
  double time_varying_ratio = 1.0;

  void validate() const;
};

struct Observation {
  std::vector<double> theta;
  long period = 0;
  double log_metric = 0.0;
};

struct TraceRecord {
  long period = 0;
  std::vector<double> theta;
  double acquisition = 0.0;  // UCB in log-metric space; NaN during warm-up
  double realized_return = 0.0;
  /// Fitted temporal lengthscale in periods; NaN during warm-up.
  double temporal_lengthscale = 0.0;
  bool time_varying = false;
  bool warmup = false;
  bool fallback = false;
  std::optional<gp::KernelHyperparams> hyperparams;
};

/// Per-period parameter selection: fit the spatiotemporal GP on the moving
/// window, fix the time coordinate to the next period, and maximize UCB over
/// the parameter box.
class ConfigurationOracle {
 public:
  ConfigurationOracle(ParamBounds bounds, OracleConfig config);

  /// Parameters for 1-based period `t`. Periods must be stepped in order,
  /// each followed by record().
  std::vector<double> select(long t);

  /// Adds the realized gross return of the parameters used in period `t`.
  void record(std::span<const double> theta, long t, double gross_return);

  const std::vector<TraceRecord>& trace() const { return trace_; }
  const std::deque<Observation>& window() const { return window_; }
  const std::vector<std::vector<double>>& design() const { return design_; }
  const ParamBounds& bounds() const { return bounds_; }
  const OracleConfig& config() const { return config_; }

 private:
  struct Selection {
    std::vector<double> theta;
    double acquisition = 0.0;
    double temporal_lengthscale = 0.0;
    bool time_varying = false;
    bool fallback = false;
    std::optional<gp::KernelHyperparams> hyperparams;
  };

  Selection select_with_gp(long t);
  std::vector<double> best_so_far() const;

  ParamBounds bounds_;
  OracleConfig config_;
  std::vector<std::vector<double>> design_;
  std::deque<Observation> window_;
  std::vector<TraceRecord> trace_;
  std::optional<Selection> pending_;
  long pending_period_ = 0;
  std::optional<gp::KernelHyperparams> fitted_;
  std::size_t fits_since_refit_ = 0;
};

/// Appends an observation and evicts the oldest beyond `capacity` (FIFO).
/// Throws std::invalid_argument for a non-positive gross return.
void update_observation(std::deque<Observation>& window, std::span<const double> theta, long t, double gross_return,
                        std::size_t capacity);

}  // namespace olps::oracle
