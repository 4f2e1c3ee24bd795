#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace olps::gp {

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hyperparameters of the spatiotemporal kernel
///
///   k((theta, t), (theta', t')) = k_param(theta, theta') * k_temporal(t, t')
///
/// with a product rational-quadratic kernel over the D strategy parameters
/// and an exponential-plus-RQ kernel over time. `temporal_l2`, when set,
/// gives the RQ temporal term its own lengthscale; otherwise both temporal
/// terms share `temporal_l`.
struct KernelHyperparams {
  double sigma_f = 1.0;
  std::vector<double> lengthscales;
  std::vector<double> alphas;
  double temporal_l = 1.0;
  double temporal_alpha = 1.0;
  std::optional<double> temporal_l2;
  double noise_sigma = 0.1;

  static KernelHyperparams defaults(std::size_t dims, bool split_temporal = false);

  std::size_t dims() const { return lengthscales.size(); }
  double temporal_rq_lengthscale() const { return temporal_l2.value_or(temporal_l); }
  /// Throws std::invalid_argument unless every value is finite and > 0.
  void validate() const;

  /// Packing used by the optimizer: [sigma_f, l_1..l_D, alpha_1..alpha_D,
  /// temporal_l, temporal_alpha, (temporal_l2), noise_sigma], all as logs.
  std::size_t num_parameters() const { return 2 * dims() + (temporal_l2 ? 5 : 4); }
  Eigen::VectorXd to_log_vector() const;
  /// Inverse of to_log_vector() for the same dims and temporal split.
  KernelHyperparams with_log_vector(const Eigen::Ref<const Eigen::VectorXd>& v) const;
};

double k_param(std::span<const double> theta, std::span<const double> theta_prime, const KernelHyperparams& hp);
double k_temporal(double t, double t_prime, const KernelHyperparams& hp);
double k_joint(std::span<const double> theta, double t, std::span<const double> theta_prime, double t_prime,
               const KernelHyperparams& hp);

/// Training inputs are rows (theta_1..theta_D, t); targets are log metrics.
struct GPDataset {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;

  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
  std::size_t dims() const { return inputs.cols() > 0 ? static_cast<std::size_t>(inputs.cols() - 1) : 0; }
};

/// Latent covariance matrix of the rows of `inputs` (noise excluded).
Eigen::MatrixXd gram(const Eigen::MatrixXd& inputs, const KernelHyperparams& hp);

struct LogNormalPrior {
  double mu = 0.0;
  double sigma = 1.0;
};

struct GammaPrior {
  double shape = 2.0;
  double scale = 1.0;
};

/// Log-normal priors on the parameter-space hyperparameters and the noise,
/// Gamma priors on the temporal ones.
struct HyperPriors {
  LogNormalPrior sigma_f;
  LogNormalPrior lengthscale;
  LogNormalPrior alpha;
  LogNormalPrior noise;
  GammaPrior temporal_l;
  GammaPrior temporal_alpha;

  /// Sum of log densities (in the natural parameterization) and its
  /// gradient with respect to the packed log vector.
  double log_density(const KernelHyperparams& hp, Eigen::VectorXd* gradient = nullptr) const;
};

/// Factor-once jitter ladder: 0, then 1e-10 through 1e-6.
inline constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

struct Evidence {
  double value = 0.0;             // log marginal likelihood + log prior
  double log_likelihood = 0.0;    // without the prior
  Eigen::VectorXd gradient;       // d value / d log-hyperparameters
  double jitter = 0.0;            // diagonal jitter that made the factorization succeed
};

/// MAP objective. Throws FactorizationError if the Gram matrix cannot be
/// factored even with the largest jitter.
Evidence log_evidence(const GPDataset& data, const KernelHyperparams& hp, const HyperPriors& priors,
                      bool with_gradient = true);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // latent variance, clamped at 0
};

/// Immutable conditioned GP. Safe for concurrent prediction.
class Posterior {
 public:
  Posterior(GPDataset data, KernelHyperparams hp);

  Prediction predict(std::span<const double> theta, double t) const;
  /// Predictions at the columns of `thetas` (D x P), all at time `t`.
  void predict_batch(const Eigen::MatrixXd& thetas, double t, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

  const KernelHyperparams& hyperparams() const { return hp_; }
  const GPDataset& data() const { return data_; }
  double jitter() const { return jitter_; }

 private:
  GPDataset data_;
  KernelHyperparams hp_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

struct FitOptions {
  int restarts = 5;           // including the start at `init`
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  double log_bound = 9.0;     // |log hyperparameter| is kept below this
  std::uint64_t seed = 0;
};

struct FitResult {
  KernelHyperparams hyperparams;
  double objective = 0.0;
  double initial_objective = 0.0;
  int iterations = 0;
};

/// Maximum a posteriori hyperparameters by BFGS on the log-hyperparameters,
/// started from `init` and from restarts drawn from the priors.
FitResult fit_map(const GPDataset& data, const KernelHyperparams& init, const HyperPriors& priors,
                  const FitOptions& options = {});

struct TemporalDiagnostic {
  bool time_varying = false;
  double ratio = 0.0;  // temporal lengthscale / horizon
};

/// A temporal lengthscale that is short relative to the horizon signals
/// that the best parameters move over time. `horizon` is in the same units
/// as `hp.temporal_l`.
TemporalDiagnostic temporal_lengthscale_diagnostic(const KernelHyperparams& hp, double horizon,
                                                   double ratio_threshold = 1.0);

}  // namespace olps::gp
