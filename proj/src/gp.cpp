#include "olps/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

extern "C" {
void dpotrf_(const char* uplo, const int* n, double* a, const int* lda, int* info);
void dpotri_(const char* uplo, const int* n, double* a, const int* lda, int* info);
}

namespace olps::gp {

KernelHyperparams KernelHyperparams::defaults(std::size_t dims, bool split_temporal) {
  KernelHyperparams hp;
  hp.lengthscales.assign(dims, 0.5);
  hp.alphas.assign(dims, 1.0);
  if (split_temporal) hp.temporal_l2 = 1.0;
  hp.noise_sigma = 0.5;
  return hp;
}

void KernelHyperparams::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (lengthscales.size() != alphas.size()) throw std::invalid_argument("lengthscales and alphas differ in size");
  bool valid = ok(sigma_f) && ok(temporal_l) && ok(temporal_alpha) && ok(noise_sigma);
  if (temporal_l2) valid = valid && ok(*temporal_l2);
  for (std::size_t i = 0; i < dims(); ++i) valid = valid && ok(lengthscales[i]) && ok(alphas[i]);
  if (!valid) throw std::invalid_argument("kernel hyperparameters must be finite and positive");
}

Eigen::VectorXd KernelHyperparams::to_log_vector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index k = 0;
  v[k++] = std::log(sigma_f);
  for (double l : lengthscales) v[k++] = std::log(l);
  for (double a : alphas) v[k++] = std::log(a);
  v[k++] = std::log(temporal_l);
  v[k++] = std::log(temporal_alpha);
  if (temporal_l2) v[k++] = std::log(*temporal_l2);
  v[k++] = std::log(noise_sigma);
  return v;
}

KernelHyperparams KernelHyperparams::with_log_vector(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (static_cast<std::size_t>(v.size()) != num_parameters()) throw std::invalid_argument("log vector size mismatch");
  KernelHyperparams hp = *this;
  Eigen::Index k = 0;
  hp.sigma_f = std::exp(v[k++]);
  for (double& l : hp.lengthscales) l = std::exp(v[k++]);
  for (double& a : hp.alphas) a = std::exp(v[k++]);
  hp.temporal_l = std::exp(v[k++]);
  hp.temporal_alpha = std::exp(v[k++]);
  if (hp.temporal_l2) hp.temporal_l2 = std::exp(v[k++]);
  hp.noise_sigma = std::exp(v[k++]);
  return hp;
}

namespace {

double rq(double d2, double alpha, double l) { return std::exp(-alpha * std::log1p(d2 / (2.0 * alpha * l * l))); }

double param_factor(const double* a, const double* b, const KernelHyperparams& hp) {
  double k = hp.sigma_f * hp.sigma_f;
  for (std::size_t i = 0; i < hp.dims(); ++i) {
    const double d = a[i] - b[i];
    k *= rq(d * d, hp.alphas[i], hp.lengthscales[i]);
  }
  return k;
}

double temporal_factor(double t, double t_prime, const KernelHyperparams& hp) {
  const double d = std::abs(t - t_prime);
  return std::exp(-d / hp.temporal_l) + rq(d * d, hp.temporal_alpha, hp.temporal_rq_lengthscale());
}

/// Cholesky with a minimum-pivot check; a pivot that collapses to rounding
/// level counts as a failure so the jitter ladder engages.
bool factor(Eigen::MatrixXd K, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(K);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::Index n = K.rows();
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * K.diagonal().maxCoeff();
  const auto L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pivot = L(i, i);
    if (!std::isfinite(pivot) || pivot * pivot <= floor) return false;
  }
  return true;
}

double factor_with_jitter(const Eigen::MatrixXd& K, Eigen::LLT<Eigen::MatrixXd>& llt) {
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    if (factor(std::move(Kj), llt)) return jitter;
  }
  throw FactorizationError("kernel matrix not positive definite after maximum jitter");
}

/// In-place lower Cholesky factor of the lower triangle of `K` plus
/// jitter, walking the same ladder as factor_with_jitter. Returns the jitter.
double lapack_factor_with_jitter(const Eigen::MatrixXd& K, Eigen::MatrixXd& L) {
  const int n = static_cast<int>(K.rows());
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * K.diagonal().maxCoeff();
  for (double jitter : kJitterLadder) {
    L = K;
    L.diagonal().array() += jitter;
    int info = 0;
    dpotrf_("L", &n, L.data(), &n, &info);
    if (info != 0) continue;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = std::isfinite(L(i, i)) && L(i, i) * L(i, i) > floor;
    if (ok) return jitter;
  }
  throw FactorizationError("kernel matrix not positive definite after maximum jitter");
}

/// Ky^{-1} from its lower Cholesky factor (LAPACK dpotri, lower triangle filled).
void cholesky_inverse_in_place(Eigen::MatrixXd& L) {
  const int n = static_cast<int>(L.rows());
  int info = 0;
  dpotri_("L", &n, L.data(), &n, &info);
  if (info != 0) throw FactorizationError(fmt::format("inverse from Cholesky factor failed (info {})", info));
}

void check_dataset(const GPDataset& data, const KernelHyperparams& hp) {
  if (data.inputs.rows() != data.targets.size()) throw std::invalid_argument("inputs and targets differ in length");
  if (data.targets.size() > 0 && data.dims() != hp.dims()) {
    throw std::invalid_argument(fmt::format("dataset has {} parameter dims, kernel has {}", data.dims(), hp.dims()));
  }
}

}  // namespace

double k_param(std::span<const double> theta, std::span<const double> theta_prime, const KernelHyperparams& hp) {
  if (theta.size() != hp.dims() || theta_prime.size() != hp.dims()) {
    throw std::invalid_argument("parameter dimension does not match kernel");
  }
  return param_factor(theta.data(), theta_prime.data(), hp);
}

double k_temporal(double t, double t_prime, const KernelHyperparams& hp) { return temporal_factor(t, t_prime, hp); }

double k_joint(std::span<const double> theta, double t, std::span<const double> theta_prime, double t_prime,
               const KernelHyperparams& hp) {
  return k_param(theta, theta_prime, hp) * k_temporal(t, t_prime, hp);
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& inputs, const KernelHyperparams& hp) {
  const Eigen::Index n = inputs.rows();
  const auto D = static_cast<Eigen::Index>(hp.dims());
  if (inputs.cols() != D + 1) throw std::invalid_argument("inputs must have D + 1 columns");
  // Row-major copy keeps each input contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X = inputs;
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double k = param_factor(X.row(i).data(), X.row(j).data(), hp) * temporal_factor(X(i, D), X(j, D), hp);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

double HyperPriors::log_density(const KernelHyperparams& hp, Eigen::VectorXd* gradient) const {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(hp.num_parameters()));
  Eigen::Index k = 0;
  auto log_normal = [&](double x, const LogNormalPrior& p) {
    const double z = (std::log(x) - p.mu) / p.sigma;
    total += -std::log(x) - std::log(p.sigma) - half_log_2pi - 0.5 * z * z;
    grad[k++] = -1.0 - z / p.sigma;
  };
  auto gamma = [&](double x, const GammaPrior& p) {
    total += (p.shape - 1.0) * std::log(x) - x / p.scale - std::lgamma(p.shape) - p.shape * std::log(p.scale);
    grad[k++] = (p.shape - 1.0) - x / p.scale;
  };
  log_normal(hp.sigma_f, sigma_f);
  for (double l : hp.lengthscales) log_normal(l, lengthscale);
  for (double a : hp.alphas) log_normal(a, alpha);
  gamma(hp.temporal_l, temporal_l);
  gamma(hp.temporal_alpha, temporal_alpha);
  if (hp.temporal_l2) gamma(*hp.temporal_l2, temporal_l);
  log_normal(hp.noise_sigma, noise);
  if (gradient != nullptr) *gradient = std::move(grad);
  return total;
}

Evidence log_evidence(const GPDataset& data, const KernelHyperparams& hp, const HyperPriors& priors,
                      bool with_gradient) {
  hp.validate();
  check_dataset(data, hp);
  const Eigen::Index n = data.targets.size();
  const auto D = static_cast<Eigen::Index>(hp.dims());
  const auto P = static_cast<Eigen::Index>(hp.num_parameters());
  const double noise2 = hp.noise_sigma * hp.noise_sigma;

  Evidence out;
  Eigen::VectorXd prior_grad;
  const double log_prior = priors.log_density(hp, with_gradient ? &prior_grad : nullptr);
  if (n == 0) {
    out.value = log_prior;
    out.gradient = prior_grad;
    return out;
  }

  // Kernel pieces kept for the gradient pass: the parameter factor, the
  // scaled squared distances u and their log1p, and the two temporal terms.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X = data.inputs;
  const double l_rq = hp.temporal_rq_lengthscale();
  const double sf2 = hp.sigma_f * hp.sigma_f;
  std::vector<Eigen::MatrixXd> U(static_cast<std::size_t>(D), Eigen::MatrixXd(n, n));
  std::vector<Eigen::MatrixXd> LU(static_cast<std::size_t>(D), Eigen::MatrixXd(n, n));
  Eigen::MatrixXd KP(n, n), E(n, n), R(n, n), UT(n, n), LUT(n, n), Ky(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      double kp = sf2;
      for (Eigen::Index d = 0; d < D; ++d) {
        const auto sd = static_cast<std::size_t>(d);
        const double diff = X(i, d) - X(j, d);
        const double a = hp.alphas[sd];
        const double l = hp.lengthscales[sd];
        const double u = diff * diff / (2.0 * a * l * l);
        const double lu = std::log1p(u);
        U[sd](i, j) = u;
        LU[sd](i, j) = lu;
        kp *= std::exp(-a * lu);
      }
      const double dt = std::abs(X(i, D) - X(j, D));
      const double ut = dt * dt / (2.0 * hp.temporal_alpha * l_rq * l_rq);
      const double lut = std::log1p(ut);
      KP(i, j) = kp;
      UT(i, j) = ut;
      LUT(i, j) = lut;
      E(i, j) = std::exp(-dt / hp.temporal_l);
      R(i, j) = std::exp(-hp.temporal_alpha * lut);
      Ky(i, j) = kp * (E(i, j) + R(i, j));
    }
  }
  Ky.diagonal().array() += noise2;
  Eigen::MatrixXd L;
  out.jitter = lapack_factor_with_jitter(Ky, L);
  Eigen::VectorXd alpha = data.targets;
  L.triangularView<Eigen::Lower>().solveInPlace(alpha);
  L.triangularView<Eigen::Lower>().adjoint().solveInPlace(alpha);
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(L(i, i));
  out.log_likelihood = -0.5 * data.targets.dot(alpha) - log_det_half -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  out.value = out.log_likelihood + log_prior;
  if (!with_gradient) return out;

  // d LML / d p = 0.5 tr((alpha alpha' - Ky^{-1}) dK/dp), lower triangle only.
  cholesky_inverse_in_place(L);
  Eigen::MatrixXd& W = L;

  const bool split = hp.temporal_l2.has_value();
  const Eigen::Index i_l = 1, i_a = 1 + D, i_tl = 1 + 2 * D, i_ta = i_tl + 1, i_tl2 = i_ta + 1;
  const Eigen::Index i_noise = P - 1;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(P);
  double trace = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double w = alpha[i] * alpha[j] - W(i, j);
      if (i == j) trace += w;
      // Symmetric trace: off-diagonal pairs count twice, halved by the 0.5.
      const double weight = (i == j ? 0.5 : 1.0) * w;
      if (weight == 0.0) continue;
      const double kp = KP(i, j);
      const double e = E(i, j);
      const double r = R(i, j);
      const double wk = weight * kp * (e + r);

      grad[0] += 2.0 * wk;
      for (Eigen::Index d = 0; d < D; ++d) {
        const auto sd = static_cast<std::size_t>(d);
        const double a = hp.alphas[sd];
        const double u = U[sd](i, j);
        const double ratio = u / (1.0 + u);
        grad[i_l + d] += wk * 2.0 * a * ratio;
        grad[i_a + d] += wk * a * (ratio - LU[sd](i, j));
      }
      const double ut = UT(i, j);
      const double ratio_t = ut / (1.0 + ut);
      const double wkr = weight * kp * r;
      const double d_exp = weight * kp * e * std::abs(X(i, D) - X(j, D)) / hp.temporal_l;
      const double d_rq_l = wkr * 2.0 * hp.temporal_alpha * ratio_t;
      if (split) {
        grad[i_tl] += d_exp;
        grad[i_tl2] += d_rq_l;
      } else {
        grad[i_tl] += d_exp + d_rq_l;
      }
      grad[i_ta] += wkr * hp.temporal_alpha * (ratio_t - LUT(i, j));
    }
  }
  grad[i_noise] += trace * noise2;
  out.gradient = grad + prior_grad;
  return out;
}

Posterior::Posterior(GPDataset data, KernelHyperparams hp) : data_(std::move(data)), hp_(std::move(hp)) {
  hp_.validate();
  check_dataset(data_, hp_);
  if (data_.size() == 0) return;
  Eigen::MatrixXd Ky = gram(data_.inputs, hp_);
  Ky.diagonal().array() += hp_.noise_sigma * hp_.noise_sigma;
  jitter_ = factor_with_jitter(Ky, llt_);
  alpha_ = llt_.solve(data_.targets);
}

Prediction Posterior::predict(std::span<const double> theta, double t) const {
  if (theta.size() != hp_.dims()) throw std::invalid_argument("query dimension does not match kernel");
  Eigen::MatrixXd q(static_cast<Eigen::Index>(theta.size()), 1);
  for (std::size_t d = 0; d < theta.size(); ++d) q(static_cast<Eigen::Index>(d), 0) = theta[d];
  Eigen::VectorXd mean, variance;
  predict_batch(q, t, mean, variance);
  return {mean[0], variance[0]};
}

void Posterior::predict_batch(const Eigen::MatrixXd& thetas, double t, Eigen::VectorXd& mean,
                              Eigen::VectorXd& variance) const {
  const auto D = static_cast<Eigen::Index>(hp_.dims());
  if (thetas.rows() != D) throw std::invalid_argument("query dimension does not match kernel");
  const Eigen::Index P = thetas.cols();
  const double prior_var = hp_.sigma_f * hp_.sigma_f * temporal_factor(t, t, hp_);
  const auto n = static_cast<Eigen::Index>(data_.size());
  if (n == 0) {
    mean = Eigen::VectorXd::Zero(P);
    variance = Eigen::VectorXd::Constant(P, prior_var);
    return;
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X = data_.inputs;
  Eigen::VectorXd kt(n);
  for (Eigen::Index j = 0; j < n; ++j) kt[j] = temporal_factor(t, X(j, D), hp_);
  Eigen::MatrixXd kstar(n, P);
  for (Eigen::Index p = 0; p < P; ++p) {
    const double* q = thetas.col(p).data();
    for (Eigen::Index j = 0; j < n; ++j) kstar(j, p) = param_factor(q, X.row(j).data(), hp_) * kt[j];
  }
  mean = kstar.transpose() * alpha_;
  llt_.matrixL().solveInPlace(kstar);
  variance = (prior_var - kstar.colwise().squaredNorm().transpose().array()).max(0.0);
}

TemporalDiagnostic temporal_lengthscale_diagnostic(const KernelHyperparams& hp, double horizon,
                                                   double ratio_threshold) {
  if (!(horizon >= 1.0)) throw std::invalid_argument("horizon must be at least 1");
  TemporalDiagnostic out;
  out.ratio = hp.temporal_l / horizon;
  out.time_varying = hp.temporal_l < horizon * ratio_threshold;
  return out;
}

}  // namespace olps::gp
