#include "olps/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace olps {

namespace {

void check_dims(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != w.size()) {
    throw std::invalid_argument(fmt::format("portfolio has {} assets, relatives have {}", w.size(), x.size()));
  }
}

Portfolio renormalized(Eigen::VectorXd w) {
  w /= w.sum();
  return Portfolio(std::move(w));
}

}  // namespace

Portfolio market_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dims(w, x);
  return renormalized(w.weights().cwiseProduct(x));
}

Portfolio eg_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x, double eta) {
  check_dims(w, x);
  if (!(eta >= 0.0)) throw std::invalid_argument("EG learning rate must be nonnegative");
  const double gross = w.weights().dot(x);
  Eigen::ArrayXd exponent = eta * x.array() / gross;
  // Shift by the max exponent; the factor cancels in the normalization.
  exponent -= exponent.maxCoeff();
  return renormalized(w.weights().array() * exponent.exp());
}

Portfolio pamr_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x, double epsilon) {
  check_dims(w, x);
  const double gross = w.weights().dot(x);
  if (gross <= epsilon) return w;
  const Eigen::VectorXd direction = x.array() - x.mean();
  const double norm2 = direction.squaredNorm();
  if (std::sqrt(norm2) < kDegenerateDirection) return w;
  const double tau = (gross - epsilon) / norm2;
  return simplex_project(w.weights() - tau * direction);
}

Portfolio olmar_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x_pred, double epsilon) {
  check_dims(w, x_pred);
  const double predicted = w.weights().dot(x_pred);
  if (predicted >= epsilon) return w;
  const Eigen::VectorXd direction = x_pred.array() - x_pred.mean();
  const double norm2 = direction.squaredNorm();
  if (std::sqrt(norm2) < kDegenerateDirection) return w;
  const double lambda = (epsilon - predicted) / norm2;
  return simplex_project(w.weights() + lambda * direction);
}

std::optional<Eigen::VectorXd> olmar_predict(const std::deque<Eigen::VectorXd>& recent, int window) {
  if (window < 1) throw std::invalid_argument("OLMAR window must be at least 1");
  if (recent.empty()) return std::nullopt;
  if (static_cast<int>(recent.size()) < window - 1) return std::nullopt;
  const Eigen::Index m = recent.back().size();
  Eigen::VectorXd sum = Eigen::VectorXd::Ones(m);    // k = 0 term, p_t / p_t
  Eigen::VectorXd ratio = Eigen::VectorXd::Ones(m);  // p_{t-k} / p_t
  auto it = recent.rbegin();
  for (int k = 1; k < window; ++k, ++it) {
    ratio = ratio.cwiseQuotient(*it);
    sum += ratio;
  }
  return sum / static_cast<double>(window);
}

OnsState OnsState::initial(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  return {Portfolio::uniform(m), Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
}

OnsState ons_update(const OnsState& state, const Eigen::Ref<const Eigen::VectorXd>& x, const OnsParams& params) {
  check_dims(state.portfolio, x);
  if (!(params.beta > 0.0) || !(params.delta > 0.0) || params.eta < 0.0 || params.eta > 1.0) {
    throw std::invalid_argument("ONS needs beta > 0, delta > 0 and eta in [0, 1]");
  }
  const Eigen::VectorXd grad = x / state.portfolio.weights().dot(x);
  OnsState next = state;
  next.A.noalias() += grad * grad.transpose();
  next.b += (1.0 + 1.0 / params.beta) * grad;
  try {
    // argmin_w (w - y)'A(w - y) with y = delta A^{-1} b, i.e. c = delta b.
    Eigen::VectorXd p = solve_simplex_qp(next.A, params.delta * next.b, state.portfolio.weights());
    p = p.cwiseMax(0.0);
    p /= p.sum();
    const auto m = static_cast<double>(p.size());
    next.portfolio = renormalized((1.0 - params.eta) * p.array() + params.eta / m);
  } catch (const QpError&) {
    next.portfolio = state.portfolio;
  }
  return next;
}

CwmrState CwmrState::initial(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  const double md = static_cast<double>(m);
  return {Eigen::VectorXd::Constant(n, 1.0 / md), Eigen::MatrixXd::Identity(n, n) / (md * md)};
}

double cwmr_multiplier(const CwmrState& state, const Eigen::Ref<const Eigen::VectorXd>& x, const CwmrParams& params) {
  const Eigen::VectorXd sigma_x = state.covariance * x;
  const Eigen::VectorXd sigma_one = state.covariance.rowwise().sum();
  const double M = state.mean.dot(x);
  const double V = x.dot(sigma_x);
  const double W = sigma_one.dot(x);
  const double x_bar = W / sigma_one.sum();
  const double phi = params.phi;
  const double eps = params.epsilon;
  // Constraint M' + phi V' = eps after the update, with M' = M - lambda (V - x_bar W)
  // and V' = V / (1 + 2 lambda phi V), gives a lambda^2 + b lambda + c = 0.
  const double a = 2.0 * phi * V * (V - x_bar * W);
  const double b = (V - x_bar * W) + 2.0 * phi * V * (eps - M);
  const double c = eps - M - phi * V;
  double lambda = 0.0;
  if (std::abs(a) > 1e-300) {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) lambda = (-b + std::sqrt(disc)) / (2.0 * a);
  } else if (std::abs(b) > 1e-300) {
    lambda = -c / b;
  }
  return std::isfinite(lambda) ? std::max(lambda, 0.0) : 0.0;
}

CwmrState cwmr_update(const CwmrState& state, const Eigen::Ref<const Eigen::VectorXd>& x, const CwmrParams& params) {
  if (x.size() != state.mean.size()) throw std::invalid_argument("CWMR dimension mismatch");
  const Eigen::VectorXd sigma_one = state.covariance.rowwise().sum();
  const double x_bar = sigma_one.dot(x) / sigma_one.sum();
  const Eigen::VectorXd direction = state.covariance * (x.array() - x_bar).matrix();
  if (direction.norm() < kDegenerateDirection) return state;
  const double lambda = cwmr_multiplier(state, x, params);
  if (lambda <= 0.0) return state;

  CwmrState next;
  next.mean = simplex_project(state.mean - lambda * direction).weights();
  // Sherman-Morrison form of (Sigma^{-1} + 2 lambda phi x x')^{-1}.
  const Eigen::VectorXd sigma_x = state.covariance * x;
  const double gain = 2.0 * lambda * params.phi;
  next.covariance = state.covariance - (gain / (1.0 + gain * x.dot(sigma_x))) * sigma_x * sigma_x.transpose();
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose());
  const auto m = static_cast<double>(x.size());
  const double trace = next.covariance.trace();
  const Eigen::LLT<Eigen::MatrixXd> llt(next.covariance);
  if (!(trace > 0.0) || llt.info() != Eigen::Success || !next.covariance.allFinite()) {
    next.covariance = CwmrState::initial(static_cast<std::size_t>(m)).covariance;
  } else {
    next.covariance /= m * trace;
  }
  return next;
}

// ---------------------------------------------------------------------------

namespace {

class HeldPortfolio : public Strategy {
 protected:
  explicit HeldPortfolio(std::size_t m) : held_(Portfolio::uniform(m)), next_(held_) {}

  void observe(const Eigen::Ref<const Eigen::VectorXd>& x) override {
    held_ = next_;
    last_x_ = x;
    ++observed_;
  }

  Portfolio held_;
  Portfolio next_;
  std::optional<Eigen::VectorXd> last_x_;
  std::size_t observed_ = 0;
};

class MarketStrategy final : public HeldPortfolio {
 public:
  explicit MarketStrategy(std::size_t m) : HeldPortfolio(m) {}
  std::string_view name() const override { return "market"; }
  Portfolio decide(std::span<const double>) override {
    next_ = last_x_ ? market_update(held_, *last_x_) : held_;
    return next_;
  }
};

class FixedStrategy final : public HeldPortfolio {
 public:
  FixedStrategy(std::string name, Portfolio w) : HeldPortfolio(w.size()), name_(std::move(name)), w_(std::move(w)) {}
  std::string_view name() const override { return name_; }
  bool hindsight() const override { return true; }
  Portfolio decide(std::span<const double>) override {
    next_ = w_;
    return next_;
  }

 private:
  std::string name_;
  Portfolio w_;
};

class EgStrategy final : public HeldPortfolio {
 public:
  explicit EgStrategy(std::size_t m) : HeldPortfolio(m) {}
  std::string_view name() const override { return "eg"; }
  std::vector<ParamSpec> params() const override { return strategy_params("eg"); }
  Portfolio decide(std::span<const double> theta) override {
    next_ = last_x_ ? eg_update(held_, *last_x_, theta[0]) : held_;
    return next_;
  }
};

class PamrStrategy final : public HeldPortfolio {
 public:
  explicit PamrStrategy(std::size_t m) : HeldPortfolio(m) {}
  std::string_view name() const override { return "pamr"; }
  std::vector<ParamSpec> params() const override { return strategy_params("pamr"); }
  Portfolio decide(std::span<const double> theta) override {
    next_ = last_x_ ? pamr_update(held_, *last_x_, theta[0]) : held_;
    return next_;
  }
};

class OlmarStrategy final : public HeldPortfolio {
 public:
  OlmarStrategy(std::size_t m, std::size_t history) : HeldPortfolio(m), history_(history) {}
  std::string_view name() const override { return "olmar"; }
  std::vector<ParamSpec> params() const override { return strategy_params("olmar"); }
  Portfolio decide(std::span<const double> theta) override {
    const int window = std::max(1, static_cast<int>(std::lround(theta[1])));
    const auto predicted = olmar_predict(recent_, window);
    next_ = predicted ? olmar_update(held_, *predicted, theta[0]) : Portfolio::uniform(held_.size());
    return next_;
  }
  void observe(const Eigen::Ref<const Eigen::VectorXd>& x) override {
    HeldPortfolio::observe(x);
    recent_.push_back(x);
    while (recent_.size() > history_) recent_.pop_front();
  }

 private:
  std::size_t history_;
  std::deque<Eigen::VectorXd> recent_;
};

class OnsStrategy final : public Strategy {
 public:
  OnsStrategy(std::size_t m, double delta) : state_(OnsState::initial(m)), pending_(state_), delta_(delta) {}
  std::string_view name() const override { return "ons"; }
  std::vector<ParamSpec> params() const override { return strategy_params("ons"); }
  Portfolio decide(std::span<const double> theta) override {
    pending_ = last_x_ ? ons_update(state_, *last_x_, {theta[0], theta[1], delta_}) : state_;
    return pending_.portfolio;
  }
  void observe(const Eigen::Ref<const Eigen::VectorXd>& x) override {
    state_ = pending_;
    last_x_ = x;
  }

 private:
  OnsState state_;
  OnsState pending_;
  double delta_;
  std::optional<Eigen::VectorXd> last_x_;
};

class CwmrStrategy final : public Strategy {
 public:
  CwmrStrategy(std::size_t m, double epsilon) : state_(CwmrState::initial(m)), pending_(state_), epsilon_(epsilon) {}
  std::string_view name() const override { return "cwmr"; }
  std::vector<ParamSpec> params() const override { return strategy_params("cwmr"); }
  Portfolio decide(std::span<const double> theta) override {
    pending_ = last_x_ ? cwmr_update(state_, *last_x_, {theta[0], epsilon_}) : state_;
    return pending_.portfolio();
  }
  void observe(const Eigen::Ref<const Eigen::VectorXd>& x) override {
    state_ = pending_;
    last_x_ = x;
  }

 private:
  CwmrState state_;
  CwmrState pending_;
  double epsilon_;
  std::optional<Eigen::VectorXd> last_x_;
};

double constant_or(const std::map<std::string, double>& constants, const std::string& key, double fallback) {
  const auto it = constants.find(key);
  return it == constants.end() ? fallback : it->second;
}

}  // namespace

std::vector<std::string> strategy_roster() { return {"market", "bs", "bcrp", "eg", "ons", "pamr", "cwmr", "olmar"}; }

std::vector<ParamSpec> strategy_params(std::string_view name) {
  if (name == "eg") return {{"eta", 0.05}};
  if (name == "ons") return {{"eta", 0.0}, {"beta", 1.0}};
  if (name == "pamr") return {{"epsilon", 0.5}};
  if (name == "cwmr") return {{"phi", 2.0}};
  if (name == "olmar") return {{"epsilon", 10.0}, {"window", 5.0, true}};
  if (name == "market" || name == "bs" || name == "bcrp") return {};
  throw std::invalid_argument(fmt::format("unknown strategy '{}'", name));
}

std::unique_ptr<Strategy> make_strategy(std::string_view name, std::size_t num_assets,
                                        const std::map<std::string, double>& constants,
                                        const PriceRelativeSeries* series) {
  if (num_assets < 1) throw std::invalid_argument("strategy needs at least one asset");
  if (name == "market") return std::make_unique<MarketStrategy>(num_assets);
  if (name == "eg") return std::make_unique<EgStrategy>(num_assets);
  if (name == "pamr") return std::make_unique<PamrStrategy>(num_assets);
  if (name == "ons") return std::make_unique<OnsStrategy>(num_assets, constant_or(constants, "delta", 0.125));
  if (name == "cwmr") return std::make_unique<CwmrStrategy>(num_assets, constant_or(constants, "epsilon", 0.5));
  if (name == "olmar") {
    const auto history = static_cast<std::size_t>(std::max(1.0, constant_or(constants, "max_window", 64.0)));
    return std::make_unique<OlmarStrategy>(num_assets, history);
  }
  if (name == "bs" || name == "bcrp") {
    if (series == nullptr) throw std::invalid_argument(fmt::format("'{}' needs the full series", name));
    if (series->num_assets() != num_assets) throw std::invalid_argument("series does not match asset count");
    return std::make_unique<FixedStrategy>(std::string(name), name == "bs" ? best_stock(*series) : bcrp(*series));
  }
  throw std::invalid_argument(fmt::format("unknown strategy '{}'", name));
}

}  // namespace olps
