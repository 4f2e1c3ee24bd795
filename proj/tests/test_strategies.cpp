#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "olps/portfolio.hpp"
#include "olps/strategies.hpp"
#include "oracles.hpp"

using namespace olps;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

bool on_simplex(const VectorXd& w) { return (w.array() >= 0.0).all() && std::abs(w.sum() - 1.0) <= 1e-9; }

VectorXd random_relatives(std::size_t m, std::mt19937_64& rng) {
  std::lognormal_distribution<double> d(0.0, 0.05);
  VectorXd x(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = d(rng);
  return x;
}

PriceRelativeSeries series_of(const std::vector<std::vector<double>>& rows) {
  RowMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < rows[t].size(); ++i)
      x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i];
  return PriceRelativeSeries(x, {});
}

VectorXd permuted(const VectorXd& v, const std::vector<int>& perm) {
  VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[perm[static_cast<std::size_t>(i)]];
  return out;
}

}  // namespace

TEST_SUITE("portfolio") {
  TEST_CASE("portfolio construction enforces the simplex") {
    CHECK_NOTHROW(Portfolio(vec({0.25, 0.75})));
    CHECK_THROWS_AS(Portfolio(vec({0.5, 0.6})), std::invalid_argument);
    CHECK_THROWS_AS(Portfolio(vec({1.5, -0.5})), std::invalid_argument);
    CHECK(Portfolio::uniform(4)[2] == 0.25);
    CHECK(Portfolio::vertex(3, 1).weights() == vec({0, 1, 0}));
  }

  TEST_CASE("simplex projection examples") {
    const VectorXd on = vec({0.2, 0.3, 0.5});
    CHECK(simplex_project(on).weights().isApprox(on, 1e-15));
    CHECK(simplex_project(vec({2, 0})).weights().isApprox(vec({1, 0}), 1e-15));
    const VectorXd third = simplex_project(vec({0.5, 0.5, 0.5})).weights();
    CHECK((third.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(simplex_project(vec({1.0, std::nan("")})), std::invalid_argument);
  }

  TEST_CASE("simplex projection agrees with the bisection oracle and satisfies KKT") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 12);
    for (int trial = 0; trial < 1000; ++trial) {
      VectorXd v(dim(rng));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng);
      const VectorXd w = simplex_project(v).weights();
      REQUIRE(on_simplex(w));
      CHECK((w - oracles::project_by_bisection(v)).cwiseAbs().maxCoeff() < 1e-9);
      // KKT: v - w = tau on the support, <= tau off it.
      double tau = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (w[i] > 0) tau = v[i] - w[i];
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (w[i] > 0) CHECK(std::abs(v[i] - w[i] - tau) < 1e-9);
        else CHECK(v[i] <= tau + 1e-9);
      }
    }
  }

  TEST_CASE("period return") {
    CHECK(period_return(Portfolio::uniform(3), VectorXd::Ones(3)) == 1.0);
    CHECK(period_return(Portfolio::vertex(2, 0), vec({1.1, 0.5})) == 1.1);
    CHECK(period_return(Portfolio(vec({0.5, 0.5})), vec({1.2, 0.8})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(period_return(Portfolio::uniform(2), VectorXd::Ones(3)), std::invalid_argument);
  }

  TEST_CASE("simplex QP matches the Euclidean projection when A = I") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      VectorXd y(6);
      for (Eigen::Index i = 0; i < 6; ++i) y[i] = n(rng);
      const auto w = project_in_norm(Eigen::MatrixXd::Identity(6, 6), y, Portfolio::uniform(6));
      CHECK((w.weights() - oracles::project_by_bisection(y)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_SUITE("market and benchmarks") {
  TEST_CASE("market update drifts with returns") {
    const Portfolio u = Portfolio::uniform(3);
    CHECK(market_update(u, VectorXd::Constant(3, 1.07)).weights().isApprox(u.weights(), 1e-15));
    CHECK(market_update(Portfolio(vec({0.5, 0.5})), vec({2, 1})).weights().isApprox(vec({2.0 / 3, 1.0 / 3}), 1e-15));
    auto market = make_strategy("market", 4);
    CHECK(market->decide({}) == Portfolio::uniform(4));
  }

  TEST_CASE("best stock") {
    CHECK(best_stock(series_of({{1.1}, {0.9}})).weights() == vec({1}));
    CHECK(best_stock(series_of({{1.0, 1.1, 0.9}, {1.0, 1.2, 1.1}})).weights() == vec({0, 1, 0}));
    CHECK(best_stock(series_of({{1.2, 1.2}, {0.9, 0.9}})).weights() == vec({1, 0}));  // tie: lowest index
  }

  TEST_CASE("BCRP corner and alternating cases") {
    const auto dom = series_of({{1.0, 1.1}, {0.9, 1.0}, {1.05, 1.2}});
    CHECK((bcrp(dom).weights() - vec({0, 1})).cwiseAbs().maxCoeff() < 1e-9);

    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 20; ++t) rows.push_back({t % 2 == 0 ? 2.0 : 0.5, 1.0});
    const auto alt = series_of(rows);
    // Root of d/dw [0.5 log(1 + w) + 0.5 log(1 - w/2)].
    const double w1 = oracles::bisect([](double w) { return -(0.5 / (1 + w) - 0.25 / (1 - 0.5 * w)); }, 0.0, 1.0);
    CHECK(std::abs(w1 - 0.5) < 1e-9);
    CHECK((bcrp(alt).weights() - vec({w1, 1 - w1})).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("BCRP wealth is at least best-stock wealth") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      RowMatrix x(60, 5);
      for (Eigen::Index t = 0; t < 60; ++t) x.row(t) = random_relatives(5, rng).transpose();
      const PriceRelativeSeries s(x, {});
      const double bs = crp_wealth(s, best_stock(s));
      CHECK(crp_wealth(s, bcrp(s)) >= bs * (1 - 1e-8));
    }
  }
}

TEST_SUITE("update rules") {
  TEST_CASE("EG") {
    const Portfolio w(vec({0.3, 0.7}));
    std::mt19937_64 rng(1);
    CHECK(eg_update(w, random_relatives(2, rng), 0.0).weights().isApprox(w.weights(), 1e-15));
    CHECK(eg_update(w, vec({1.3, 1.3}), 0.05).weights().isApprox(w.weights(), 1e-15));
    VectorXd expect = vec({0.5 * std::exp(0.05 * 4.0 / 3.0), 0.5 * std::exp(0.05 * 2.0 / 3.0)});
    expect /= expect.sum();
    CHECK((eg_update(Portfolio(vec({0.5, 0.5})), vec({2, 1}), 0.05).weights() - expect).cwiseAbs().maxCoeff() < 1e-12);
    // Huge exponents stay finite.
    CHECK(on_simplex(eg_update(Portfolio(vec({0.5, 0.5})), vec({1e6, 1e-6}), 1e3).weights()));
  }

  TEST_CASE("PAMR") {
    const Portfolio w(vec({0.5, 0.5}));
    CHECK(pamr_update(w, vec({1.2, 0.8}), 1.0) == w);  // w.x = 1.0 <= epsilon
    CHECK(pamr_update(w, vec({1.1, 1.1}), 0.5) == w);  // flat direction
    const VectorXd out = pamr_update(w, vec({1.2, 0.8}), 0.9).weights();
    const double tau = (1.0 - 0.9) / 0.08;
    CHECK(std::abs(tau - 1.25) < 1e-12);
    CHECK((out - oracles::project_by_bisection(vec({0.5 - tau * 0.2, 0.5 + tau * 0.2}))).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((out - vec({0.25, 0.75})).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("OLMAR prediction and step") {
    // prices (1,1) -> (1,2) -> (1,1)
    std::deque<VectorXd> recent{vec({1, 2}), vec({1, 0.5})};
    const auto pred = olmar_predict(recent, 2);
    REQUIRE(pred);
    CHECK((*pred - vec({1, 1.5})).cwiseAbs().maxCoeff() < 1e-15);
    const Portfolio w(vec({0.5, 0.5}));
    const double lambda = (1.3 - 1.25) / 0.125;
    CHECK(std::abs(lambda - 0.4) < 1e-12);
    const VectorXd out = olmar_update(w, *pred, 1.3).weights();
    CHECK((out - oracles::project_by_bisection(vec({0.5 - lambda * 0.25, 0.5 + lambda * 0.25}))).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK((out - vec({0.4, 0.6})).cwiseAbs().maxCoeff() < 1e-9);

    std::deque<VectorXd> flat{VectorXd::Ones(2), VectorXd::Ones(2), VectorXd::Ones(2)};
    const auto ones = olmar_predict(flat, 3);
    CHECK(*ones == VectorXd::Ones(2));
    CHECK(olmar_update(w, *ones, 10.0) == w);
    CHECK(olmar_update(w, *pred, 1.2) == w);  // w.x~ = 1.25 >= 1.2
    CHECK_FALSE(olmar_predict({vec({1, 1})}, 5));
  }

  TEST_CASE("ONS") {
    const auto s0 = OnsState::initial(3);
    CHECK(s0.portfolio == Portfolio::uniform(3));
    const auto s1 = ons_update(s0, VectorXd::Constant(3, 1.02), {});
    CHECK((s1.portfolio.weights() - s0.portfolio.weights()).cwiseAbs().maxCoeff() < 1e-12);

    // Generalized projection oracle: y = w + s A^{-1} 1 projects back to w,
    // because A(w - y) = -s 1 meets the KKT conditions at an interior w.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
    const VectorXd g = vec({1.0, 0.7, 1.3});
    A += g * g.transpose();
    const VectorXd w = vec({0.2, 0.3, 0.5});
    const VectorXd y = w + 0.37 * A.ldlt().solve(VectorXd::Ones(3));
    CHECK((project_in_norm(A, y, Portfolio::uniform(3)).weights() - w).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937_64 rng(2);
    auto st = OnsState::initial(4);
    for (int t = 0; t < 200; ++t) {
      st = ons_update(st, random_relatives(4, rng), {0.1, 1.0, 0.125});
      REQUIRE(on_simplex(st.portfolio.weights()));
    }
  }

  TEST_CASE("CWMR") {
    const auto s0 = CwmrState::initial(2);
    CHECK(s0.covariance.isApprox(Eigen::MatrixXd::Identity(2, 2) / 4.0));
    // Constraint already met: mean.x + phi x'Sx <= epsilon.
    const CwmrParams loose{2.0, 5.0};
    CHECK(cwmr_multiplier(s0, vec({1.1, 0.9}), loose) == 0.0);
    const auto same = cwmr_update(s0, vec({1.1, 0.9}), loose);
    CHECK(same.mean == s0.mean);
    CHECK(same.covariance == s0.covariance);
    CHECK(cwmr_update(s0, vec({1.05, 1.05}), {}).mean == s0.mean);

    // Hand instance: identity covariance, solved independently by bisection.
    CwmrState s{vec({0.5, 0.5}), Eigen::MatrixXd::Identity(2, 2)};
    const VectorXd x = vec({1.1, 0.9});
    const CwmrParams p{2.0, 0.5};
    const double M = 1.0, V = x.squaredNorm(), W = x.sum(), xbar = W / 2.0, k = V - xbar * W;
    auto g = [&](double lam) { return M - lam * k + p.phi * V / (1 + 2 * lam * p.phi * V) - p.epsilon; };
    const double lambda = oracles::bisect(g, 0.0, 1e4);
    CHECK(std::abs(cwmr_multiplier(s, x, p) - lambda) < 1e-9 * std::max(1.0, lambda));
    const VectorXd expected = oracles::project_by_bisection(s.mean - lambda * (x.array() - xbar).matrix());
    CHECK((cwmr_update(s, x, p).mean - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_SUITE("randomized invariants") {
  TEST_CASE("passive branches and flat markets are exact no-ops") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(2, 10);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto m = static_cast<std::size_t>(dim(rng));
      const Portfolio w(oracles::random_simplex(m, rng));
      const VectorXd x = random_relatives(m, rng);
      const double wx = w.weights().dot(x);
      CHECK(pamr_update(w, x, wx + u(rng)) == w);
      CHECK(pamr_update(w, x, wx) == w);
      CHECK(olmar_update(w, x, wx - u(rng)) == w);
      CHECK(olmar_update(w, x, wx) == w);
      const VectorXd flat = VectorXd::Constant(static_cast<Eigen::Index>(m), u(rng));
      CHECK(pamr_update(w, flat, 0.0) == w);
      CHECK(olmar_update(w, flat, 100.0) == w);
      CHECK(eg_update(w, x, 0.0).weights().isApprox(w.weights(), 1e-14));
      const CwmrState cs{w.weights(), Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) / double(m * m)};
      CHECK(cwmr_update(cs, flat, {}).mean == cs.mean);
    }
  }

  TEST_CASE("every update stays on the simplex") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_real_distribution<double> eps(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto m = static_cast<std::size_t>(dim(rng));
      const Portfolio w(oracles::random_simplex(m, rng));
      const VectorXd x = random_relatives(m, rng);
      CHECK(on_simplex(market_update(w, x).weights()));
      CHECK(on_simplex(eg_update(w, x, eps(rng)).weights()));
      CHECK(on_simplex(pamr_update(w, x, eps(rng)).weights()));
      CHECK(on_simplex(olmar_update(w, x, 1.0 + 10.0 * eps(rng)).weights()));
      auto cs = CwmrState::initial(m);
      cs.mean = w.weights();
      CHECK(on_simplex(cwmr_update(cs, x, {1.0 + eps(rng), eps(rng)}).mean));
      auto os = OnsState::initial(m);
      os.portfolio = w;
      CHECK(on_simplex(ons_update(os, x, {0.0, 1.0, 0.125}).portfolio.weights()));
    }
  }

  TEST_CASE("updates commute with asset permutations") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t m = 5;
      std::vector<int> perm(m);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const VectorXd wv = oracles::random_simplex(m, rng);
      const Portfolio w(wv), wp(permuted(wv, perm));
      const VectorXd x = random_relatives(m, rng), xp = permuted(x, perm);
      auto same = [&](const Portfolio& a, const Portfolio& b) {
        return (permuted(a.weights(), perm) - b.weights()).cwiseAbs().maxCoeff() < 1e-12;
      };
      CHECK(same(market_update(w, x), market_update(wp, xp)));
      CHECK(same(eg_update(w, x, 0.05), eg_update(wp, xp, 0.05)));
      CHECK(same(pamr_update(w, x, 0.5), pamr_update(wp, xp, 0.5)));
      CHECK(same(olmar_update(w, x, 1.2), olmar_update(wp, xp, 1.2)));

      auto cs = CwmrState::initial(m), csp = cs;
      cs.mean = wv;
      csp.mean = permuted(wv, perm);
      CHECK((permuted(cwmr_update(cs, x, {}).mean, perm) - cwmr_update(csp, xp, {}).mean).cwiseAbs().maxCoeff() < 1e-12);

      auto os = OnsState::initial(m), osp = os;
      os.portfolio = w;
      osp.portfolio = wp;
      CHECK((permuted(ons_update(os, x, {}).portfolio.weights(), perm) - ons_update(osp, xp, {}).portfolio.weights())
                .cwiseAbs()
                .maxCoeff() < 1e-9);
    }
  }
}

TEST_SUITE("strategy interface") {
  TEST_CASE("roster, defaults and construction errors") {
    CHECK(strategy_roster() == std::vector<std::string>{"market", "bs", "bcrp", "eg", "ons", "pamr", "cwmr", "olmar"});
    CHECK(strategy_params("pamr")[0].default_value == 0.5);
    CHECK(strategy_params("olmar")[1].integer);
    CHECK_THROWS_AS(make_strategy("nope", 2), std::invalid_argument);
    CHECK_THROWS_AS(make_strategy("bcrp", 2), std::invalid_argument);
    CHECK_THROWS_AS(make_strategy("pamr", 0), std::invalid_argument);
  }

  TEST_CASE("decide is idempotent and every causal strategy starts uniform") {
    std::mt19937_64 rng(8);
    for (const char* name : {"market", "eg", "ons", "pamr", "cwmr", "olmar"}) {
      auto s = make_strategy(name, 4);
      std::vector<double> theta;
      for (const auto& p : s->params()) theta.push_back(p.default_value);
      CHECK(s->decide(theta) == Portfolio::uniform(4));
      for (int t = 0; t < 30; ++t) {
        const Portfolio a = s->decide(theta);
        const Portfolio b = s->decide(theta);
        CHECK(a == b);
        s->observe(random_relatives(4, rng));
      }
      CHECK_FALSE(s->hindsight());
    }
  }

  TEST_CASE("OLMAR holds uniform until its window has history") {
    auto s = make_strategy("olmar", 3);
    std::mt19937_64 rng(4);
    const std::vector<double> theta{10.0, 5.0};
    for (int t = 0; t < 4; ++t) {
      CHECK(s->decide(theta) == Portfolio::uniform(3));
      s->observe(random_relatives(3, rng));
    }
    CHECK_FALSE(s->decide(theta) == Portfolio::uniform(3));
  }

  TEST_CASE("hindsight benchmarks are flagged") {
    const auto series = series_of({{1.1, 0.9}, {0.95, 1.2}});
    CHECK(make_strategy("bs", 2, {}, &series)->hindsight());
    CHECK(make_strategy("bcrp", 2, {}, &series)->hindsight());
  }
}
