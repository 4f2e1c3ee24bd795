#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "olps/metrics.hpp"
#include "oracles.hpp"

using namespace olps::metrics;

namespace {

constexpr double kTol = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

ReturnTrajectory traj(std::vector<double> r, double ppy = 252.0) { return ReturnTrajectory(std::move(r), ppy); }

}  // namespace

TEST_CASE("trajectory validation") {
  CHECK_THROWS_AS(traj({}), std::invalid_argument);
  CHECK_THROWS_AS(traj({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(traj({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("cumulative wealth") {
  CHECK(cumulative_wealth(traj({1.0, 1.0, 1.0})) == 1.0);
  CHECK(std::abs(cumulative_wealth(traj({1.1, 0.9})) - 0.99) < kTol);
}

TEST_CASE("APY") {
  CHECK(std::abs(apy(traj({1.02, 1 / 1.02, 1.0}))) < kTol);
  std::vector<double> year(252, std::pow(2.0, 1.0 / 252.0));
  CHECK(std::abs(apy(traj(year)) - 1.0) < kTol);
  std::vector<double> two(504, std::pow(1.21, 1.0 / 504.0));
  CHECK(std::abs(apy(traj(two)) - 0.10) < kTol);
}

TEST_CASE("annualized volatility") {
  CHECK(ann_std(traj({1.01, 1.01, 1.01})) == 0.0);
  const double expect = oracles::sample_std({0.01, -0.01}) * std::sqrt(252.0);
  CHECK(std::abs(ann_std(traj({1.01, 0.99})) - expect) < kTol);
  CHECK(std::abs(expect - 0.2245) < 1e-4);
  const double scaled = ann_std(traj({1.03, 0.97}));
  CHECK(std::abs(scaled - 3.0 * ann_std(traj({1.01, 0.99}))) < kTol);
  CHECK_THROWS_AS(ann_std(traj({1.01})), std::invalid_argument);
}

TEST_CASE("maximum drawdown") {
  CHECK(max_drawdown(traj({1.1, 1.2, 1.05})) == 0.0);
  CHECK(max_drawdown(traj({1.0, 1.0})) == 0.0);
  const std::vector<double> w{1, 2, 1, 3};
  CHECK(std::abs(max_drawdown_of_wealth(w) - 0.5) < kTol);
  CHECK(std::abs(max_drawdown(traj({2.0, 0.5, 3.0})) - 0.5) < kTol);
  // Order matters: same multiset, different drawdown.
  CHECK(max_drawdown(traj({0.5, 0.5, 4.0})) == 0.75);
  CHECK(max_drawdown(traj({0.5, 4.0, 0.5})) == 0.5);
}

TEST_CASE("Sharpe and Calmar") {
  CHECK(sharpe(0.05, 0.2, 0.05).value == 0.0);
  CHECK(std::abs(sharpe(0.10, 0.20).value - 0.5) < kTol);
  CHECK(std::abs(sharpe(0.20, 0.40).value - sharpe(0.10, 0.20).value) < kTol);
  const auto flat = sharpe(0.1, 0.0);
  CHECK_FALSE(flat.defined);
  CHECK(flat.value == kInf);
  CHECK(sharpe(-0.1, 0.0).value == -kInf);

  CHECK(std::abs(calmar(0.2, 0.1).value - 2.0) < kTol);
  CHECK(calmar(0.0, 0.3).value == 0.0);
  const auto mono = calmar(traj({1.01, 1.02, 1.03}));
  CHECK_FALSE(mono.defined);
  CHECK(mono.value == kInf);
}

TEST_CASE("active-return t-test") {
  const auto a = traj({1.01, 0.98, 1.03, 0.995});
  const auto same = active_return_ttest(a, a);
  CHECK(same.t_stat == 0.0);
  CHECK(same.p_value == 0.5);

  std::vector<double> edge(100, 0.001);
  const auto degenerate = one_sample_ttest(edge);
  CHECK(degenerate.t_stat == kInf);
  CHECK(degenerate.p_value == 0.0);

  // Constant edge built from gross returns, where rounding jitters the spread.
  std::vector<double> s, m;
  for (int t = 0; t < 100; ++t) {
    m.push_back(1.0 + 0.003 * std::sin(t));
    s.push_back(m.back() + 0.001);
  }
  CHECK(active_return_ttest(traj(s), traj(m)).t_stat == kInf);

  CHECK_THROWS_AS(active_return_ttest(traj({1.0, 1.0}), traj({1.0, 1.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(one_sample_ttest(std::vector<double>{0.1}), std::invalid_argument);
}

TEST_CASE("t statistic and p-value against independent formulas") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0005, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(40 + trial * 10);
    for (double& v : a) v = z(rng);
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(a.size());
    const double t = mean / (oracles::sample_std(a) / std::sqrt(static_cast<double>(a.size())));
    const auto r = one_sample_ttest(a);
    CHECK(std::abs(r.t_stat - t) < 1e-10 * std::max(1.0, std::abs(t)));
    CHECK(std::abs(r.p_value - oracles::student_t_upper_tail(t, static_cast<double>(a.size() - 1))) < 1e-9);
    CHECK((r.t_stat > 0) == (mean > 0));
  }
}

TEST_CASE("randomized identities") {
  std::mt19937_64 rng(10);
  std::lognormal_distribution<double> g(0.0005, 0.02);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(1 + trial * 3);
    for (double& v : r) v = g(rng);
    const auto tr = traj(r);
    const double cw = cumulative_wealth(tr);
    const double years = static_cast<double>(r.size()) / 252.0;
    CHECK(std::abs(std::pow(1.0 + apy(tr), years) - cw) <= 1e-12 * cw);
    CHECK(cw > 0.0);
    const double mdd = max_drawdown(tr);
    CHECK(mdd >= 0.0);
    CHECK(mdd < 1.0);
    std::vector<double> shuffled = r;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(std::abs(cumulative_wealth(traj(shuffled)) - cw) <= 1e-12 * cw);
  }
}

TEST_CASE("summary bundles every measure") {
  const auto s = summarize(traj({1.01, 0.99, 1.02}), traj({1.0, 1.0, 1.0}));
  CHECK(std::abs(s.cumulative_wealth - 1.01 * 0.99 * 1.02) < kTol);
  CHECK(s.max_drawdown > 0.0);
  CHECK(s.sharpe.defined);
  CHECK(s.ttest.t_stat > 0.0);
}
