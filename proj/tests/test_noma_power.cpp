#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "triad/channel.hpp"
#include "triad/noma_power.hpp"

namespace triad {
namespace {

TEST(SinrGamma, Basics) {
  EXPECT_DOUBLE_EQ(sinr_gamma(1e6, 1e6), 1.0);
  EXPECT_EQ(sinr_gamma(0.0, 1e6), 0.0);
  // 2^7.68 - 1 = 204.0739
  EXPECT_NEAR(sinr_gamma(60'000.0, 7812.5), 204.2, 204.2 * 1e-3);
  EXPECT_NEAR(sinr_gamma(60'000.0, 7812.5), 204.0738886629432, 1e-9);
}

TEST(SinrGamma, Errors) {
  EXPECT_THROW(sinr_gamma(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(sinr_gamma(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(sinr_gamma(61.0, 1.0), InfeasibleDemand);
  EXPECT_NO_THROW(sinr_gamma(60.0, 1.0));
}

TEST(MinPowerSingle, Fixtures) {
  EXPECT_EQ(min_power_single(0.0, 1e-15, 1e-10), 0.0);
  EXPECT_NEAR(min_power_single(204.2, 3.11e-17, 1.426e-8), 4.454e-7, 4.454e-7 * 0.01);
  EXPECT_NEAR(min_power_single(1.0, 1e-15, 1e-10), 1e-5, 1e-20);
  EXPECT_THROW(min_power_single(1.0, 1e-15, 0.0), std::invalid_argument);
}

TEST(SicOrder, StrongestFirstWithIndexTies) {
  const std::vector<double> g{1e-9, 5e-9, 1e-9, 7e-9};
  EXPECT_EQ(sic_order(g), (std::vector<std::size_t>{3, 1, 0, 2}));
}

TEST(ClosedForm, SingleUeIsMinPower) {
  const std::vector<double> g{2e-10};
  const std::vector<double> gamma{3.0};
  EXPECT_DOUBLE_EQ(closed_form_cluster_powers(g, gamma, 1e-15)[0], min_power_single(3.0, 1e-15, 2e-10));
}

TEST(ClosedForm, TwoUeFormula) {
  const double gamma = 0.7, noise = 4e-16, g_strong = 3e-9, g_weak = 2e-11;
  const std::vector<double> g{g_weak, g_strong};
  const auto p = closed_form_cluster_powers(g, std::vector<double>{gamma, gamma}, noise);
  const auto ref = oracle::two_ue_powers(gamma, noise, g_strong, g_weak);
  EXPECT_NEAR(p[0], ref.weak, 1e-25);
  EXPECT_NEAR(p[1], ref.strong, 1e-25);
}

TEST(ClosedForm, ZeroDemand) {
  const std::vector<double> g{1e-9, 2e-9, 3e-9};
  for (double p : closed_form_cluster_powers(g, std::vector<double>(3, 0.0), 1e-15))
    EXPECT_EQ(p, 0.0);
}

TEST(Iterative, SingleServedUe) {
  const RateDemand demand{60'000.0, 1.0};
  const double bw = 7812.5, noise = noise_power(bw, -174.0);
  const std::vector<double> g{1.426e-8};
  const PowerSolution sol = iterative_power_allocation(g, demand, bw, noise, 0.2);
  EXPECT_EQ(sol.served_count(), 1u);
  EXPECT_NEAR(sol.power[0], min_power_single(sinr_gamma(60'000.0, bw), noise, g[0]), 1e-15);
  EXPECT_TRUE(sol.converged);
  EXPECT_GE(sol.achieved_rate[0], 60'000.0 * (1.0 - 1e-6));
}

TEST(Iterative, InfeasibleSingleton) {
  const RateDemand demand{60'000.0, 1.0};
  const double bw = 7812.5, noise = noise_power(bw, -174.0);
  // Closed-form power = 204 * 3.1e-17 / 1e-17 >> 0.2 W.
  const std::vector<double> g{1e-17};
  const PowerSolution sol = iterative_power_allocation(g, demand, bw, noise, 0.2);
  EXPECT_EQ(sol.served_count(), 0u);
  EXPECT_TRUE(sol.outage[0]);
  EXPECT_EQ(sol.power[0], 0.0);
  const EeBreakdown ee = compute_ee(std::vector<PowerSolution>{sol}, demand, 3.162e-3);
  EXPECT_EQ(ee.served_count, 0u);
  EXPECT_EQ(ee.ee, 0.0);
}

TEST(Iterative, TwoUeMatchesClosedForm) {
  const RateDemand demand{60'000.0, 1.0};
  const double bw = 62'500.0, noise = noise_power(bw, -174.0);
  const std::vector<double> g{4e-10, 3e-11};
  const PowerSolution sol = iterative_power_allocation(g, demand, bw, noise, 0.2);
  const double gamma = sinr_gamma(60'000.0, bw);
  const auto ref = oracle::two_ue_powers(gamma, noise, g[0], g[1]);
  ASSERT_EQ(sol.served_count(), 2u);
  EXPECT_NEAR(sol.power[0], ref.strong, 1e-9);
  EXPECT_NEAR(sol.power[1], ref.weak, 1e-9);
  EXPECT_NEAR(sol.power[0], ref.strong, ref.strong * 1e-12);
  EXPECT_EQ(sol.sic_order, (std::vector<std::size_t>{0, 1}));
}

TEST(Iterative, AdmissionDropsTheMostExpensiveUe) {
  // The weak UE alone costs ~0.01 W; the strong UE decoded over it costs ~10 W.
  const RateDemand demand{1e6, 1.0};
  const double bw = 1e5, noise = 1e-12;
  const double gamma = sinr_gamma(1e6, bw); // 1023
  const std::vector<double> g{1.0e-7, 0.99e-7};
  const auto raw = closed_form_cluster_powers(g, std::vector<double>{gamma, gamma}, noise);
  ASSERT_GT(raw[0], 0.2);
  ASSERT_LT(raw[1], 0.2);
  const PowerSolution sol = iterative_power_allocation(g, demand, bw, noise, 0.2);
  EXPECT_TRUE(sol.outage[0]);
  EXPECT_FALSE(sol.outage[1]);
  EXPECT_NEAR(sol.power[1], raw[1], 1e-9);
}

TEST(Iterative, Errors) {
  const RateDemand demand{60'000.0, 1.0};
  EXPECT_THROW(iterative_power_allocation(std::vector<double>{}, demand, 1e5, 1e-15, 0.2), std::invalid_argument);
  EXPECT_THROW(iterative_power_allocation(std::vector<double>{1e-9}, demand, 1e5, 1e-15, 0.0),
               std::invalid_argument);
  EXPECT_THROW(iterative_power_allocation(std::vector<double>{1e-9}, RateDemand{1e9, 1.0}, 1e5, 1e-15, 0.2),
               InfeasibleDemand);
}

struct RandomCluster {
  std::vector<double> gains;
  RateDemand demand;
  double bandwidth;
  double noise;
};

RandomCluster random_cluster(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(1, 6);
  std::uniform_real_distribution<double> gain_db(-110.0, -70.0);
  std::uniform_real_distribution<double> data(5e3, 2e5);
  std::uniform_int_distribution<int> subcarriers(1, 128);
  RandomCluster c;
  c.gains.resize(size(rng));
  for (double& g : c.gains)
    g = db_to_linear(gain_db(rng));
  c.demand = {data(rng), 1.0};
  c.bandwidth = subcarriers(rng) * 7812.5;
  c.noise = noise_power(c.bandwidth, -174.0);
  return c;
}

TEST(Iterative, OracleEquivalenceAndInvariants) {
  std::mt19937_64 rng(606);
  int feasible = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const RandomCluster c = random_cluster(rng);
    const double gamma = sinr_gamma(c.demand.required_rate(), c.bandwidth);
    const PowerSolution sol = iterative_power_allocation(c.gains, c.demand, c.bandwidth, c.noise, 0.2);

    std::vector<double> served_gains;
    std::vector<std::size_t> served;
    for (std::size_t u = 0; u < c.gains.size(); ++u) {
      if (!sol.outage[u]) {
        served.push_back(u);
        served_gains.push_back(c.gains[u]);
      }
    }
    const auto ref = closed_form_cluster_powers(served_gains, std::vector<double>(served.size(), gamma), c.noise);
    for (std::size_t i = 0; i < served.size(); ++i) {
      EXPECT_NEAR(sol.power[served[i]], ref[i], 1e-9);
      EXPECT_LE(sol.power[served[i]], 0.2 + 1e-15);
      EXPECT_GE(sol.achieved_rate[served[i]], c.demand.required_rate() * (1.0 - 1e-6));
    }
    EXPECT_TRUE(sol.converged);
    if (served.size() == c.gains.size())
      ++feasible;
  }
  EXPECT_GT(feasible, 500);
}

TEST(Iterative, StrongerGainsNeedLessPowerAndRaiseEe) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomCluster c = random_cluster(rng);
    std::vector<double> boosted = c.gains;
    for (double& g : boosted)
      g *= 1.7;
    const PowerSolution a = iterative_power_allocation(c.gains, c.demand, c.bandwidth, c.noise, 0.2);
    const PowerSolution b = iterative_power_allocation(boosted, c.demand, c.bandwidth, c.noise, 0.2);
    if (a.outage != b.outage)
      continue;
    for (std::size_t u = 0; u < c.gains.size(); ++u)
      EXPECT_LE(b.power[u], a.power[u]);
    const double pc = dbm_to_watts(5.0);
    EXPECT_GE(compute_ee(std::vector<PowerSolution>{b}, c.demand, pc).ee,
              compute_ee(std::vector<PowerSolution>{a}, c.demand, pc).ee);
  }
}

TEST(ComputeEe, HandArithmetic) {
  PowerSolution one;
  one.power = {0.01 - 3e-3};
  one.outage = {false};
  const RateDemand demand{60'000.0, 1.0};
  const EeBreakdown a = compute_ee(std::vector<PowerSolution>{one}, demand, 3e-3);
  EXPECT_NEAR(a.ee, 6.0e6, 1e-3);
  EXPECT_NEAR(a.total_energy, 0.01, 1e-15);

  const EeBreakdown empty = compute_ee(std::vector<PowerSolution>{}, demand, 3e-3);
  EXPECT_EQ(empty.ee, 0.0);
  EXPECT_EQ(empty.total_energy, 0.0);

  PowerSolution two;
  two.power = {1e-6, 2e-6};
  two.outage = {false, false};
  const double pc = dbm_to_watts(5.0);
  EXPECT_NEAR(pc, 3.162e-3, 3.162e-3 * 1e-3);
  const EeBreakdown b = compute_ee(std::vector<PowerSolution>{two}, demand, pc);
  EXPECT_NEAR(b.ee, 1.897e7, 1.897e7 * 1e-3);
  EXPECT_EQ(b.total_bits, 120'000.0);
  EXPECT_EQ(b.served_count, 2u);
}

TEST(ComputeEe, OutageExcludedAndCircuitPowerMonotone) {
  PowerSolution sol;
  sol.power = {1e-5, 0.0, 4e-6};
  sol.outage = {false, true, false};
  const RateDemand demand{40'000.0, 0.5};
  const EeBreakdown e = compute_ee(std::vector<PowerSolution>{sol}, demand, 1e-3);
  EXPECT_EQ(e.served_count, 2u);
  EXPECT_EQ(e.outage_count, 1u);
  EXPECT_NEAR(e.total_energy, 0.5 * (1e-5 + 4e-6 + 2e-3), 1e-18);
  double previous = e.ee;
  for (double pc : {2e-3, 5e-3, 1e-2, 1e-1}) {
    const double ee = compute_ee(std::vector<PowerSolution>{sol}, demand, pc).ee;
    EXPECT_LT(ee, previous);
    previous = ee;
  }
}

} // namespace
} // namespace triad
