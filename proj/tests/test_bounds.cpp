#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "splitflow/analysis2link.hpp"
#include "splitflow/bounds.hpp"
#include "splitflow/equilibria.hpp"

using namespace splitflow;

namespace {

Instance two_player(std::vector<LatencyFn> links, double f0, double f1) {
  Instance i;
  i.links = std::move(links);
  i.players = {{f0, {}, Behavior::atomic}, {f1, {}, Behavior::atomic}};
  return validate(i);
}

double named(const std::vector<NamedValue>& v, const std::string& key) {
  for (const auto& [k, x] : v)
    if (k == key) return x;
  ADD_FAILURE() << "missing bound " << key;
  return 0.0;
}

void expect_combined_optimum(const Instance& inst, std::size_t leader) {
  const auto z = strategy1(inst, leader);
  const SslReport r = commit(inst, leader, z);
  const auto loads = link_loads(r.inner.profile);
  const auto se = link_loads(social_optimum(inst).profile);
  for (std::size_t j = 0; j < loads.size(); ++j) EXPECT_NEAR(loads[j], se[j], 1e-7) << "link " << j;
}

}  // namespace

TEST(Normalize, UnitTotalZeroIntercept) {
  const Instance inst = two_player({{2, 0.5}, {1, 1.5}}, 1.5, 0.5);
  const Normalized n = normalize(inst);
  EXPECT_DOUBLE_EQ(n.total, 2.0);
  EXPECT_DOUBLE_EQ(n.b_min, 0.5);
  EXPECT_DOUBLE_EQ(n.instance.links[0].a, 4.0);
  EXPECT_DOUBLE_EQ(n.instance.links[0].b, 0.0);
  EXPECT_DOUBLE_EQ(n.instance.players[0].flow, 0.75);
  const double raw = social_optimum(inst).social_cost;
  EXPECT_NEAR(n.cost(raw, 2.0), social_optimum(n.instance).social_cost, 1e-12);
}

TEST(Strategy1, HomogeneousEqualSplit) {
  const Instance inst = two_player({{1, 0}, {1, 0}, {1, 0}}, 0.6, 0.9);
  const auto z = strategy1(inst, 0);
  for (double v : z) EXPECT_NEAR(v, 0.2, 1e-12);
  expect_combined_optimum(inst, 0);
}

TEST(Strategy1, TwoLinkRestoresOptimum) {
  expect_combined_optimum(two_player({{1, 0}, {1, 1}}, 0.7, 0.3), 0);
  expect_combined_optimum(two_player({{1, 0}, {1, 1}}, 0.7, 0.3), 1);
}

TEST(Strategy1, ConstantLinkInOptimumSupport) {
  // Optimum (0.6, 0.4): the leader must cover the constant link's optimal flow.
  const Instance inst = two_player({{1, 0}, {0, 1.2}}, 0.6, 0.4);
  const auto z = strategy1(inst, 0);
  EXPECT_NEAR(z[1], 0.4, 1e-12);
  EXPECT_NEAR(z[0], 0.2, 1e-12);
  expect_combined_optimum(inst, 0);
  // Leader smaller than the constant link's share: everything goes there.
  const auto small = strategy1(inst, 1);
  EXPECT_NEAR(small[1], 0.4, 1e-12);
  expect_combined_optimum(inst, 1);
  const Instance tiny = two_player({{1, 0}, {0, 1.2}}, 0.9, 0.1);
  EXPECT_NEAR(strategy1(tiny, 1)[1], 0.1, 1e-12);
  expect_combined_optimum(tiny, 1);
}

TEST(Strategy1, RandomInstancesRestoreOptimum) {
  for (std::size_t item = 1; item <= 200; ++item) {
    const Instance inst = random_instance(99, item, 6);
    expect_combined_optimum(inst, item % 2);
  }
}

TEST(Strategy1, Preconditions) {
  Instance i;
  i.links = {{1, 0}, {1, 1}};
  i.players = {{0.5, {0}, Behavior::atomic}, {0.5, {}, Behavior::atomic}};
  EXPECT_THROW(strategy1(validate(i), 0), std::invalid_argument);
  i.players = {{0.5, {}, Behavior::atomic}, {0.5, {}, Behavior::wardrop}};
  EXPECT_THROW(strategy1(validate(i), 0), std::invalid_argument);
}

TEST(Strategy2, Examples) {
  const Instance inst = two_player({{1, 0}, {0, 1.2}}, 0.6, 0.4);
  const auto y = strategy2(inst, 1, {0.6, 0.0});
  EXPECT_NEAR(y[0], 0.0, 1e-12);
  EXPECT_NEAR(y[1], 0.4, 1e-12);
  // Leader plays its share of the optimum; follower fills the complement.
  const auto share = strategy2(inst, 1, {0.36, 0.24});
  EXPECT_NEAR(share[0], 0.24, 1e-12);
  EXPECT_NEAR(share[1], 0.16, 1e-12);
  // Leader overfills link 0; follower only tops up below-optimum links.
  const Instance three = two_player({{1, 0}, {1, 0.2}, {1, 0.4}}, 0.5, 0.5);
  const auto y3 = strategy2(three, 1, {0.5, 0.0, 0.0});
  EXPECT_EQ(y3[0], 0.0);
  EXPECT_NEAR(y3[1] + y3[2], 0.5, 1e-12);
}

TEST(Strategy2, FollowerCostBound) {
  std::mt19937_64 gen(17);
  for (std::size_t item = 1; item <= 200; ++item) {
    const Instance raw = random_instance(5, item, 6);
    const Normalized n = normalize(raw);
    const Instance& inst = n.instance;
    const BoundSet bs = bound_set(inst, 0);
    for (int s = 0; s < 5; ++s) {
      std::vector<double> z(inst.num_links());
      double sum = 0.0;
      for (auto& v : z) sum += (v = oracle::unit(gen));
      for (auto& v : z) v *= inst.players[0].flow / sum;
      FlowProfile p = FlowProfile::zeros(2, z.size());
      p.flow[0] = z;
      p.flow[1] = strategy2(inst, 1, z);
      EXPECT_LE(player_cost(inst, p, 1), bs.min_p2_bound() + 1e-8) << "item " << item;
    }
  }
}

TEST(Aloof, Examples) {
  EXPECT_NEAR(aloof(two_player({{1, 0}, {0, 2}}, 1.0, 0.5), 0)[0], 1.0, 1e-12);
  Instance single;
  single.links = {{1, 0}};
  single.players = {{1, {}, Behavior::atomic}, {1, {}, Behavior::atomic}};
  EXPECT_NEAR(aloof(validate(single), 1)[0], 1.0, 1e-12);
  for (double v : aloof(two_player({{2, 1}, {2, 1}, {2, 1}, {2, 1}}, 0.8, 0.1), 0)) EXPECT_NEAR(v, 0.2, 1e-12);
}

TEST(Dlp, HomogeneousFalse) {
  const DlpResult r = dlp_check(two_player({{1, 0}, {1, 0}}, 0.5, 0.5));
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.low_mass, 1.0, 1e-12);
  EXPECT_NEAR(r.high_mass, 0.0, 1e-12);
}

TEST(Dlp, ScanMatchesDirectMasses) {
  // Links f and b2 constant, unit flow: optimum puts min(1, b2/2) on link 0.
  for (int k = 0; k <= 2000; k += 7) {
    const double b2 = 1e-3 * (k + 1);
    const Instance inst = two_player({{1, 0}, {0, b2}}, 0.5, 0.5);
    const double x = std::min(1.0, b2 / 2.0);
    const double lmin = x;  // latency on link 0; link 1 has b2 >= x
    double low = x, high = 0.0;
    if (1.0 - x > 1e-12) {
      if (b2 <= 1.16 * lmin) low += 1.0 - x;
      if (b2 >= 1.84 * lmin) high += 1.0 - x;
    }
    const DlpResult r = dlp_check(inst);
    EXPECT_NEAR(r.low_mass, low, 1e-9) << b2;
    EXPECT_NEAR(r.high_mass, high, 1e-9) << b2;
    EXPECT_EQ(r.holds, low >= 0.25 && high >= 0.25) << b2;
  }
}

TEST(Dlp, BoundaryIsInclusive) {
  // Optimum (1/4, 1/2, 1/4) with latencies 1, 1.5, 1.84.
  const Instance inst = two_player({{4, 0}, {1, 1}, {0.64, 1.68}}, 0.5, 0.5);
  const DlpResult r = dlp_check(inst);
  EXPECT_NEAR(r.l_min, 1.0, 1e-12);
  EXPECT_NEAR(r.low_mass, 0.25, 1e-12);
  EXPECT_NEAR(r.high_mass, 0.25, 1e-12);
  EXPECT_TRUE(r.holds);
}

TEST(BoundFormulas, KnownValues) {
  const BoundSet a = bounds_from(0.5, 1.0, 1.6, false);
  EXPECT_NEAR(named(a.price_bounds, "optimum_spread"), 1.25, 1e-15);
  const BoundSet b = bounds_from(0.5, 1.0, 1.5, false);
  EXPECT_NEAR(named(b.price_bounds, "leader_share_price"), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(named(b.price_bounds, "optimum_spread"), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(named(bounds_from(0.3, 1.0, 1.2, false).price_bounds, "leader_share_price"), 1.2, 1e-15);
  EXPECT_NEAR(named(bounds_from(0.3, 1.0, 1.2, false).price_bounds, "optimum_spread"), 1.4 / 1.2, 1e-15);
  const BoundSet c = bounds_from(0.6, 0.6, 0.84, true);
  EXPECT_NEAR(named(c.p1_bounds, "leader_share"), 0.6, 1e-15);
  EXPECT_NEAR(named(c.p1_bounds, "aloof_dlp"), 1.915 * 0.36, 1e-15);
  EXPECT_NEAR(named(c.p2_bounds, "follower_share"), 0.48, 1e-15);
  const BoundSet d = bounds_from(0.5, 1.0, 1.5, false);
  EXPECT_NEAR(named(d.p1_bounds, "no_dlp"), std::max(1.5 - 0.25 - 1.16 * 0.25, 0.5 + 0.25 * 1.84), 1e-15);
  for (const auto& s : {a, b, c, d}) {
    EXPECT_NEAR(named(s.price_bounds, "uniform_4_3"), 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(named(s.price_bounds, "refined_1_322"), 1.322, 1e-15);
  }
}

TEST(BoundSet, LowerBoundInstance) {
  const Instance inst = two_player({{1, 0}, {0, 1.2}}, 0.6, 0.4);
  const BoundSet bs = bound_set(inst, 0);
  EXPECT_NEAR(bs.l_min, 0.6, 1e-12);
  EXPECT_NEAR(bs.gamma, 1.4, 1e-12);
  EXPECT_NEAR(bs.alpha, 0.6, 1e-12);
  EXPECT_GE(bs.min_price_bound(), 93.0 / 88.0);
  for (const auto& [name, v] : bs.price_bounds) EXPECT_GE(v, 93.0 / 88.0) << name;
  EXPECT_THROW(bound_set(monomial_instance(4, 1.0, 1.0)), std::invalid_argument);
}

TEST(Verify, CleanOnInstances) {
  const Instance lb = two_player({{1, 0}, {0, 1.2}}, 0.6, 0.4);
  EXPECT_TRUE(verify_bounds(lb, price_report(lb)).empty());
  const Instance homo = two_player({{2, 1}, {2, 1}}, 0.3, 0.8);
  const PriceReport hp = price_report(homo);
  EXPECT_NEAR(hp.price_vs_optimal, 1.0, 1e-9);
  EXPECT_TRUE(verify_bounds(homo, hp).empty());
  for (std::size_t item = 1; item <= 100; ++item) {
    const Instance inst = random_instance(123, item, 6);
    const auto v = verify_bounds(inst, price_report(inst));
    EXPECT_TRUE(v.empty()) << "item " << item << ": " << (v.empty() ? "" : v.front().check);
  }
}

TEST(Verify, FlagsInflatedPrice) {
  const Instance lb = two_player({{1, 0}, {0, 1.2}}, 0.6, 0.4);
  PriceReport pr = price_report(lb);
  pr.price_vs_optimal = 1.4;
  const auto v = verify_bounds(lb, pr);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().check, "price_vs_optimal<=4/3");
}
