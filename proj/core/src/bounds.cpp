#include "splitflow/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splitflow/equilibria.hpp"
#include "splitflow/stackelberg.hpp"
#include "splitflow/waterfill.hpp"

namespace splitflow {

namespace {

double min_value(const std::vector<NamedValue>& values) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [name, v] : values) m = std::min(m, v);
  return m;
}

void require_bound_instance(const Instance& instance) {
  require_valid(instance);
  if (instance.num_players() != 2 || !all_affine(instance) || !shared_access(instance))
    throw std::invalid_argument("bounds need two players, affine links and shared access");
}

bool inclusive_leq(double x, double y) { return x <= y + 1e-9 * std::max(1.0, std::abs(y)); }

double used_min_latency(const Instance& instance, const std::vector<double>& loads) {
  double l_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < loads.size(); ++j)
    if (loads[j] > kSupportEps) l_min = std::min(l_min, latency(instance.links[j], loads[j]));
  return l_min;
}

}  // namespace

double BoundSet::min_price_bound() const { return min_value(price_bounds); }
double BoundSet::min_p1_bound() const { return min_value(p1_bounds); }
double BoundSet::min_p2_bound() const { return min_value(p2_bounds); }

Normalized normalize(const Instance& instance) {
  Normalized out;
  out.total = total_flow(instance);
  if (!(out.total > 0.0)) throw std::invalid_argument("normalize: total flow must be positive");
  out.b_min = std::numeric_limits<double>::infinity();
  for (const auto& l : instance.links) out.b_min = std::min(out.b_min, l.b);
  Instance inst = shift_constant(instance, -out.b_min);
  for (auto& l : inst.links) l.a *= std::pow(out.total, l.d);
  for (auto& p : inst.players) p.flow /= out.total;
  out.instance = std::move(inst);
  return out;
}

std::vector<double> strategy1(const Instance& instance, std::size_t leader) {
  require_bound_instance(instance);
  if (leader > 1) throw std::out_of_range("leader index must be 0 or 1");
  if (instance.players[1 - leader].behavior != Behavior::atomic)
    throw std::invalid_argument("strategy 1 precondition fails: follower must be atomic");
  const SolveReport se = social_optimum(instance);
  const auto loads = link_loads(se.profile);
  const std::size_t n = instance.num_links();
  double volume = instance.players[leader].flow;

  std::vector<double> z(n, 0.0);
  std::vector<std::size_t> flat, sloped;
  double flat_load = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (loads[j] <= kSupportEps) continue;
    if (instance.links[j].a == 0.0) {
      flat.push_back(j);
      flat_load += loads[j];
    } else {
      sloped.push_back(j);
    }
  }
  // Constant links absorb the leader first; the follower abandons them as
  // soon as the leader shifts its sloped marginals.
  if (volume <= flat_load) {
    for (std::size_t j : flat) z[j] = volume * loads[j] / flat_load;
    return z;
  }
  for (std::size_t j : flat) z[j] = loads[j];
  volume -= flat_load;

  // Find delta with sum_j min(a_j f_j, delta) / a_j = volume.
  std::sort(sloped.begin(), sloped.end(), [&](std::size_t x, std::size_t y) {
    return instance.links[x].a * loads[x] < instance.links[y].a * loads[y];
  });
  double capped = 0.0;
  double inv = 0.0;
  for (std::size_t j : sloped) inv += 1.0 / instance.links[j].a;
  double delta = 0.0;
  bool found = false;
  for (std::size_t t = 0; t < sloped.size(); ++t) {
    const std::size_t j = sloped[t];
    const double h = instance.links[j].a * loads[j];
    if (capped + h * inv >= volume) {
      delta = (volume - capped) / inv;
      found = true;
      break;
    }
    capped += loads[j];
    inv -= 1.0 / instance.links[j].a;
  }
  if (!found) {
    if (volume > capped * (1.0 + 1e-9) + 1e-12) throw std::invalid_argument("strategy 1 precondition fails");
    delta = std::numeric_limits<double>::infinity();
  }
  for (std::size_t j : sloped) z[j] = std::min(instance.links[j].a * loads[j], delta) / instance.links[j].a;
  return z;
}

std::vector<double> strategy2(const Instance& instance, std::size_t follower,
                              const std::vector<double>& leader_allocation) {
  require_bound_instance(instance);
  if (follower > 1) throw std::out_of_range("follower index must be 0 or 1");
  const std::size_t n = instance.num_links();
  if (leader_allocation.size() != n) throw std::invalid_argument("leader allocation: wrong length");
  const SolveReport se = social_optimum(instance);
  const auto loads = link_loads(se.profile);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return latency(instance.links[x], loads[x]) < latency(instance.links[y], loads[y]);
  });
  double left = instance.players[follower].flow;
  std::vector<double> y(n, 0.0);
  for (std::size_t j : order) {
    if (left <= 0.0) break;
    const double gap = loads[j] - leader_allocation[j];
    if (gap <= 0.0) continue;
    y[j] = std::min(gap, left);
    left -= y[j];
  }
  if (left > 1e-9 * std::max(1.0, instance.players[follower].flow))
    throw std::invalid_argument("strategy 2 precondition fails: optimal shortfall below follower volume");
  return y;
}

std::vector<double> aloof(const Instance& instance, std::size_t leader) {
  require_valid(instance);
  const auto& p = instance.players.at(leader);
  return fill(instance.links, MarginalSpec{Mode::optimum, {}, {}}, p.flow, p.links).flow;
}

DlpResult dlp_check(const Instance& instance) {
  const Normalized norm = normalize(instance);
  const SolveReport se = social_optimum(norm.instance);
  const auto loads = link_loads(se.profile);
  DlpResult r;
  r.l_min = used_min_latency(norm.instance, loads);
  for (std::size_t j = 0; j < loads.size(); ++j) {
    if (loads[j] <= kSupportEps) continue;
    const double l = latency(norm.instance.links[j], loads[j]);
    if (inclusive_leq(l, kDlpLowFactor * r.l_min)) r.low_mass += loads[j];
    if (inclusive_leq(kDlpHighFactor * r.l_min, l)) r.high_mass += loads[j];
  }
  const double eps = 1e-9;
  r.holds = r.low_mass >= kDlpMass - eps && r.high_mass >= kDlpMass - eps;
  return r;
}

BoundSet bounds_from(double alpha, double l_min, double c_se, bool dlp) {
  BoundSet bs;
  bs.alpha = alpha;
  bs.l_min = l_min;
  bs.c_se = c_se;
  bs.dlp = dlp;
  bs.gamma = l_min > 0.0 ? c_se / l_min : 1.0;
  const double a = bs.alpha, l = bs.l_min, c = bs.c_se, g = bs.gamma;
  bs.p1_bounds.emplace_back("leader_share", std::min(2.0 * a * l, c - (1.0 - a) * l));
  bs.p2_bounds.emplace_back("follower_share", std::min(c - a * l, 2.0 * (1.0 - a) * l));
  if (dlp) {
    bs.p1_bounds.emplace_back("aloof_dlp", kAloofFactor * a * l);
  } else {
    bs.p1_bounds.emplace_back(
        "no_dlp", std::max(c - l / 4.0 - kDlpLowFactor * l * (0.75 - a), l / 2.0 + (a - 0.25) * kDlpHighFactor * l));
  }

  bs.price_bounds.emplace_back("uniform_4_3", kQuickPriceBound);
  bs.price_bounds.emplace_back("refined_1_322", kRefinedPriceBound);
  bs.price_bounds.emplace_back("optimum_spread", g >= 1.5 ? 2.0 / g : (2.0 * g - 1.0) / g);
  bs.price_bounds.emplace_back("leader_share_price", a >= 0.5 ? 1.0 + 2.0 * (1.0 - a) / 3.0 : 1.0 + 2.0 * a / 3.0);
  if (c > 0.0) bs.price_bounds.emplace_back("player_sum", (bs.min_p1_bound() + bs.min_p2_bound()) / c);
  return bs;
}

BoundSet bound_set(const Instance& instance, std::size_t leader) {
  require_bound_instance(instance);
  if (leader > 1) throw std::out_of_range("leader index must be 0 or 1");
  const Normalized norm = normalize(instance);
  const SolveReport se = social_optimum(norm.instance);
  const auto loads = link_loads(se.profile);
  const DlpResult dlp = dlp_check(instance);

  BoundSet bs;
  bs.leader = leader;
  bs.c_se = se.social_cost;
  bs.l_min = used_min_latency(norm.instance, loads);
  bs.alpha = norm.instance.players[leader].flow;
  bs.dlp = dlp.holds;
  bs.low_mass = dlp.low_mass;
  bs.high_mass = dlp.high_mass;

  const BoundSet f = bounds_from(bs.alpha, bs.l_min, bs.c_se, bs.dlp);
  bs.gamma = f.gamma;
  bs.p1_bounds = f.p1_bounds;
  bs.p2_bounds = f.p2_bounds;
  bs.price_bounds = f.price_bounds;
  return bs;
}

std::vector<Violation> verify_bounds(const Instance& instance, const PriceReport& report, double tol) {
  std::vector<Violation> out;
  auto expect = [&](const std::string& name, double measured, double bound) {
    if (!(measured <= bound + tol)) out.push_back(Violation{name, measured, bound});
  };
  require_valid(instance);
  if (instance.num_players() != 2 || !all_affine(instance) || !shared_access(instance)) return out;
  for (const auto& p : instance.players)
    if (p.behavior != Behavior::atomic) return out;

  const Normalized norm = normalize(instance);
  const Instance& ni = norm.instance;
  const SolveReport se = social_optimum(ni);
  const auto se_loads = link_loads(se.profile);

  expect("price_vs_optimal<=4/3", report.price_vs_optimal, kQuickPriceBound);
  expect("price_vs_optimal<=1.322", report.price_vs_optimal, kRefinedPriceBound);

  for (const SslReport& ssl : report.ssl) {
    const std::size_t leader = ssl.leader, follower = ssl.follower;
    const std::string tag = "leader" + std::to_string(leader) + ":";
    const BoundSet bs = bound_set(instance, leader);
    for (const auto& [name, value] : bs.price_bounds) expect(tag + "price<=" + name, ssl.social_cost / report.c_se, value);

    const double p1 = norm.cost(ssl.leader_cost, instance.players[leader].flow);
    const double p2 = norm.cost(ssl.follower_cost, instance.players[follower].flow);
    for (const auto& [name, value] : bs.p1_bounds) expect(tag + "leader_cost<=" + name, p1, value);
    for (const auto& [name, value] : bs.p2_bounds) expect(tag + "follower_cost<=" + name, p2, value);

    // Strategy 1 makes the combined flow optimal.
    const SslReport s1 = commit(ni, leader, strategy1(ni, leader));
    const auto loads = link_loads(s1.inner.profile);
    double gap = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j) gap = std::max(gap, std::abs(loads[j] - se_loads[j]));
    expect(tag + "strategy1_flow_gap", gap, 0.0);
    expect(tag + "strategy1_leader_cost<=c_se", s1.leader_cost, bs.c_se);

    // Strategy 2 against the leader's actual commitment.
    std::vector<double> z(ssl.leader_allocation.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = ssl.leader_allocation[j] / norm.total;
    FlowProfile prof = FlowProfile::zeros(2, z.size());
    prof.flow[leader] = z;
    prof.flow[follower] = strategy2(ni, follower, z);
    for (const auto& [name, value] : bs.p2_bounds)
      expect(tag + "strategy2_cost<=" + name, player_cost(ni, prof, follower), value);

    if (bs.dlp) {
      const SslReport al = commit(ni, leader, aloof(ni, leader));
      expect(tag + "aloof_cost<=aloof_dlp", al.leader_cost, kAloofFactor * bs.alpha * bs.l_min);
    }
  }
  return out;
}

}  // namespace splitflow
