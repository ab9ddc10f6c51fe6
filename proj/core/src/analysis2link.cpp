#include "splitflow/analysis2link.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "splitflow/equilibria.hpp"
#include "splitflow/waterfill.hpp"

namespace splitflow {

namespace {

double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double k_term(const TwoLinkParams& p) { return p.a2 * p.b1 + p.a1 * (p.a2 + p.b2 + p.a2 * p.r); }

void require_feasible(const TwoLinkParams& p) {
  if (!p.feasible()) throw std::invalid_argument("two-link parameters infeasible");
}

}  // namespace

bool TwoLinkParams::feasible() const {
  if (!(a1 >= 0.0 && a2 >= 0.0 && b1 >= 0.0 && b2 >= 0.0 && r > 0.0)) return false;
  if (!(a1 + a2 > 0.0)) return false;
  return 2 * a1 + b1 - b2 >= 0.0 && 2 * a2 - b1 + b2 >= 0.0 && 3 * a1 * r + b1 - b2 >= 0.0 &&
         3 * a2 * r - b1 + b2 >= 0.0;
}

Instance TwoLinkParams::to_instance() const {
  Instance inst;
  inst.links = {LatencyFn{a1, b1, 1, a1 == 0.0 && b1 == 0.0}, LatencyFn{a2, b2, 1, a2 == 0.0 && b2 == 0.0}};
  inst.players = {PlayerSpec{1.0, {}, Behavior::atomic}, PlayerSpec{r, {}, Behavior::atomic}};
  return validate(inst);
}

double ne_cost(const TwoLinkParams& p) {
  require_feasible(p);
  const double d = p.b1 - p.b2;
  return (9.0 * (1.0 + p.r) * k_term(p) - 2.0 * d * d) / (9.0 * (p.a1 + p.a2));
}

double ssl_cost(const TwoLinkParams& p) {
  require_feasible(p);
  const double d = p.b1 - p.b2;
  return (16.0 * (1.0 + p.r) * k_term(p) - 3.0 * d * d) / (16.0 * (p.a1 + p.a2));
}

double price(const TwoLinkParams& p) {
  require_feasible(p);
  const double d = p.b1 - p.b2;
  const double k = (1.0 + p.r) * k_term(p);
  return 9.0 * (16.0 * k - 3.0 * d * d) / (16.0 * (9.0 * k - 2.0 * d * d));
}

SearchResult maximize_price(const SearchConfig& config) {
  SearchResult best;
  best.params = TwoLinkParams{1.0, 0.0, 0.0, 0.0, 1.0};
  best.value = -1.0;
  const std::size_t g = std::max<std::size_t>(config.grid, 2);
  const std::size_t nb = config.equal_intercepts ? 1 : g;
  for (std::size_t i = 0; i < nb; ++i) {
    const double b2 = config.equal_intercepts ? 0.0 : config.b2_max * static_cast<double>(i) / static_cast<double>(g - 1);
    for (std::size_t j = 0; j < g; ++j) {
      const double a2 = config.a2_max * static_cast<double>(j) / static_cast<double>(g - 1);
      for (std::size_t k = 0; k < g; ++k) {
        const TwoLinkParams p{1.0, a2, 0.0, b2, config.r_max * static_cast<double>(k + 1) / static_cast<double>(g)};
        if (!p.feasible()) continue;
        ++best.evaluated;
        const double v = price(p);
        if (v > best.value) {
          best.value = v;
          best.params = p;
        }
      }
    }
  }
  if (best.value < 0.0) return best;

  // Pattern search over the 26 neighbours of (b2, a2, r).
  std::array<double, 3> step{config.b2_max / static_cast<double>(g - 1), config.a2_max / static_cast<double>(g - 1),
                             config.r_max / static_cast<double>(g)};
  if (config.equal_intercepts) step[0] = 0.0;
  while (std::max({step[0], step[1], step[2]}) > 1e-12) {
    bool moved = false;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          TwoLinkParams p = best.params;
          p.b2 = std::clamp(p.b2 + di * step[0], 0.0, config.b2_max);
          p.a2 = std::clamp(p.a2 + dj * step[1], 0.0, config.a2_max);
          p.r = std::min(p.r + dk * step[2], config.r_max);
          if (!p.feasible()) continue;
          ++best.evaluated;
          const double v = price(p);
          if (v > best.value) {
            best.value = v;
            best.params = p;
            moved = true;
          }
        }
    if (!moved)
      for (auto& s : step) s *= 0.5;
  }
  return best;
}

Instance monomial_instance(int d, double b2, double r) {
  Instance inst;
  inst.links = {LatencyFn{1.0, 0.0, d}, LatencyFn{0.0, b2, 1}};
  inst.players = {PlayerSpec{1.0, {}, Behavior::atomic}, PlayerSpec{r, {}, Behavior::atomic}};
  return validate(inst);
}

double monomial_price(int d, double b2, double r, const SslConfig& ssl) {
  const Instance inst = monomial_instance(d, b2, r);
  const double ne = nash_solve(inst).social_cost;
  double worst = 0.0;
  for (std::size_t leader = 0; leader < 2; ++leader) worst = std::max(worst, ssl_solve(inst, leader, ssl).social_cost);
  return worst / ne;
}

MonomialResult maximize_monomial_price(const MonomialSearchConfig& config) {
  MonomialResult best;
  best.price_vs_nash = -1.0;
  const double b_lo = std::max(0.0, config.b2_center - config.b2_halfwidth), b_hi = config.b2_center + config.b2_halfwidth;
  const double r_lo = std::max(1e-3, config.r_center - config.r_halfwidth), r_hi = config.r_center + config.r_halfwidth;
  auto eval = [&](double b2, double r) {
    ++best.evaluated;
    const double v = monomial_price(config.d, b2, r, config.ssl);
    if (v > best.price_vs_nash) {
      best.price_vs_nash = v;
      best.b2 = b2;
      best.r = r;
      return true;
    }
    return false;
  };
  best.at_center = monomial_price(config.d, config.b2_center, config.r_center, config.ssl);
  best.price_vs_nash = best.at_center;
  best.b2 = config.b2_center;
  best.r = config.r_center;
  const std::size_t g = std::max<std::size_t>(config.grid, 2);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t k = 0; k < g; ++k)
      eval(b_lo + (b_hi - b_lo) * static_cast<double>(i) / static_cast<double>(g - 1),
           r_lo + (r_hi - r_lo) * static_cast<double>(k) / static_cast<double>(g - 1));

  double sb = (b_hi - b_lo) / static_cast<double>(g - 1), sr = (r_hi - r_lo) / static_cast<double>(g - 1);
  for (std::size_t round = 0; round < config.refine_rounds; ++round) {
    bool moved = false;
    for (int di = -1; di <= 1; ++di)
      for (int dk = -1; dk <= 1; ++dk) {
        if (di == 0 && dk == 0) continue;
        const double b2 = std::clamp(best.b2 + di * sb, b_lo, b_hi), r = std::clamp(best.r + dk * sr, r_lo, r_hi);
        if (b2 == best.b2 && r == best.r) continue;
        moved = eval(b2, r) || moved;
      }
    if (!moved) {
      sb *= 0.5;
      sr *= 0.5;
    }
  }
  return best;
}

Instance random_instance(std::uint64_t seed, std::size_t item, std::size_t max_links) {
  std::mt19937_64 gen(seed * 0x9E3779B97F4A7C15ULL + item);
  Instance inst;
  const std::size_t n = 1 + static_cast<std::size_t>(unit(gen) * static_cast<double>(std::max<std::size_t>(max_links, 1)));
  for (std::size_t j = 0; j < n; ++j) {
    LatencyFn l;
    l.a = unit(gen) < 0.1 ? 0.0 : 0.05 + 3.0 * unit(gen);
    l.b = unit(gen) < 0.2 ? 0.0 : 3.0 * unit(gen);
    if (l.a == 0.0 && l.b == 0.0) l.b = 0.1 + 3.0 * unit(gen);
    inst.links.push_back(l);
  }
  for (int i = 0; i < 2; ++i) inst.players.push_back(PlayerSpec{0.1 + 2.0 * unit(gen), {}, Behavior::atomic});
  return validate(inst);
}

std::vector<Violation> property_checks(const Instance& instance, const PriceReport& report, std::uint64_t seed,
                                       std::size_t nash_starts) {
  std::vector<Violation> out;
  auto expect = [&](const std::string& name, double measured, double bound) {
    if (!(measured <= bound)) out.push_back(Violation{name, measured, bound});
  };
  const auto& links = instance.links;
  const auto se_loads = link_loads(report.optimum.profile);
  const double lambda = report.optimum.levels.front();

  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < se_loads.size(); ++j)
    if (se_loads[j] > kSupportEps) used.push_back(j);

  double marginal_gap = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0, pair_gap = 0.0;
  for (std::size_t j : used) {
    if (links[j].a > 0.0)
      marginal_gap = std::max(marginal_gap, std::abs(2.0 * links[j].a * se_loads[j] + links[j].b - lambda));
    const double l = latency(links[j], se_loads[j]);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  for (std::size_t x = 0; x < used.size(); ++x)
    for (std::size_t y = x + 1; y < used.size(); ++y) {
      const std::size_t j = used[x], k = used[y];
      const double d = latency(links[k], se_loads[k]) - latency(links[j], se_loads[j]);
      pair_gap = std::max(pair_gap, std::abs(d - 0.5 * (links[k].b - links[j].b)));
    }
  expect("marginal_equalization", marginal_gap, 1e-8 * lambda);
  if (!used.empty()) expect("latency_spread", hi, 2.0 * lo + 1e-8);
  expect("latency_gap_half_intercepts", pair_gap, 1e-8);

  for (const SslReport& ssl : report.ssl) {
    const auto loads = link_loads(ssl.inner.profile);
    double flo = std::numeric_limits<double>::infinity(), fhi = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j) {
      if (ssl.follower_response[j] <= kSupportEps) continue;
      const double l = latency(links[j], loads[j]);
      flo = std::min(flo, l);
      fhi = std::max(fhi, l);
    }
    if (fhi > 0.0) expect("leader" + std::to_string(ssl.leader) + ":follower_latency_spread", fhi, 2.0 * flo + 1e-8);
  }

  std::mt19937_64 gen(seed ^ 0xA5A5A5A5ULL);
  double spread = 0.0;
  for (std::size_t s = 0; s < nash_starts; ++s) {
    FlowProfile start = FlowProfile::zeros(instance.num_players(), instance.num_links());
    for (std::size_t i = 0; i < instance.num_players(); ++i) {
      double sum = 0.0;
      for (auto& v : start.flow[i]) {
        v = -std::log(1.0 - unit(gen));
        sum += v;
      }
      for (auto& v : start.flow[i]) v *= instance.players[i].flow / sum;
    }
    const SolveReport ne = nash_solve(instance, {}, start);
    for (std::size_t i = 0; i < instance.num_players(); ++i)
      for (std::size_t j = 0; j < instance.num_links(); ++j)
        spread = std::max(spread, std::abs(ne.profile.flow[i][j] - report.nash.profile.flow[i][j]));
  }
  expect("nash_uniqueness", spread, 1e-6);
  return out;
}

FuzzSummary fuzz(const FuzzConfig& config) {
  FuzzSummary summary;
  for (std::size_t item = 0; item < config.n; ++item) {
    Instance inst;
    if (item == 0 && config.include_lower_bound) {
      Instance raw;
      raw.links = {LatencyFn{1.0, 0.0}, LatencyFn{0.0, 1.2}};
      raw.players = {PlayerSpec{0.6, {}, Behavior::atomic}, PlayerSpec{0.4, {}, Behavior::atomic}};
      inst = validate(raw);
    } else {
      inst = random_instance(config.seed, item, config.max_links);
    }
    const PriceReport report = price_report(inst);
    ++summary.instances;
    if (dlp_check(inst).holds) ++summary.dlp_true;
    if (report.price_vs_optimal > summary.max_price_vs_optimal) {
      summary.max_price_vs_optimal = report.price_vs_optimal;
      summary.argmax_vs_optimal = item;
    }
    if (report.price_vs_nash > summary.max_price_vs_nash) {
      summary.max_price_vs_nash = report.price_vs_nash;
      summary.argmax_vs_nash = item;
    }
    for (auto& v : verify_bounds(inst, report)) summary.violations.push_back(FuzzViolation{item, std::move(v)});
    for (auto& v : property_checks(inst, report, config.seed + item, config.nash_starts))
      summary.violations.push_back(FuzzViolation{item, std::move(v)});
  }
  return summary;
}

}  // namespace splitflow
