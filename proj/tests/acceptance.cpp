// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "splitflow/analysis2link.hpp"
#include "splitflow/bounds.hpp"
#include "splitflow/equilibria.hpp"
#include "splitflow/stackelberg.hpp"

using namespace splitflow;

namespace {

bool near(double x, double want, double tol) { return std::abs(x - want) <= tol; }

Instance two_player(std::vector<LatencyFn> links, double f0, double f1, Behavior b1 = Behavior::atomic) {
  Instance i;
  i.links = std::move(links);
  i.players = {{f0, {}, Behavior::atomic}, {f1, {}, b1}};
  return validate(i);
}

Instance asymmetric(Behavior follower) {
  Instance i;
  i.links = {{1, 30}, {1, 60}, {1, 0}};
  i.players = {{630, {0, 2}, Behavior::atomic}, {630, {1, 2}, follower}};
  return validate(i);
}

std::vector<double> row_raw(const Instance& inst, const FlowProfile& p, std::size_t i) {
  return to_raw_order(inst, p).flow[i];
}

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Check lower_bound() {
  Check c;
  const Instance inst = two_player({{1, 0}, {0, 1.2}}, 0.6, 0.4);
  const PriceReport pr = price_report(inst);
  c.require(near(pr.price_vs_nash, 93.0 / 88.0, 1e-6), "off target");
  c.detail += (c.ok ? "" : "; ") + std::string("price_vs_nash ") + fmt(pr.price_vs_nash);
  return c;
}

Check closed_form() {
  Check c;
  const TwoLinkParams p{1, 0, 0, 2, 2.0 / 3.0};
  const Instance inst = p.to_instance();
  const SolveReport ne = nash_solve(inst);
  const SslReport ssl = ssl_solve(inst, 0);
  c.require(near(ne_cost(p), 22.0 / 9.0, 1e-9), "ne_cost " + fmt(ne_cost(p)));
  c.require(near(ssl_cost(p), 31.0 / 12.0, 1e-9), "ssl_cost " + fmt(ssl_cost(p)));
  c.require(near(ne.social_cost, ne_cost(p), 1e-9), "numeric ne " + fmt(ne.social_cost));
  c.require(near(ssl.social_cost, ssl_cost(p), 1e-9), "numeric ssl " + fmt(ssl.social_cost));
  c.require(near(row_raw(inst, ne.profile, 0)[0], 2.0 / 3.0, 1e-7) && near(row_raw(inst, ne.profile, 1)[0], 2.0 / 3.0, 1e-7),
            "nash flows");
  c.require(near(row_raw(inst, ssl.inner.profile, 0)[0], 1.0, 1e-7) &&
                near(row_raw(inst, ssl.inner.profile, 1)[0], 0.5, 1e-7),
            "ssl flows");
  if (c.ok) c.detail = "22/9 and 31/12";
  return c;
}

Check search() {
  Check c;
  const SearchResult s = maximize_price();
  const double k = s.params.a1;
  c.require(near(s.value, 93.0 / 88.0, 1e-4), "value " + fmt(s.value));
  c.require(near(s.params.b2 / k, 2.0, 1e-2) && near(s.params.a2 / k, 0.0, 1e-2) && near(s.params.b1 / k, 0.0, 1e-2) &&
                near(s.params.r, 2.0 / 3.0, 1e-2),
            "argmax away from 2a1=b2, r=2/3");
  if (c.ok) c.detail = "max " + fmt(s.value) + " at b2/a1=" + fmt(s.params.b2 / k) + " r=" + fmt(s.params.r);
  return c;
}

Check asymmetric_network() {
  Check c;
  const Instance mixed = asymmetric(Behavior::wardrop);
  const double opt = global_optimum(mixed).social_cost, war = wardrop_solve(mixed).social_cost;
  const double nash = nash_solve(mixed).social_cost, ssl = ssl_solve(mixed, 0).social_cost;
  c.require(near(opt, 566550.0, 0.5), "optimum " + fmt(opt));
  c.require(near(war, 567000.0, 0.5), "wardrop " + fmt(war));
  c.require(near(nash, 572400.0, 0.5), "mixed nash " + fmt(nash));
  c.require(near(ssl, 583537.5, 0.5), "ssl " + fmt(ssl));
  const Instance atomic = asymmetric(Behavior::atomic);
  const double both = nash_solve(atomic).social_cost, lead = ssl_solve(atomic, 0).social_cost;
  c.detail = c.ok ? "566550 567000 572400 583537.5; both-atomic nash " + fmt(both) + ", atomic-follower ssl " + fmt(lead)
                  : c.detail;
  return c;
}

Check follower_example() {
  Check c;
  const SslReport a = ssl_solve(two_player({{1, 0}, {1, 1}}, 0.5, 0.5), 0);
  c.require(near(a.leader_allocation[0], 0.5, 1e-7) && near(a.leader_allocation[1], 0.0, 1e-7), "leader flows");
  c.require(near(a.follower_response[0], 3.0 / 8.0, 1e-7) && near(a.follower_response[1], 1.0 / 8.0, 1e-7),
            "follower flows");
  c.require(near(a.leader_cost, 7.0 / 16.0, 1e-7) && near(a.follower_cost, 15.0 / 32.0, 1e-7), "atomic costs");
  const SslReport w = ssl_solve(two_player({{1, 0}, {1, 1}}, 0.5, 0.5, Behavior::wardrop), 0);
  c.require(near(w.leader_cost, 15.0 / 32.0, 1e-7) && near(w.follower_cost, 7.0 / 16.0, 1e-7), "wardrop costs");
  if (c.ok) c.detail = "7/16, 15/32 and swapped";
  return c;
}

Check monomial() {
  Check c;
  const MonomialResult r = maximize_monomial_price();
  c.require(r.price_vs_nash >= 1.169 - 0.01, "max " + fmt(r.price_vs_nash));
  c.detail = (c.ok ? "" : c.detail + "; ") + "max " + fmt(r.price_vs_nash) + " at b2=" + fmt(r.b2) + " r=" + fmt(r.r) +
             ", stated point " + fmt(r.at_center);
  return c;
}

Check property_suite() {
  Check c;
  FuzzConfig cfg;
  cfg.n = 10000;
  const FuzzSummary s = fuzz(cfg);
  c.require(s.violations.empty(), std::to_string(s.violations.size()) + " violations" +
                                      (s.violations.empty() ? "" : ", first " + s.violations.front().violation.check +
                                                                       " on item " +
                                                                       std::to_string(s.violations.front().item)));
  c.require(s.max_price_vs_optimal <= 4.0 / 3.0 + 1e-7, "price_vs_optimal " + fmt(s.max_price_vs_optimal));
  if (c.ok)
    c.detail = std::to_string(s.instances) + " instances, " + std::to_string(s.dlp_true) +
               " with DLP, max price_vs_optimal " + fmt(s.max_price_vs_optimal);
  return c;
}

Check homogeneous() {
  Check c;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> links(1, 6);
  double worst_gap = 0.0, worst_price = 0.0;
  for (int k = 0; k < 100; ++k) {
    const LatencyFn l{0.1 + 2 * u(gen), 2 * u(gen)};
    const Instance inst = two_player(std::vector<LatencyFn>(links(gen), l), 0.1 + 2 * u(gen), 0.1 + 2 * u(gen));
    const auto se = link_loads(social_optimum(inst).profile);
    const auto profile_gap = [&](const FlowProfile& p) {
      const auto loads = link_loads(p);
      double g = 0.0;
      for (std::size_t j = 0; j < loads.size(); ++j) g = std::max(g, std::abs(loads[j] - se[j]));
      return g;
    };
    const PriceReport pr = price_report(inst);
    const SolveReport nash = nash_solve(inst);
    for (double g : {profile_gap(wardrop_solve(inst).profile), profile_gap(nash.profile),
                     profile_gap(pr.ssl[0].inner.profile), profile_gap(pr.ssl[1].inner.profile)})
      worst_gap = std::max(worst_gap, g);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < inst.num_links(); ++j)
        for (const auto* p : {&nash.profile, &pr.ssl[0].inner.profile, &pr.ssl[1].inner.profile})
          worst_gap = std::max(worst_gap, std::abs(p->flow[i][j] - inst.players[i].flow / inst.num_links()));
    worst_price = std::max({worst_price, std::abs(pr.price_vs_nash - 1.0), std::abs(pr.price_vs_optimal - 1.0)});
  }
  c.require(worst_gap <= 1e-7, "profile gap " + fmt(worst_gap));
  c.require(worst_price <= 1e-9, "price gap " + fmt(worst_price));
  if (c.ok) c.detail = "max profile gap " + fmt(worst_gap) + ", max price gap " + fmt(worst_price);
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> run;
    double limit_s;
  };
  const Criterion criteria[] = {
      {"lower-bound regression", lower_bound, 1.0},
      {"closed-form cross-check", closed_form, 1e9},
      {"worst-case two-link search", search, 60.0},
      {"asymmetric network", asymmetric_network, 1e9},
      {"follower example", follower_example, 1e9},
      {"monomial lower bound", monomial, 120.0},
      {"property suite", property_suite, 600.0},
      {"homogeneous coincidence", homogeneous, 1e9},
  };
  int failed = 0, index = 0;
  for (const auto& cr : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.limit_s) {
      c.ok = false;
      c.detail += "; took " + fmt(secs) + " s, limit " + fmt(cr.limit_s) + " s";
    }
    if (!c.ok) ++failed;
    std::printf("%s %d %s (%.2f s): %s\n", c.ok ? "PASS" : "FAIL", index, cr.name, secs, c.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
