#include "splitflow/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "splitflow/equilibria.hpp"

namespace splitflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinkTerm {
  std::size_t index;
  const LatencyFn* fn;
  double shift;
  double background;
  double at_zero;  // marginal at x = 0
};

double at(const std::vector<double>& v, std::size_t j) { return v.empty() ? 0.0 : v[j]; }

// For an affine link the marginal is slope * x + intercept.
double affine_slope(const LatencyFn& l, Mode mode) { return mode == Mode::wardrop ? l.a : 2.0 * l.a; }

double link_marginal(const LinkTerm& t, double x, Mode mode) {
  return marginal(*t.fn, t.shift, x, mode, t.background);
}

// Largest own flow in [0, cap] whose marginal does not exceed level.
double inverse(const LinkTerm& t, double level, Mode mode, double cap) {
  if (t.at_zero >= level) return 0.0;
  const LatencyFn& l = *t.fn;
  if (l.d == 1) return std::min(cap, (level - t.at_zero) / affine_slope(l, mode));
  if (link_marginal(t, cap, mode) <= level) return cap;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (link_marginal(t, mid, mode) <= level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool near(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)}); }

}  // namespace

double marginal(const LatencyFn& link, double shift, double x, Mode mode, double background) {
  const double load = x + background;
  switch (mode) {
    case Mode::wardrop:
      return latency(link, load) + shift;
    case Mode::optimum:
      return latency(link, load) + x * latency_slope(link, load) + shift;
    case Mode::joint:
      return latency(link, load) + load * latency_slope(link, load) + shift;
  }
  return 0.0;
}

Allocation fill(std::span<const LatencyFn> links, const MarginalSpec& spec, double volume,
                std::span<const std::size_t> accessible) {
  if (!(volume >= 0.0) || !std::isfinite(volume)) throw std::invalid_argument("fill: volume must be >= 0");
  if (accessible.empty()) throw std::invalid_argument("fill: accessible link set is empty");

  const Mode mode = spec.mode;
  std::vector<LinkTerm> sloped, flat;
  double lowest = kInf;
  for (std::size_t j : accessible) {
    if (j >= links.size()) throw std::invalid_argument("fill: link index out of range");
    LinkTerm t{j, &links[j], at(spec.shift, j), at(spec.background, j), 0.0};
    t.at_zero = link_marginal(t, 0.0, mode);
    lowest = std::min(lowest, t.at_zero);
    (links[j].a > 0.0 ? sloped : flat).push_back(t);
  }

  Allocation out;
  out.flow.assign(links.size(), 0.0);
  if (volume == 0.0) {
    out.level = lowest;
    return out;
  }

  double cap = kInf;
  for (const auto& t : flat) cap = std::min(cap, t.at_zero);

  auto absorb = [&](double level) {
    double sum = 0.0;
    for (const auto& t : sloped) sum += inverse(t, level, mode, volume);
    return sum;
  };

  double level = cap;
  bool to_flat = !flat.empty();

  const bool exact = std::all_of(sloped.begin(), sloped.end(), [](const LinkTerm& t) { return t.fn->d == 1; });
  if (!sloped.empty() && exact) {
    std::vector<const LinkTerm*> order;
    for (const auto& t : sloped) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(),
                     [](const LinkTerm* x, const LinkTerm* y) { return x->at_zero < y->at_zero; });
    double inv_sum = 0.0, weighted = 0.0, candidate = kInf;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const double slope = affine_slope(*order[k]->fn, mode);
      inv_sum += 1.0 / slope;
      weighted += order[k]->at_zero / slope;
      candidate = (volume + weighted) / inv_sum;
      if (k + 1 == order.size() || order[k + 1]->at_zero >= candidate) break;
    }
    if (candidate <= cap) {
      level = candidate;
      to_flat = false;
    }
    for (const auto& t : sloped)
      out.flow[t.index] = std::max(0.0, (level - t.at_zero) / affine_slope(*t.fn, mode));
  } else if (!sloped.empty()) {
    if (flat.empty() || absorb(cap) > volume) {
      to_flat = false;
      double lo = lowest, hi = flat.empty() ? -kInf : cap;
      if (flat.empty())
        for (const auto& t : sloped) hi = std::max(hi, link_marginal(t, volume, mode));
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (absorb(mid) < volume ? lo : hi) = mid;
      }
      // Interpolate between the bracketing allocations so the volume is exact.
      std::vector<double> x_lo, x_hi;
      double s_lo = 0.0, s_hi = 0.0;
      for (const auto& t : sloped) {
        x_lo.push_back(inverse(t, lo, mode, volume));
        x_hi.push_back(inverse(t, hi, mode, volume));
        s_lo += x_lo.back();
        s_hi += x_hi.back();
      }
      const double theta = s_hi > s_lo ? std::clamp((volume - s_lo) / (s_hi - s_lo), 0.0, 1.0) : 1.0;
      for (std::size_t k = 0; k < sloped.size(); ++k)
        out.flow[sloped[k].index] = x_lo[k] + theta * (x_hi[k] - x_lo[k]);
      level = lo + theta * (hi - lo);
    } else {
      for (const auto& t : sloped) out.flow[t.index] = inverse(t, cap, mode, volume);
    }
  }

  if (to_flat) {
    double absorbed = 0.0;
    for (const auto& t : sloped) absorbed += out.flow[t.index];
    const double residual = std::max(0.0, volume - absorbed);
    std::vector<std::size_t> ties;
    for (const auto& t : flat)
      if (near(t.at_zero, cap)) ties.push_back(t.index);
    for (std::size_t j : ties) out.flow[j] = residual / static_cast<double>(ties.size());
    level = cap;
  }
  out.level = level;
  return out;
}

double fill_residual(std::span<const LatencyFn> links, const MarginalSpec& spec,
                     std::span<const std::size_t> accessible, const std::vector<double>& x, double level) {
  double worst = 0.0;
  for (std::size_t j : accessible) {
    const double m = marginal(links[j], at(spec.shift, j), x[j], spec.mode, at(spec.background, j));
    if (x[j] > kSupportEps) worst = std::max(worst, std::abs(m - level));
    else worst = std::max(worst, level - m);
  }
  return worst;
}

SolveReport shared_social_optimum(const Instance& instance) {
  require_valid(instance);
  if (!shared_access(instance)) throw std::invalid_argument("shared_social_optimum: players have different access sets");
  const std::size_t n = instance.num_links();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const double total = total_flow(instance);
  const MarginalSpec spec{Mode::optimum, {}, {}};
  const Allocation alloc = fill(instance.links, spec, total, all);

  SolveReport report;
  report.profile = FlowProfile::zeros(instance.num_players(), n);
  for (std::size_t i = 0; i < instance.num_players(); ++i) {
    const double share = instance.players[i].flow / total;
    for (std::size_t j = 0; j < n; ++j) report.profile.flow[i][j] = share * alloc.flow[j];
  }
  report.player_costs = player_costs(instance, report.profile);
  report.social_cost = social_cost(instance, report.profile);
  report.levels.assign(instance.num_players(), alloc.level);
  const double residual = fill_residual(instance.links, spec, all, alloc.flow, alloc.level);
  report.residual = residual;
  report.player_residuals.assign(instance.num_players(), residual);
  for (const auto& row : report.profile.flow) report.supports.push_back(support_of(row));
  return report;
}

SolveReport social_optimum(const Instance& instance) {
  if (shared_access(instance)) return shared_social_optimum(instance);
  return global_optimum(instance, IterationConfig{});
}

}  // namespace splitflow
