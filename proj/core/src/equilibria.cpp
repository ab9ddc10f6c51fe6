#include "splitflow/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace splitflow {

namespace {

// Reply rule of one block in the cyclic loop.
enum class Reply { own_cost, latency, joint };

Reply reply_for(Behavior b) { return b == Behavior::atomic ? Reply::own_cost : Reply::latency; }

Mode mode_for(Reply r) {
  switch (r) {
    case Reply::own_cost:
      return Mode::optimum;
    case Reply::latency:
      return Mode::wardrop;
    case Reply::joint:
      return Mode::joint;
  }
  return Mode::optimum;
}

std::vector<double> others_load(const FlowProfile& profile, std::size_t player) {
  std::vector<double> load(profile.num_links(), 0.0);
  for (std::size_t k = 0; k < profile.num_players(); ++k) {
    if (k == player) continue;
    for (std::size_t j = 0; j < load.size(); ++j) load[j] += profile.flow[k][j];
  }
  return load;
}

Allocation reply(const Instance& instance, const std::vector<double>& background, std::size_t player, Reply rule) {
  MarginalSpec spec{mode_for(rule), {}, background};
  return fill(instance.links, spec, instance.players[player].flow, instance.players[player].links);
}

double sup_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) d = std::max(d, std::abs(x[j] - y[j]));
  return d;
}

SolveReport finish(const Instance& instance, FlowProfile profile, const std::vector<Reply>& rules,
                   std::size_t iterations) {
  SolveReport report;
  for (std::size_t i = 0; i < instance.num_players(); ++i) {
    const Allocation br = reply(instance, others_load(profile, i), i, rules[i]);
    report.levels.push_back(br.level);
    report.player_residuals.push_back(sup_distance(br.flow, profile.flow[i]));
  }
  report.residual = *std::max_element(report.player_residuals.begin(), report.player_residuals.end());
  report.player_costs = player_costs(instance, profile);
  report.social_cost = social_cost(instance, profile);
  for (const auto& row : profile.flow) report.supports.push_back(support_of(row));
  report.iterations = iterations;
  report.profile = std::move(profile);
  return report;
}

SolveReport cyclic(const Instance& instance, const IterationConfig& config, FlowProfile profile,
                   const std::vector<Reply>& rules, const char* what) {
  check_config(config);
  const double threshold = config.tol * std::max(1.0, total_flow(instance));
  std::vector<double> loads = link_loads(profile);
  double worst = 0.0;
  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    worst = 0.0;
    for (std::size_t i = 0; i < instance.num_players(); ++i) {
      auto& row = profile.flow[i];
      std::vector<double> background(loads);
      for (std::size_t j = 0; j < row.size(); ++j) background[j] = std::max(0.0, loads[j] - row[j]);
      const Allocation br = reply(instance, background, i, rules[i]);
      worst = std::max(worst, sup_distance(br.flow, row));
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double next = row[j] + config.damping * (br.flow[j] - row[j]);
        loads[j] = background[j] + next;
        row[j] = next;
      }
    }
    if (worst <= threshold) {
      SolveReport report = finish(instance, std::move(profile), rules, iter);
      if (report.residual <= threshold) return report;
      profile = std::move(report.profile);
      loads = link_loads(profile);
    }
    // Refresh accumulated loads now and then so rounding does not drift.
    if (iter % 64 == 0) loads = link_loads(profile);
  }
  std::ostringstream msg;
  msg << what << ": no convergence after " << config.max_iters << " iterations (residual " << worst << ")";
  throw ConvergenceError(msg.str(), worst, std::move(profile));
}

SolveReport split_proportionally(const Instance& instance, const Allocation& alloc, Mode mode) {
  const std::size_t n = instance.num_links();
  const double total = total_flow(instance);
  FlowProfile profile = FlowProfile::zeros(instance.num_players(), n);
  for (std::size_t i = 0; i < instance.num_players(); ++i)
    for (std::size_t j = 0; j < n; ++j) profile.flow[i][j] = instance.players[i].flow / total * alloc.flow[j];
  SolveReport report;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const double residual = fill_residual(instance.links, MarginalSpec{mode, {}, {}}, all, alloc.flow, alloc.level);
  report.player_costs = player_costs(instance, profile);
  report.social_cost = social_cost(instance, profile);
  report.levels.assign(instance.num_players(), alloc.level);
  report.residual = residual;
  report.player_residuals.assign(instance.num_players(), residual);
  for (const auto& row : profile.flow) report.supports.push_back(support_of(row));
  report.profile = std::move(profile);
  return report;
}

}  // namespace

void check_config(const IterationConfig& config) {
  if (!(config.damping > 0.0 && config.damping <= 1.0))
    throw std::invalid_argument("iteration config: damping must be in (0, 1]");
  if (!(config.tol > 0.0)) throw std::invalid_argument("iteration config: tol must be positive");
  if (config.max_iters == 0) throw std::invalid_argument("iteration config: max_iters must be positive");
}

Allocation respond(const Instance& instance, const FlowProfile& profile, std::size_t player, Behavior behavior) {
  if (player >= instance.num_players()) throw std::out_of_range("best_response: player index out of range");
  return reply(instance, others_load(profile, player), player, reply_for(behavior));
}

Allocation best_response(const Instance& instance, const FlowProfile& profile, std::size_t player) {
  if (player >= instance.num_players()) throw std::out_of_range("best_response: player index out of range");
  return respond(instance, profile, player, instance.players[player].behavior);
}

FlowProfile uniform_start(const Instance& instance) {
  FlowProfile profile = FlowProfile::zeros(instance.num_players(), instance.num_links());
  for (std::size_t i = 0; i < instance.num_players(); ++i) {
    const auto& p = instance.players[i];
    for (std::size_t j : p.links) profile.flow[i][j] = p.flow / static_cast<double>(p.links.size());
  }
  return profile;
}

SolveReport nash_solve(const Instance& instance, const IterationConfig& config, const std::optional<FlowProfile>& start) {
  require_valid(instance);
  std::vector<Reply> rules;
  for (const auto& p : instance.players) rules.push_back(reply_for(p.behavior));
  FlowProfile initial = start ? *start : uniform_start(instance);
  if (start) check_profile(instance, initial, 1e-9);
  return cyclic(instance, config, std::move(initial), rules, "nash_solve");
}

SolveReport global_optimum(const Instance& instance, const IterationConfig& config) {
  require_valid(instance);
  if (shared_access(instance)) return shared_social_optimum(instance);
  std::vector<Reply> rules(instance.num_players(), Reply::joint);
  return cyclic(instance, config, uniform_start(instance), rules, "global_optimum");
}

SolveReport wardrop_solve(const Instance& instance, const IterationConfig& config) {
  require_valid(instance);
  if (shared_access(instance)) {
    std::vector<std::size_t> all(instance.num_links());
    std::iota(all.begin(), all.end(), 0);
    const Allocation alloc = fill(instance.links, MarginalSpec{Mode::wardrop, {}, {}}, total_flow(instance), all);
    return split_proportionally(instance, alloc, Mode::wardrop);
  }
  std::vector<Reply> rules(instance.num_players(), Reply::latency);
  return cyclic(instance, config, uniform_start(instance), rules, "wardrop_solve");
}

}  // namespace splitflow
