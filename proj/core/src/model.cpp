#include "splitflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace splitflow {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

InvalidInstance::InvalidInstance(std::vector<std::string> errors)
    : std::invalid_argument("invalid instance: " + join(errors)), errors_(std::move(errors)) {}

std::vector<std::string> check(const Instance& instance) {
  std::vector<std::string> errors;
  if (instance.links.empty()) errors.emplace_back("instance has no links");
  if (instance.players.empty()) errors.emplace_back("instance has no players");
  for (std::size_t j = 0; j < instance.links.size(); ++j) {
    const auto& l = instance.links[j];
    std::ostringstream where;
    where << "link " << j << ": ";
    if (!std::isfinite(l.a) || l.a < 0.0) errors.push_back(where.str() + "negative coefficient a");
    if (!std::isfinite(l.b) || l.b < 0.0) errors.push_back(where.str() + "negative coefficient b");
    if (l.d < 1) errors.push_back(where.str() + "degree must be >= 1");
    if (l.a == 0.0 && l.b == 0.0 && !l.allow_zero)
      errors.push_back(where.str() + "identically zero latency");
  }
  if (!instance.raw_index.empty() && instance.raw_index.size() != instance.links.size())
    errors.emplace_back("raw_index size does not match links");
  for (std::size_t i = 0; i < instance.players.size(); ++i) {
    const auto& p = instance.players[i];
    std::ostringstream where;
    where << "player " << i << ": ";
    if (!std::isfinite(p.flow) || p.flow <= 0.0) errors.push_back(where.str() + "flow must be positive");
    for (std::size_t j : p.links) {
      if (j >= instance.links.size()) {
        std::ostringstream msg;
        msg << where.str() << "invalid link index " << j;
        errors.push_back(msg.str());
      }
    }
    auto sorted = p.links;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      errors.push_back(where.str() + "duplicate link index");
  }
  return errors;
}

void require_valid(const Instance& instance) {
  auto errors = check(instance);
  if (!errors.empty()) throw InvalidInstance(std::move(errors));
  for (std::size_t i = 0; i < instance.players.size(); ++i)
    if (instance.players[i].links.empty())
      throw InvalidInstance({"player " + std::to_string(i) + ": empty link set (run validate first)"});
}

Instance validate(Instance instance) {
  auto errors = check(instance);
  if (!errors.empty()) throw InvalidInstance(std::move(errors));

  const std::size_t n = instance.links.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return instance.links[x].b < instance.links[y].b; });

  std::vector<std::size_t> position(n);
  for (std::size_t k = 0; k < n; ++k) position[order[k]] = k;

  Instance out;
  out.links.reserve(n);
  out.raw_index.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.links.push_back(instance.links[order[k]]);
    out.raw_index.push_back(instance.raw_index.empty() ? order[k] : instance.raw_index[order[k]]);
  }
  for (auto p : instance.players) {
    if (p.links.empty()) {
      p.links.resize(n);
      std::iota(p.links.begin(), p.links.end(), 0);
    } else {
      for (auto& j : p.links) j = position[j];
      std::sort(p.links.begin(), p.links.end());
    }
    out.players.push_back(std::move(p));
  }
  return out;
}

double latency(const LatencyFn& link, double load) {
  if (link.d == 1) return link.a * load + link.b;
  return link.a * std::pow(load, link.d) + link.b;
}

double latency_slope(const LatencyFn& link, double load) {
  if (link.d == 1) return link.a;
  return link.d * link.a * std::pow(load, link.d - 1);
}

std::vector<double> link_loads(const FlowProfile& profile) {
  std::vector<double> loads(profile.num_links(), 0.0);
  for (const auto& row : profile.flow)
    for (std::size_t j = 0; j < row.size(); ++j) loads[j] += row[j];
  return loads;
}

double total_flow(const Instance& instance) {
  double total = 0.0;
  for (const auto& p : instance.players) total += p.flow;
  return total;
}

void check_profile(const Instance& instance, const FlowProfile& profile, double tol) {
  if (profile.num_players() != instance.num_players())
    throw std::invalid_argument("profile: player count mismatch");
  for (std::size_t i = 0; i < profile.num_players(); ++i) {
    const auto& row = profile.flow[i];
    if (row.size() != instance.num_links()) throw std::invalid_argument("profile: link count mismatch");
    const auto& access = instance.players[i].links;
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!(row[j] >= 0.0)) throw std::invalid_argument("profile: negative flow");
      if (row[j] > 0.0 && !access.empty() &&
          std::find(access.begin(), access.end(), j) == access.end())
        throw std::invalid_argument("profile: flow on inaccessible link");
      sum += row[j];
    }
    const double volume = instance.players[i].flow;
    if (std::abs(sum - volume) > tol * std::max(1.0, volume))
      throw std::invalid_argument("profile: player " + std::to_string(i) + " flow does not sum to its volume");
  }
}

double player_cost(const Instance& instance, const FlowProfile& profile, std::size_t player) {
  const auto loads = link_loads(profile);
  const auto& row = profile.flow.at(player);
  double cost = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j] != 0.0) cost += row[j] * latency(instance.links[j], loads[j]);
  return cost;
}

std::vector<double> player_costs(const Instance& instance, const FlowProfile& profile) {
  std::vector<double> costs;
  costs.reserve(profile.num_players());
  for (std::size_t i = 0; i < profile.num_players(); ++i) costs.push_back(player_cost(instance, profile, i));
  return costs;
}

double social_cost(const Instance& instance, const FlowProfile& profile) {
  double total = 0.0;
  for (std::size_t i = 0; i < profile.num_players(); ++i) total += player_cost(instance, profile, i);
  return total;
}

Instance shift_constant(Instance instance, double c) {
  for (std::size_t j = 0; j < instance.links.size(); ++j) {
    auto& l = instance.links[j];
    const double b = l.b + c;
    if (b < 0.0) throw std::invalid_argument("shift_constant: negative resulting intercept on link " + std::to_string(j));
    l.b = b;
    if (l.a == 0.0 && l.b == 0.0) l.allow_zero = true;
  }
  return instance;
}

bool shared_access(const Instance& instance) {
  const std::size_t n = instance.num_links();
  for (const auto& p : instance.players)
    if (!p.links.empty() && p.links.size() != n) return false;
  return true;
}

bool all_affine(const Instance& instance) {
  return std::all_of(instance.links.begin(), instance.links.end(), [](const LatencyFn& l) { return l.d == 1; });
}

std::vector<std::size_t> support_of(const std::vector<double>& row, double eps) {
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j] > eps) used.push_back(j);
  return used;
}

FlowProfile to_raw_order(const Instance& canonical, const FlowProfile& profile) {
  if (canonical.raw_index.empty()) return profile;
  FlowProfile raw = FlowProfile::zeros(profile.num_players(), profile.num_links());
  for (std::size_t i = 0; i < profile.num_players(); ++i)
    for (std::size_t k = 0; k < profile.num_links(); ++k) raw.flow[i][canonical.raw_index[k]] = profile.flow[i][k];
  return raw;
}

}  // namespace splitflow
