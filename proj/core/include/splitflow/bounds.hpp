#pragma once

#include <string>
#include <utility>
#include <vector>

#include "splitflow/model.hpp"

namespace splitflow {

struct PriceReport;

using NamedValue = std::pair<std::string, double>;

/// Quantities describing the optimum of a normalized (unit total flow,
/// smallest intercept zero) two-player instance, and the upper bounds they
/// imply on each player's cost and on the price of leadership.
struct BoundSet {
  /// Smallest latency among links carrying optimal flow.
  double l_min = 0.0;
  double c_se = 0.0;
  /// c_se / l_min; in [1, 2] for affine shared-access instances.
  double gamma = 0.0;
  /// Leader's share of the unit total.
  double alpha = 0.0;
  std::size_t leader = 0;
  std::vector<NamedValue> p1_bounds;
  std::vector<NamedValue> p2_bounds;
  std::vector<NamedValue> price_bounds;
  bool dlp = false;
  double low_mass = 0.0;
  double high_mass = 0.0;

  double min_price_bound() const;
  double min_p1_bound() const;
  double min_p2_bound() const;
};

inline constexpr double kDlpLowFactor = 1.16;
inline constexpr double kDlpHighFactor = 1.84;
inline constexpr double kDlpMass = 0.25;
inline constexpr double kAloofFactor = 1.915;
inline constexpr double kQuickPriceBound = 4.0 / 3.0;
inline constexpr double kRefinedPriceBound = 1.322;

/// Rescales to unit total flow (a_j -> a_j * F) and shifts intercepts so the
/// smallest is zero. Costs map as c' = (c - F * b_min) / F.
struct Normalized {
  Instance instance;
  double total = 1.0;
  double b_min = 0.0;

  double cost(double raw_cost, double raw_volume) const { return (raw_cost - raw_volume * b_min) / total; }
};
Normalized normalize(const Instance& instance);

/// Leader allocation that makes the combined flow socially optimal once an
/// atomic follower best-responds. Requires a two-player affine instance in
/// which the leader can reach every link. Throws std::invalid_argument
/// ("strategy 1 precondition fails") otherwise.
std::vector<double> strategy1(const Instance& instance, std::size_t leader);

/// Follower allocation topping up each optimal link the leader left short,
/// cheapest optimal latency first, until the follower's volume is placed.
std::vector<double> strategy2(const Instance& instance, std::size_t follower, const std::vector<double>& leader_allocation);

/// Leader allocation optimal for the leader's volume alone.
std::vector<double> aloof(const Instance& instance, std::size_t leader);

struct DlpResult {
  bool holds = false;
  double l_min = 0.0;
  /// Fraction of total flow with optimal latency <= 1.16 l_min.
  double low_mass = 0.0;
  /// Fraction of total flow with optimal latency >= 1.84 l_min.
  double high_mass = 0.0;
};

/// Diverse latency property of the social optimum. Boundaries are inclusive.
DlpResult dlp_check(const Instance& instance);

/// Bound formulas from the optimum's summary numbers (normalized units).
BoundSet bounds_from(double alpha, double l_min, double c_se, bool dlp);

/// Evaluated on normalize(instance). Requires two players, affine links,
/// shared access.
BoundSet bound_set(const Instance& instance, std::size_t leader = 0);

struct Violation {
  std::string check;
  double measured = 0.0;
  double bound = 0.0;
};

/// Compares a price report against every applicable bound and replays the
/// two strategies on the normalized instance. Empty means all bounds hold.
std::vector<Violation> verify_bounds(const Instance& instance, const PriceReport& report, double tol = 1e-7);

}  // namespace splitflow
