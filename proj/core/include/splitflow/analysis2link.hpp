#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "splitflow/bounds.hpp"
#include "splitflow/model.hpp"
#include "splitflow/stackelberg.hpp"

namespace splitflow {

/// Two affine links a1 f + b1 and a2 f + b2; player 0 routes 1 and leads,
/// player 1 routes r. Both atomic.
struct TwoLinkParams {
  double a1 = 1.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double r = 1.0;

  /// Every player uses both links in the equilibrium and in the leadership outcome.
  bool feasible() const;
  Instance to_instance() const;
};

/// Social cost of the simultaneous equilibrium. Throws std::invalid_argument
/// when the parameters are infeasible.
double ne_cost(const TwoLinkParams& p);
/// Social cost when player 0 leads.
double ssl_cost(const TwoLinkParams& p);
double price(const TwoLinkParams& p);

struct SearchConfig {
  std::size_t grid = 200;
  double b2_max = 4.0;
  double a2_max = 4.0;
  double r_max = 3.0;
  /// Restricts the search to b1 == b2 (always zero after normalization).
  bool equal_intercepts = false;
};

struct SearchResult {
  TwoLinkParams params;
  double value = 1.0;
  std::size_t evaluated = 0;
};

/// Fixes a1 = 1 and b1 = 0, scans a grid over (b2, a2, r) skipping
/// infeasible points, then refines the best point by pattern search.
SearchResult maximize_price(const SearchConfig& config = {});

/// Link 0 is f^d, link 1 the constant b2; flows 1 and r.
struct MonomialSearchConfig {
  int d = 4;
  double b2_center = 5.67;
  double r_center = 0.587;
  double b2_halfwidth = 0.5;
  double r_halfwidth = 0.1;
  std::size_t grid = 5;
  std::size_t refine_rounds = 12;
  SslConfig ssl{SslMethod::numeric, 4, 11, 1e-9};
};

struct MonomialResult {
  double b2 = 0.0;
  double r = 0.0;
  double price_vs_nash = 1.0;
  double at_center = 1.0;
  std::size_t evaluated = 0;
};

Instance monomial_instance(int d, double b2, double r);
/// Worst-leader SSL social cost over the equilibrium cost.
double monomial_price(int d, double b2, double r, const SslConfig& ssl);
MonomialResult maximize_monomial_price(const MonomialSearchConfig& config = {});

struct FuzzConfig {
  std::uint64_t seed = 42;
  std::size_t n = 10000;
  std::size_t max_links = 6;
  /// Item 0 becomes the two-link lower-bound instance.
  bool include_lower_bound = true;
  std::size_t nash_starts = 16;
};

struct FuzzViolation {
  std::size_t item = 0;
  Violation violation;
};

struct FuzzSummary {
  std::size_t instances = 0;
  std::size_t dlp_true = 0;
  double max_price_vs_optimal = 1.0;
  double max_price_vs_nash = 1.0;
  std::size_t argmax_vs_optimal = 0;
  std::size_t argmax_vs_nash = 0;
  std::vector<FuzzViolation> violations;
};

/// Deterministic random two-player shared-access affine instance.
Instance random_instance(std::uint64_t seed, std::size_t item, std::size_t max_links);

/// Optimality and uniqueness checks on one instance, in addition to verify_bounds.
std::vector<Violation> property_checks(const Instance& instance, const PriceReport& report, std::uint64_t seed,
                                       std::size_t nash_starts);

FuzzSummary fuzz(const FuzzConfig& config = {});

}  // namespace splitflow
