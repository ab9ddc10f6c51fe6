#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "splitflow/model.hpp"

namespace splitflow {

/// What the allocating agent equalizes across its used links, as a function
/// of its own flow x on a link already carrying background load g:
///   optimum  d/dx [x * l(x + g)]          (its own cost; system optimum when g = 0)
///   wardrop  l(x + g)                     (latency, infinitesimal users)
///   joint    d/dx [(x + g) * l(x + g)]    (total link cost, for the global optimum)
/// In all modes a per-link shift is added on top.
enum class Mode { optimum, wardrop, joint };

struct MarginalSpec {
  Mode mode = Mode::optimum;
  /// Added to each link's marginal; >= 0. Empty means all zero.
  std::vector<double> shift;
  /// Flow of other agents on each link; >= 0. Empty means all zero.
  std::vector<double> background;
};

double marginal(const LatencyFn& link, double shift, double x, Mode mode, double background = 0.0);

struct Allocation {
  /// One entry per link of the instance; zero off the accessible set.
  std::vector<double> flow;
  /// Common marginal on used links.
  double level = 0.0;
};

/// Splits volume over the accessible links so the marginal is level on used
/// links and >= level at zero on unused ones. Constant links cap the level at
/// their intercept and take the residual; equal-intercept ties split evenly.
/// Throws std::invalid_argument on negative volume or empty accessible set.
Allocation fill(std::span<const LatencyFn> links, const MarginalSpec& spec, double volume,
                std::span<const std::size_t> accessible);

/// Max violation of the fill optimality conditions for a given allocation.
double fill_residual(std::span<const LatencyFn> links, const MarginalSpec& spec,
                     std::span<const std::size_t> accessible, const std::vector<double>& x, double level);

/// Minimizes sum_j f_j l_j(f_j). With shared access this is one exact fill of
/// the total volume, split across players in proportion to their volumes.
/// With player-specific access sets it delegates to block coordinate descent
/// (see global_optimum in equilibria.hpp) using default iteration settings.
SolveReport social_optimum(const Instance& instance);

/// Exact shared-access optimum; throws std::invalid_argument when access sets differ.
SolveReport shared_social_optimum(const Instance& instance);

}  // namespace splitflow
