#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "splitflow/model.hpp"
#include "splitflow/waterfill.hpp"

namespace splitflow {

/// Settings of the cyclic (Gauss-Seidel) best-response loop. Convergence is
/// declared when every player's sup-norm distance to its best response is at
/// most tol * max(1, total flow).
struct IterationConfig {
  double damping = 0.5;
  double tol = 1e-10;
  std::size_t max_iters = 100000;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, FlowProfile last)
      : std::runtime_error(what), residual_(residual), last_(std::move(last)) {}
  double residual() const { return residual_; }
  const FlowProfile& last_profile() const { return last_; }

 private:
  double residual_;
  FlowProfile last_;
};

void check_config(const IterationConfig& config);

/// Player i's optimal reply to everyone else's flows in profile (row i is
/// ignored). Atomic players minimize their own cost, wardrop players
/// equalize latency over their used links.
Allocation best_response(const Instance& instance, const FlowProfile& profile, std::size_t player);

/// Same as best_response, with the behavior given explicitly.
Allocation respond(const Instance& instance, const FlowProfile& profile, std::size_t player, Behavior behavior);

/// Each player's volume spread evenly over its accessible links.
FlowProfile uniform_start(const Instance& instance);

/// Simultaneous-move equilibrium with each player's declared behavior.
SolveReport nash_solve(const Instance& instance, const IterationConfig& config = {},
                       const std::optional<FlowProfile>& start = std::nullopt);

/// Minimum social cost subject to each player routing within its own access
/// set. Shared access uses one exact fill; otherwise block coordinate descent.
SolveReport global_optimum(const Instance& instance, const IterationConfig& config = {});

/// Every player treated as a continuum of infinitesimal users.
SolveReport wardrop_solve(const Instance& instance, const IterationConfig& config = {});

}  // namespace splitflow
