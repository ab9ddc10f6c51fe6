#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "splitflow/bounds.hpp"
#include "splitflow/equilibria.hpp"
#include "splitflow/model.hpp"

namespace splitflow {

enum class SslMethod { exact_support, numeric, automatic };

struct SslConfig {
  SslMethod method = SslMethod::automatic;
  /// Multi-start count of the numeric method.
  std::size_t starts = 32;
  /// Minimum lattice resolution per dimension seeding the numeric method;
  /// finer when the lattice would be small.
  std::size_t grid = 11;
  /// Leader costs within tol * max(1, |cost|) count as ties; ties go to the
  /// larger social cost.
  double tol = 1e-9;
};

/// Largest link count the exact method accepts.
inline constexpr std::size_t kExactSupportMaxLinks = 12;

struct SslReport {
  std::size_t leader = 0;
  std::size_t follower = 1;
  std::vector<double> leader_allocation;
  std::vector<double> follower_response;
  double leader_cost = 0.0;
  double follower_cost = 0.0;
  double social_cost = 0.0;
  /// Combined profile and the follower's optimality residual.
  SolveReport inner;
  SslMethod method = SslMethod::exact_support;
  std::size_t candidates = 0;
};

class SslError : public std::runtime_error {
 public:
  SslError(const std::string& what, std::optional<SslReport> best = std::nullopt)
      : std::runtime_error(what), best_(std::move(best)) {}
  const std::optional<SslReport>& best() const { return best_; }

 private:
  std::optional<SslReport> best_;
};

/// Full outcome when the leader commits to z (one entry per link) and the
/// follower replies optimally with its declared behavior.
SslReport commit(const Instance& instance, std::size_t leader, const std::vector<double>& z);

/// Leader's cost after the follower's reply to z.
double leader_cost(const Instance& instance, std::size_t leader, const std::vector<double>& z);

/// Leader-optimal commitment of a two-player instance.
SslReport ssl_solve(const Instance& instance, std::size_t leader, const SslConfig& config = {});

struct PriceReport {
  SolveReport optimum;
  SolveReport nash;
  /// One per choice of leader.
  std::vector<SslReport> ssl;
  double c_se = 0.0;
  double c_ne = 0.0;
  std::size_t worst_leader = 0;
  double price_vs_nash = 1.0;
  double price_vs_optimal = 1.0;
  /// Present for two-player affine shared-access instances.
  std::optional<BoundSet> bounds;
};

PriceReport price_report(const Instance& instance, const SslConfig& config = {},
                         const IterationConfig& iteration = {});

}  // namespace splitflow
