#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace splitflow {

/// Latency curve of one parallel link: a * load^d + b.
struct LatencyFn {
  double a = 0.0;
  double b = 0.0;
  int d = 1;
  /// Permits the identically-zero curve (a == 0 and b == 0).
  bool allow_zero = false;

  bool affine() const { return d == 1; }
  bool constant() const { return a == 0.0; }
};

enum class Behavior { atomic, wardrop };

struct PlayerSpec {
  double flow = 0.0;
  /// Link indices the player may route on. Empty means "all links" until
  /// validate() expands it.
  std::vector<std::size_t> links;
  Behavior behavior = Behavior::atomic;
};

struct Instance {
  std::vector<LatencyFn> links;
  std::vector<PlayerSpec> players;
  /// raw_index[k] is the position link k had in the instance as it was
  /// loaded. Empty means identity.
  std::vector<std::size_t> raw_index;

  std::size_t num_links() const { return links.size(); }
  std::size_t num_players() const { return players.size(); }
};

/// flow[i][j] is player i's flow on link j.
struct FlowProfile {
  std::vector<std::vector<double>> flow;

  static FlowProfile zeros(std::size_t players, std::size_t links) {
    return FlowProfile{std::vector<std::vector<double>>(players, std::vector<double>(links, 0.0))};
  }
  std::size_t num_players() const { return flow.size(); }
  std::size_t num_links() const { return flow.empty() ? 0 : flow.front().size(); }
};

struct SolveReport {
  FlowProfile profile;
  std::vector<double> player_costs;
  double social_cost = 0.0;
  /// Common marginal cost (atomic) or common latency (wardrop) on the used
  /// links of each player.
  std::vector<double> levels;
  std::vector<std::vector<std::size_t>> supports;
  /// Max violation of the optimality condition the solver targets.
  double residual = 0.0;
  std::vector<double> player_residuals;
  std::size_t iterations = 0;
};

/// Thrown by validate() and by solvers handed an instance that fails check().
class InvalidInstance : public std::invalid_argument {
 public:
  explicit InvalidInstance(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Flow entries below this are treated as "link unused" when reporting supports.
inline constexpr double kSupportEps = 1e-12;

/// Lists every invariant violation; empty when the instance is usable.
std::vector<std::string> check(const Instance& instance);

/// Returns the canonical form: links sorted by ascending intercept (stable),
/// player link sets expanded and remapped, raw_index composed. Throws
/// InvalidInstance on any check() error.
Instance validate(Instance instance);

/// Throws InvalidInstance unless the instance passes check(). Does not reorder.
void require_valid(const Instance& instance);

double latency(const LatencyFn& link, double load);
/// d/dload of latency().
double latency_slope(const LatencyFn& link, double load);

std::vector<double> link_loads(const FlowProfile& profile);
double total_flow(const Instance& instance);

/// Throws std::invalid_argument when the profile breaks an invariant.
void check_profile(const Instance& instance, const FlowProfile& profile, double tol = 1e-9);

double player_cost(const Instance& instance, const FlowProfile& profile, std::size_t player);
/// Sum of player costs; equal to sum_j f_j * l_j(f_j).
double social_cost(const Instance& instance, const FlowProfile& profile);
std::vector<double> player_costs(const Instance& instance, const FlowProfile& profile);

/// Adds c to every intercept. Throws std::invalid_argument if any result < 0.
Instance shift_constant(Instance instance, double c);

/// True when every player may use every link.
bool shared_access(const Instance& instance);
bool all_affine(const Instance& instance);

/// Used links of one allocation row.
std::vector<std::size_t> support_of(const std::vector<double>& row, double eps = kSupportEps);

/// Maps a profile on a canonical instance back to raw link order.
FlowProfile to_raw_order(const Instance& canonical, const FlowProfile& profile);

}  // namespace splitflow
