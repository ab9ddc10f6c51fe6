#include "splitflow/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "splitflow/qp.hpp"
#include "splitflow/waterfill.hpp"

namespace splitflow {

namespace {

struct Candidate {
  std::vector<double> z;
  double leader_cost = 0.0;
  double social_cost = 0.0;
  std::size_t ordinal = 0;
};

double tie_width(double tol, double cost) { return tol * std::max(1.0, std::abs(cost)); }

// Leader-optimal first; among near-equal leader costs the larger social cost;
// exact ties keep the earlier ordinal.
bool replaces(const Candidate& c, const Candidate& best, double tol) {
  const double w = tie_width(tol, best.leader_cost);
  if (c.leader_cost < best.leader_cost - w) return true;
  if (c.leader_cost > best.leader_cost + w) return false;
  if (c.social_cost > best.social_cost) return true;
  if (c.social_cost < best.social_cost) return false;
  return c.ordinal < best.ordinal && c.leader_cost < best.leader_cost;
}

void require_two_players(const Instance& instance, std::size_t leader) {
  if (instance.num_players() != 2)
    throw std::invalid_argument("selfish leadership supports exactly two players (one leader, one follower)");
  if (leader > 1) throw std::out_of_range("leader index must be 0 or 1");
}

Candidate evaluate(const Instance& instance, std::size_t leader, std::vector<double> z, std::size_t ordinal) {
  const SslReport r = commit(instance, leader, z);
  return Candidate{std::move(z), r.leader_cost, r.social_cost, ordinal};
}

// Clamps tiny negatives and restores the exact leader volume.
void project_to_simplex(std::vector<double>& z, const std::vector<std::size_t>& links, double volume) {
  double sum = 0.0;
  for (std::size_t j : links) {
    z[j] = std::max(0.0, z[j]);
    sum += z[j];
  }
  if (sum > 0.0)
    for (std::size_t j : links) z[j] *= volume / sum;
}

// Leader cost restricted to follower support S, as an affine-quadratic
// program in the leader's per-link flows. Returns nullopt when the region of
// S is empty.
std::optional<std::vector<double>> solve_support(const Instance& inst, std::size_t leader, std::size_t follower,
                                                 const std::vector<std::size_t>& support) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const auto& links = inst.links;
  const auto& lead_links = inst.players[leader].links;
  const auto& foll_links = inst.players[follower].links;
  const double lead_volume = inst.players[leader].flow;
  const double foll_volume = inst.players[follower].flow;
  const bool atomic = inst.players[follower].behavior == Behavior::atomic;
  const std::size_t n = links.size();
  const int k = static_cast<int>(lead_links.size());

  std::vector<int> pos(n, -1);
  for (int p = 0; p < k; ++p) pos[lead_links[p]] = p;
  std::vector<bool> in_support(n, false);
  for (std::size_t j : support) in_support[j] = true;

  std::vector<std::size_t> sloped, flat;
  for (std::size_t j : support) (links[j].a > 0.0 ? sloped : flat).push_back(j);

  // Follower's common level lambda = lambda0 + lambda_v' z.
  double lambda0 = 0.0;
  VectorXd lambda_v = VectorXd::Zero(k);
  if (!flat.empty()) {
    const double b = links[flat.front()].b;
    for (std::size_t j : flat)
      if (std::abs(links[j].b - b) > 1e-12 * std::max(1.0, b)) return std::nullopt;
    lambda0 = b;
  } else {
    double inv = 0.0, weighted = 0.0;
    for (std::size_t j : sloped) {
      inv += 1.0 / links[j].a;
      weighted += links[j].b / links[j].a;
    }
    lambda0 = ((atomic ? 2.0 : 1.0) * foll_volume + weighted) / inv;
    for (std::size_t j : sloped)
      if (pos[j] >= 0) lambda_v(pos[j]) = 1.0 / inv;
  }

  // Follower flow y_j = y0_j + yv_j' z on its support.
  std::vector<double> y0(n, 0.0);
  std::vector<VectorXd> yv(n, VectorXd::Zero(k));
  for (std::size_t j : sloped) {
    const double a = links[j].a, b = links[j].b;
    if (atomic) {
      y0[j] = (lambda0 - b) / (2.0 * a);
      yv[j] = lambda_v / (2.0 * a);
      if (pos[j] >= 0) yv[j](pos[j]) -= 0.5;
    } else {
      y0[j] = (lambda0 - b) / a;
      yv[j] = lambda_v / a;
      if (pos[j] >= 0) yv[j](pos[j]) -= 1.0;
    }
  }
  double rest0 = foll_volume;
  VectorXd rest_v = VectorXd::Zero(k);
  for (std::size_t j : sloped) {
    rest0 -= y0[j];
    rest_v -= yv[j];
  }
  for (std::size_t j : flat) {
    y0[j] = rest0 / static_cast<double>(flat.size());
    yv[j] = rest_v / static_cast<double>(flat.size());
  }

  qp::Problem pb;
  pb.G = MatrixXd::Zero(k, k);
  pb.g = VectorXd::Zero(k);
  MatrixXd cross = MatrixXd::Zero(k, k);
  for (int p = 0; p < k; ++p) {
    const std::size_t j = lead_links[p];
    const double a = links[j].a;
    pb.G(p, p) += 2.0 * a;
    pb.g(p) += links[j].b + a * y0[j];
    cross.row(p) = a * yv[j].transpose();
  }
  pb.G += cross + cross.transpose();
  const MatrixXd hessian = pb.G;

  pb.Aeq = MatrixXd::Ones(1, k);
  pb.beq = VectorXd::Constant(1, lead_volume);

  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  for (int p = 0; p < k; ++p) {
    rows.push_back(VectorXd::Unit(k, p));
    rhs.push_back(0.0);
  }
  for (std::size_t j : sloped) {
    rows.push_back(yv[j]);
    rhs.push_back(-y0[j]);
  }
  if (!flat.empty()) {
    rows.push_back(rest_v);
    rhs.push_back(-rest0);
  }
  for (std::size_t j : foll_links) {
    if (in_support[j]) continue;
    VectorXd row = -lambda_v;
    if (pos[j] >= 0) row(pos[j]) += links[j].a;
    rows.push_back(row);
    rhs.push_back(lambda0 - links[j].b);
  }
  pb.Ain.resize(static_cast<Eigen::Index>(rows.size()), k);
  pb.bin.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    pb.Ain.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    pb.bin(static_cast<Eigen::Index>(r)) = rhs[r];
  }

  const double diag = std::max(hessian.diagonal().cwiseAbs().maxCoeff(), 1e-12);
  const double reg = std::max(1e-11 * diag, 1e-9 * pb.g.cwiseAbs().maxCoeff() / lead_volume);
  pb.G += MatrixXd::Identity(k, k) * reg;
  const auto sol = qp::solve(pb);
  if (!sol) return std::nullopt;

  // Re-solve the KKT system of the detected active set without the
  // regularization, first with nearly-active rows added; keep the result when
  // it stays feasible and is no worse.
  auto objective = [&](const VectorXd& z) { return 0.5 * z.dot(hessian * z) + pb.g.dot(z); };
  const double scale = std::max({1.0, lead_volume, foll_volume});
  auto polish = [&](const std::vector<int>& active) -> std::optional<VectorXd> {
    const int m = 1 + static_cast<int>(active.size());
    MatrixXd A(m, k);
    VectorXd b(m);
    A.row(0) = pb.Aeq.row(0);
    b(0) = lead_volume;
    for (int r = 1; r < m; ++r) {
      A.row(r) = pb.Ain.row(active[r - 1]);
      b(r) = pb.bin(active[r - 1]);
    }
    MatrixXd kkt = MatrixXd::Zero(k + m, k + m);
    kkt.topLeftCorner(k, k) = hessian;
    kkt.topRightCorner(k, m) = A.transpose();
    kkt.bottomLeftCorner(m, k) = A;
    VectorXd r(k + m);
    r << -pb.g, b;
    const VectorXd s = kkt.completeOrthogonalDecomposition().solve(r);
    if ((kkt * s - r).lpNorm<Eigen::Infinity>() > 1e-9 * scale * std::max(1.0, diag)) return std::nullopt;
    const VectorXd zp = s.head(k);
    if (!((pb.Ain * zp - pb.bin).array() >= -1e-12 * scale).all()) return std::nullopt;
    return zp;
  };
  // The dual method can drift off the equality by roundoff; compare against
  // its projection.
  VectorXd z = sol->x.cwiseMax(0.0);
  if (z.sum() > 0.0) z *= lead_volume / z.sum();
  std::vector<int> near = sol->active;
  const VectorXd slack = pb.Ain * z - pb.bin;
  for (int r = 0; r < slack.size(); ++r)
    if (slack(r) <= 1e-6 * scale && std::find(near.begin(), near.end(), r) == near.end()) near.push_back(r);
  double best = objective(z);
  for (const auto& active : {near, sol->active}) {
    const auto zp = polish(active);
    if (zp && objective(*zp) <= best + 1e-14 * std::max(1.0, std::abs(best))) {
      z = *zp;
      best = objective(z);
    }
  }

  std::vector<double> out(n, 0.0);
  for (int p = 0; p < k; ++p) out[lead_links[p]] = z(p);
  project_to_simplex(out, lead_links, lead_volume);
  return out;
}

std::vector<Candidate> exact_candidates(const Instance& inst, std::size_t leader, std::size_t follower) {
  const auto& foll_links = inst.players[follower].links;
  const std::size_t m = foll_links.size();
  std::vector<Candidate> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    std::vector<std::size_t> support;
    for (std::size_t t = 0; t < m; ++t)
      if (mask & (std::size_t{1} << t)) support.push_back(foll_links[t]);
    auto z = solve_support(inst, leader, follower, support);
    if (!z) continue;
    out.push_back(evaluate(inst, leader, std::move(*z), mask));
  }
  return out;
}

void compositions(std::size_t parts, std::size_t total, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out, std::size_t cap) {
  if (out.size() > cap) return;
  if (cur.size() + 1 == parts) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t v = 0; v <= total; ++v) {
    cur.push_back(v);
    compositions(parts, total - v, cur, out, cap);
    cur.pop_back();
  }
}

constexpr std::size_t kMaxLatticeSeeds = 4096;
constexpr std::size_t kMinLatticeSeeds = 256;
constexpr std::size_t kEvalBudgetPerStart = 400000;

double lattice_size(std::size_t k, std::size_t divisions) {
  double c = 1.0;
  for (std::size_t t = 1; t < k; ++t) c = c * static_cast<double>(divisions + t) / static_cast<double>(t);
  return c;
}

// grid - 1 divisions, refined while the lattice stays under kMinLatticeSeeds.
std::size_t lattice_divisions(std::size_t k, std::size_t grid) {
  std::size_t d = std::max<std::size_t>(grid, 2) - 1;
  while (lattice_size(k, d + 1) <= static_cast<double>(kMinLatticeSeeds)) ++d;
  return d;
}

std::vector<std::vector<double>> seed_points(std::size_t k, std::size_t grid, double volume) {
  std::vector<std::vector<double>> seeds;
  const std::size_t divisions = lattice_divisions(k, grid);
  std::vector<std::vector<std::size_t>> lattice;
  std::vector<std::size_t> cur;
  compositions(k, divisions, cur, lattice, kMaxLatticeSeeds);
  if (lattice.size() <= kMaxLatticeSeeds) {
    for (const auto& c : lattice) {
      std::vector<double> w;
      for (std::size_t v : c) w.push_back(volume * static_cast<double>(v) / static_cast<double>(divisions));
      seeds.push_back(std::move(w));
    }
  } else {
    std::mt19937_64 gen(0x5eedULL);
    for (std::size_t s = 0; s < kMaxLatticeSeeds; ++s) {
      std::vector<double> w(k);
      double sum = 0.0;
      for (auto& v : w) {
        v = -std::log(1.0 - static_cast<double>(gen() >> 11) * 0x1.0p-53);
        sum += v;
      }
      for (auto& v : w) v *= volume / sum;
      seeds.push_back(std::move(w));
    }
  }
  for (std::size_t p = 0; p < k; ++p) {
    std::vector<double> w(k, 0.0);
    w[p] = volume;
    seeds.push_back(std::move(w));
  }
  seeds.emplace_back(k, volume / static_cast<double>(k));
  return seeds;
}

std::vector<Candidate> numeric_candidates(const Instance& inst, std::size_t leader, const SslConfig& config) {
  const auto& lead_links = inst.players[leader].links;
  const std::size_t k = lead_links.size();
  const double volume = inst.players[leader].flow;
  const std::size_t n = inst.num_links();

  auto expand = [&](const std::vector<double>& w) {
    std::vector<double> z(n, 0.0);
    for (std::size_t p = 0; p < k; ++p) z[lead_links[p]] = w[p];
    return z;
  };

  const auto seeds = seed_points(k, config.grid, volume);
  std::vector<Candidate> seeded;
  for (std::size_t s = 0; s < seeds.size(); ++s) seeded.push_back(evaluate(inst, leader, expand(seeds[s]), s));
  std::vector<std::size_t> order(seeded.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return seeded[x].leader_cost < seeded[y].leader_cost; });

  const std::size_t starts = std::min(config.starts, order.size());
  const double min_step = 1e-14 * volume;
  const double initial_step = volume / static_cast<double>(lattice_divisions(k, config.grid));
  std::vector<Candidate> out;
  bool any_converged = false;
  std::optional<Candidate> best_seen;
  for (std::size_t s = 0; s < starts; ++s) {
    std::vector<double> w = seeds[order[s]];
    double f = seeded[order[s]].leader_cost;
    double h = initial_step;
    std::size_t evals = 0;
    while (h > min_step && evals < kEvalBudgetPerStart) {
      double best_f = f;
      std::vector<double> best_w;
      for (std::size_t p = 0; p < k; ++p) {
        if (w[p] <= 0.0) continue;
        const double t = std::min(h, w[p]);
        for (std::size_t q = 0; q < k; ++q) {
          if (q == p) continue;
          std::vector<double> trial = w;
          trial[p] -= t;
          trial[q] += t;
          if (t == w[p]) trial[p] = 0.0;
          const double ft = leader_cost(inst, leader, expand(trial));
          ++evals;
          if (ft < best_f) {
            best_f = ft;
            best_w = std::move(trial);
          }
        }
      }
      if (best_w.empty()) {
        h *= 0.5;
      } else {
        w = std::move(best_w);
        f = best_f;
      }
    }
    Candidate c = evaluate(inst, leader, expand(w), s);
    if (!best_seen || replaces(c, *best_seen, config.tol)) best_seen = c;
    if (h <= min_step) {
      any_converged = true;
      out.push_back(std::move(c));
    }
  }
  if (!any_converged) {
    throw SslError("ssl_solve: numeric search did not converge from any start",
                   best_seen ? std::optional<SslReport>(commit(inst, leader, best_seen->z)) : std::nullopt);
  }
  return out;
}

}  // namespace

SslReport commit(const Instance& instance, std::size_t leader, const std::vector<double>& z) {
  require_two_players(instance, leader);
  const std::size_t follower = 1 - leader;
  if (z.size() != instance.num_links()) throw std::invalid_argument("leader allocation: wrong length");

  check_profile(Instance{instance.links, {instance.players[leader]}, instance.raw_index}, FlowProfile{{z}});
  FlowProfile profile = FlowProfile::zeros(2, instance.num_links());
  profile.flow[leader] = z;
  const Allocation reply = respond(instance, profile, follower, instance.players[follower].behavior);
  profile.flow[follower] = reply.flow;

  SslReport r;
  r.leader = leader;
  r.follower = follower;
  r.leader_allocation = z;
  r.follower_response = reply.flow;
  r.inner.player_costs = player_costs(instance, profile);
  r.inner.social_cost = social_cost(instance, profile);
  r.leader_cost = r.inner.player_costs[leader];
  r.follower_cost = r.inner.player_costs[follower];
  r.social_cost = r.inner.social_cost;
  r.inner.levels.assign(2, 0.0);
  r.inner.levels[follower] = reply.level;
  const Mode mode = instance.players[follower].behavior == Behavior::atomic ? Mode::optimum : Mode::wardrop;
  const double residual =
      fill_residual(instance.links, MarginalSpec{mode, {}, z}, instance.players[follower].links, reply.flow, reply.level);
  r.inner.residual = residual;
  r.inner.player_residuals.assign(2, 0.0);
  r.inner.player_residuals[follower] = residual;
  for (const auto& row : profile.flow) r.inner.supports.push_back(support_of(row));
  r.inner.profile = std::move(profile);
  return r;
}

double leader_cost(const Instance& instance, std::size_t leader, const std::vector<double>& z) {
  return commit(instance, leader, z).leader_cost;
}

SslReport ssl_solve(const Instance& instance, std::size_t leader, const SslConfig& config) {
  require_valid(instance);
  require_two_players(instance, leader);
  if (config.starts == 0 || config.grid == 0 || !(config.tol > 0.0))
    throw std::invalid_argument("ssl config: starts, grid and tol must be positive");
  const std::size_t follower = 1 - leader;
  const auto& lead_links = instance.players[leader].links;

  const bool eligible = all_affine(instance) && instance.num_links() <= kExactSupportMaxLinks;
  SslMethod method = config.method;
  if (method == SslMethod::automatic) method = eligible ? SslMethod::exact_support : SslMethod::numeric;
  if (method == SslMethod::exact_support && !eligible)
    throw std::invalid_argument("exact_support needs affine links and at most 12 links");

  std::vector<Candidate> candidates;
  if (lead_links.size() == 1) {
    std::vector<double> z(instance.num_links(), 0.0);
    z[lead_links.front()] = instance.players[leader].flow;
    candidates.push_back(evaluate(instance, leader, std::move(z), 0));
  } else if (method == SslMethod::exact_support) {
    candidates = exact_candidates(instance, leader, follower);
    if (candidates.empty()) {
      method = SslMethod::numeric;
      candidates = numeric_candidates(instance, leader, config);
    }
  } else {
    candidates = numeric_candidates(instance, leader, config);
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c)
    if (replaces(candidates[c], candidates[best], config.tol)) best = c;

  SslReport report = commit(instance, leader, candidates[best].z);
  report.method = method;
  report.candidates = candidates.size();
  return report;
}

PriceReport price_report(const Instance& instance, const SslConfig& config, const IterationConfig& iteration) {
  require_valid(instance);
  require_two_players(instance, 0);
  PriceReport pr;
  pr.optimum = global_optimum(instance, iteration);
  pr.nash = nash_solve(instance, iteration);
  pr.c_se = pr.optimum.social_cost;
  pr.c_ne = pr.nash.social_cost;
  for (std::size_t leader = 0; leader < 2; ++leader) pr.ssl.push_back(ssl_solve(instance, leader, config));
  pr.worst_leader = pr.ssl[1].social_cost > pr.ssl[0].social_cost ? 1 : 0;
  const double worst = pr.ssl[pr.worst_leader].social_cost;
  pr.price_vs_nash = worst / pr.c_ne;
  pr.price_vs_optimal = worst / pr.c_se;
  const bool atomic = instance.players[0].behavior == Behavior::atomic && instance.players[1].behavior == Behavior::atomic;
  if (atomic && all_affine(instance) && shared_access(instance)) pr.bounds = bound_set(instance, pr.worst_leader);
  return pr;
}

}  // namespace splitflow
