// Reference solvers for tests. They share no code with the library: every
// player routes on exactly two links, so each strategy is one number and all
// optimizations reduce to nested one-dimensional searches.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

struct Link {
  double a = 0.0;
  double b = 0.0;
  int d = 1;
};

inline double lat(const Link& l, double x) { return l.a * std::pow(x, l.d) + l.b; }
inline double slope(const Link& l, double x) { return l.d == 0 ? 0.0 : l.a * l.d * std::pow(x, l.d - 1); }

/// Minimizer of a unimodal f on [lo, hi].
inline double golden(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  // Endpoints win ties so corner optima come out exact.
  double best = mid, fb = f(mid);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe <= fb) {
      best = e;
      fb = fe;
    }
  }
  return best;
}

/// Dense scan then golden refinement around the best sample; for functions
/// that are only piecewise unimodal.
inline double scan_golden(const std::function<double(double)>& f, double lo, double hi, int samples = 400) {
  int best = 0;
  double fb = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double x = lo + (hi - lo) * i / samples;
    const double v = f(x);
    if (v < fb) {
      fb = v;
      best = i;
    }
  }
  const double l = lo + (hi - lo) * std::max(0, best - 1) / samples;
  const double h = lo + (hi - lo) * std::min(samples, best + 1) / samples;
  return golden(f, l, h);
}

struct Player {
  double volume = 0.0;
  /// The two links this player may use; x is the flow on first.
  int first = 0;
  int second = 1;
  bool atomic = true;
};

struct Game {
  std::vector<Link> links;
  std::vector<Player> players;

  std::vector<double> loads(const std::vector<double>& x) const {
    std::vector<double> l(links.size(), 0.0);
    for (std::size_t i = 0; i < players.size(); ++i) {
      l[players[i].first] += x[i];
      l[players[i].second] += players[i].volume - x[i];
    }
    return l;
  }

  double cost(const std::vector<double>& x, std::size_t i) const {
    const auto l = loads(x);
    const Player& p = players[i];
    return x[i] * lat(links[p.first], l[p.first]) + (p.volume - x[i]) * lat(links[p.second], l[p.second]);
  }

  double social(const std::vector<double>& x) const {
    const auto l = loads(x);
    double c = 0.0;
    for (std::size_t j = 0; j < links.size(); ++j) c += l[j] * lat(links[j], l[j]);
    return c;
  }

  /// Player i's reply to the others in x.
  double reply(std::vector<double> x, std::size_t i) const {
    const Player& p = players[i];
    // Atomic players equalize marginal cost, infinitesimal users latency; both
    // gaps are increasing in x, so bisect.
    auto gap = [&](double t) {
      x[i] = t;
      const auto l = loads(x);
      double g = lat(links[p.first], l[p.first]) - lat(links[p.second], l[p.second]);
      if (p.atomic) g += t * slope(links[p.first], l[p.first]) - (p.volume - t) * slope(links[p.second], l[p.second]);
      return g;
    };
    if (gap(0.0) >= 0.0) return 0.0;
    if (gap(p.volume) <= 0.0) return p.volume;
    double lo = 0.0, hi = p.volume;
    for (int k = 0; k < 200; ++k) {
      const double m = 0.5 * (lo + hi);
      (gap(m) < 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  }

  /// Gauss-Seidel on exact replies.
  std::vector<double> equilibrium(std::vector<double> x = {}) const {
    if (x.empty())
      for (const auto& p : players) x.push_back(0.5 * p.volume);
    for (int it = 0; it < 100000; ++it) {
      double move = 0.0;
      for (std::size_t i = 0; i < players.size(); ++i) {
        const double r = reply(x, i);
        move = std::max(move, std::abs(r - x[i]));
        x[i] = r;
      }
      if (move < 1e-14 * std::max(1.0, players[0].volume)) break;
    }
    return x;
  }

  /// Two-player social optimum by nested golden search.
  std::vector<double> optimum() const {
    std::vector<double> x(2);
    auto inner = [&](double t0) {
      x[0] = t0;
      x[1] = golden(
          [&](double t1) {
            std::vector<double> y{t0, t1};
            return social(y);
          },
          0.0, players[1].volume);
      return social(x);
    };
    const double t0 = golden(inner, 0.0, players[0].volume);
    inner(t0);
    return x;
  }

  struct Lead {
    double leader_x = 0.0;
    double follower_x = 0.0;
    double leader_cost = 0.0;
    double follower_cost = 0.0;
    double social = 0.0;
  };

  /// Two-player leadership by scanning the leader's one-dimensional choice.
  Lead leadership(std::size_t leader, int samples = 2000) const {
    const std::size_t follower = 1 - leader;
    auto outcome = [&](double t) {
      std::vector<double> x(2, 0.0);
      x[leader] = t;
      x[follower] = reply(x, follower);
      return x;
    };
    const double t = scan_golden([&](double s) { return cost(outcome(s), leader); }, 0.0, players[leader].volume, samples);
    const auto x = outcome(t);
    return Lead{x[leader], x[follower], cost(x, leader), cost(x, follower), social(x)};
  }
};

/// Affine fill by support enumeration: marginal k_j x + c_j, k_j > 0.
/// Returns the allocation minimizing sum_j (k_j x_j^2 / 2 + c_j x_j).
inline std::vector<double> enumerate_fill(const std::vector<double>& k, const std::vector<double>& c, double volume) {
  const std::size_t n = k.size();
  std::vector<double> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double inv = 0.0, w = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (mask >> j & 1) {
        inv += 1.0 / k[j];
        w += c[j] / k[j];
      }
    const double lambda = (volume + w) / inv;
    std::vector<double> x(n, 0.0);
    bool ok = true;
    for (std::size_t j = 0; j < n; ++j)
      if (mask >> j & 1) {
        x[j] = (lambda - c[j]) / k[j];
        if (x[j] < -1e-12) ok = false;
      }
    if (!ok) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += 0.5 * k[j] * x[j] * x[j] + c[j] * x[j];
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

/// Convex QP by enumerating which inequality rows hold with equality.
inline Eigen::VectorXd enumerate_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const Eigen::MatrixXd& Aeq,
                                    const Eigen::VectorXd& beq, const Eigen::MatrixXd& Ain, const Eigen::VectorXd& bin,
                                    bool* feasible = nullptr) {
  const int n = static_cast<int>(G.rows()), m = static_cast<int>(Ain.rows()), p = static_cast<int>(Aeq.rows());
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> rows;
    for (int r = 0; r < m; ++r)
      if (mask >> r & 1) rows.push_back(r);
    const int q = p + static_cast<int>(rows.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + q, n + q);
    Eigen::VectorXd rhs(n + q);
    K.topLeftCorner(n, n) = G;
    rhs.head(n) = -g;
    for (int e = 0; e < p; ++e) {
      K.block(n + e, 0, 1, n) = Aeq.row(e);
      K.block(0, n + e, n, 1) = Aeq.row(e).transpose();
      rhs(n + e) = beq(e);
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
      K.block(n + p + t, 0, 1, n) = Ain.row(rows[t]);
      K.block(0, n + p + t, n, 1) = Ain.row(rows[t]).transpose();
      rhs(n + p + t) = bin(rows[t]);
    }
    const Eigen::VectorXd s = K.fullPivLu().solve(rhs);
    if ((K * s - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
    const Eigen::VectorXd x = s.head(n);
    if (m > 0 && ((Ain * x - bin).array() < -1e-9).any()) continue;
    if (p > 0 && (Aeq * x - beq).cwiseAbs().maxCoeff() > 1e-9) continue;
    const double obj = 0.5 * x.dot(G * x) + g.dot(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  if (feasible) *feasible = best.size() > 0;
  return best;
}

inline double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace oracle
