#include "splitflow/qp.hpp"

#include <cmath>
#include <limits>

namespace splitflow::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Working factorization: J = L^{-T} Q, R upper triangular, following
// Goldfarb & Idnani (1983). Column k < q of R belongs to active constraint k.
struct Workspace {
  Eigen::MatrixXd J;
  Eigen::MatrixXd R;
  int n = 0;
  int q = 0;
  double r_norm = 1.0;

  Eigen::VectorXd z_step(const Eigen::VectorXd& d) const {
    return J.rightCols(n - q) * d.tail(n - q);
  }

  Eigen::VectorXd r_step(const Eigen::VectorXd& d) const {
    Eigen::VectorXd r(q);
    for (int i = q - 1; i >= 0; --i) {
      double sum = d(i);
      for (int j = i + 1; j < q; ++j) sum -= R(i, j) * r(j);
      r(i) = sum / R(i, i);
    }
    return r;
  }

  // Appends a constraint with d = J'n; false when it is linearly dependent.
  bool add(Eigen::VectorXd d) {
    for (int j = n - 1; j >= q + 1; --j) {
      double cc = d(j - 1), ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n; ++k) {
        const double t1 = J(k, j - 1), t2 = J(k, j);
        J(k, j - 1) = t1 * cc + t2 * ss;
        J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
      }
    }
    ++q;
    R.col(q - 1).head(q) = d.head(q);
    if (std::abs(d(q - 1)) <= std::numeric_limits<double>::epsilon() * r_norm) return false;
    r_norm = std::max(r_norm, std::abs(d(q - 1)));
    return true;
  }

  // Removes active slot `slot`, shifting later slots left.
  void remove(int slot) {
    for (int i = slot; i < q - 1; ++i) R.col(i) = R.col(i + 1);
    R.col(q - 1).setZero();
    --q;
    for (int j = slot; j < q; ++j) {
      double cc = R(j, j), ss = R(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < q; ++k) {
        const double t1 = R(j, k), t2 = R(j + 1, k);
        R(j, k) = t1 * cc + t2 * ss;
        R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
      }
      for (int k = 0; k < n; ++k) {
        const double t1 = J(k, j), t2 = J(k, j + 1);
        J(k, j) = t1 * cc + t2 * ss;
        J(k, j + 1) = xny * (J(k, j) + t1) - t2;
      }
    }
  }
};

}  // namespace

std::optional<Solution> solve(const Problem& pb) {
  const int n = static_cast<int>(pb.G.rows());
  const int p = static_cast<int>(pb.Aeq.rows());
  const int m = static_cast<int>(pb.Ain.rows());
  const double eps = std::numeric_limits<double>::epsilon();

  Eigen::LLT<Eigen::MatrixXd> llt(pb.G);
  if (llt.info() != Eigen::Success) return std::nullopt;

  Workspace ws;
  ws.n = n;
  ws.J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
  ws.R = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd x = -llt.solve(pb.g);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  // active[k] >= 0 is an inequality row, -1 - e an equality row.
  std::vector<int> active(n + 1, 0);

  double scale = 1.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(pb.bin(i)));
  for (int i = 0; i < p; ++i) scale = std::max(scale, std::abs(pb.beq(i)));
  const double feas_tol = 1e-13 * scale;

  for (int e = 0; e < p; ++e) {
    const Eigen::VectorXd np = pb.Aeq.row(e).transpose();
    const Eigen::VectorXd d = ws.J.transpose() * np;
    const Eigen::VectorXd z = ws.z_step(d);
    const Eigen::VectorXd r = ws.r_step(d);
    double t2 = 0.0;
    const double zn = z.dot(np);
    if (z.squaredNorm() > eps) t2 = (pb.beq(e) - np.dot(x)) / zn;
    x += t2 * z;
    u(ws.q) = t2;
    u.head(ws.q) -= t2 * r;
    active[ws.q] = -1 - e;
    if (!ws.add(d)) return std::nullopt;
  }

  std::vector<bool> in_active(m, false);
  std::vector<bool> excluded(m, false);
  const int max_steps = 50 * (n + m + 10);
  for (int step = 0; step < max_steps; ++step) {
    // Step 1: most violated inequality.
    int ip = -1;
    double worst = -feas_tol;
    for (int i = 0; i < m; ++i) {
      if (in_active[i] || excluded[i]) continue;
      const double s = pb.Ain.row(i).dot(x) - pb.bin(i);
      if (s < worst) {
        worst = s;
        ip = i;
      }
    }
    if (ip < 0) {
      Solution sol;
      sol.x = x;
      sol.objective = 0.5 * x.dot(pb.G * x) + pb.g.dot(x);
      for (int k = p; k < ws.q; ++k) sol.active.push_back(active[k]);
      return sol;
    }
    const Eigen::VectorXd np = pb.Ain.row(ip).transpose();
    u(ws.q) = 0.0;
    const Eigen::VectorXd x_old = x;
    const Eigen::VectorXd u_old = u;
    const std::vector<int> active_old = active;
    const int q_old = ws.q;

    // Step 2: move until ip is satisfied, dropping blocking constraints.
    for (int inner = 0;; ++inner) {
      if (inner > max_steps) return std::nullopt;
      const Eigen::VectorXd d = ws.J.transpose() * np;
      const Eigen::VectorXd z = ws.z_step(d);
      const Eigen::VectorXd r = ws.r_step(d);

      double t1 = kInf;
      int drop = -1;
      for (int k = p; k < ws.q; ++k) {
        if (r(k) > 0.0 && u(k) / r(k) < t1) {
          t1 = u(k) / r(k);
          drop = k;
        }
      }
      const double zn = z.dot(np);
      const double slack = np.dot(x) - pb.bin(ip);
      const double t2 = (z.squaredNorm() > eps && zn > 0.0) ? -slack / zn : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) return std::nullopt;

      if (t2 == kInf) {
        u.head(ws.q) -= t * r;
        u(ws.q) += t;
        in_active[active[drop]] = false;
        for (int i = drop; i < ws.q; ++i) {
          active[i] = active[i + 1];
          u(i) = u(i + 1);
        }
        ws.remove(drop);
        u(ws.q + 1) = 0.0;
        continue;
      }

      x += t * z;
      u.head(ws.q) -= t * r;
      u(ws.q) += t;

      if (t == t2) {
        active[ws.q] = ip;
        if (!ws.add(d)) {
          // Degenerate: restore and never pick ip again.
          excluded[ip] = true;
          x = x_old;
          u = u_old;
          active = active_old;
          ws.q = q_old;
          // Rebuild the factorization for the restored active set.
          ws.J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
          ws.R.setZero();
          ws.r_norm = 1.0;
          std::fill(in_active.begin(), in_active.end(), false);
          const int keep = ws.q;
          ws.q = 0;
          for (int k = 0; k < keep; ++k) {
            const Eigen::VectorXd row = active[k] < 0 ? Eigen::VectorXd(pb.Aeq.row(-1 - active[k]).transpose())
                                                      : Eigen::VectorXd(pb.Ain.row(active[k]).transpose());
            ws.add(ws.J.transpose() * row);
            if (active[k] >= 0) in_active[active[k]] = true;
          }
        } else {
          in_active[ip] = true;
        }
        break;
      }

      // Partial step: drop the blocking constraint and retry.
      in_active[active[drop]] = false;
      for (int i = drop; i < ws.q; ++i) {
        active[i] = active[i + 1];
        u(i) = u(i + 1);
      }
      ws.remove(drop);
      u(ws.q + 1) = 0.0;
    }
  }
  return std::nullopt;
}

}  // namespace splitflow::qp
