#include "lpvmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lpvmpc {

namespace {

constexpr double kEpsInfeasible = 1e-4;  // normalized certificate tolerance
constexpr double kRhoEq = 1e3;           // step-size boost for equality rows
constexpr double kRhoLoose = 1e-6;       // step-size damping for (-inf, inf) rows

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Max violation of lb <= w <= ub.
double bound_violation(const Eigen::VectorXd& w, const Eigen::VectorXd& lb,
                       const Eigen::VectorXd& ub) {
  double viol = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    viol = std::max(viol, lb(i) - w(i));
    viol = std::max(viol, w(i) - ub(i));
  }
  return std::max(viol, 0.0);
}

struct PolishResult {
  bool accepted = false;
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

PolishResult polish(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                    const Eigen::MatrixXd& a, const Eigen::VectorXd& lb,
                    const Eigen::VectorXd& ub, const Eigen::VectorXd& ax,
                    const Eigen::VectorXd& y, double tol) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = a.rows();

  std::vector<Eigen::Index> active;
  std::vector<int> at_upper;
  const double act_tol = 10.0 * tol;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool low = std::isfinite(lb(i)) && (y(i) < -1e-12 || ax(i) - lb(i) <= act_tol);
    const bool up = std::isfinite(ub(i)) && (y(i) > 1e-12 || ub(i) - ax(i) <= act_tol);
    if (lb(i) == ub(i)) {
      active.push_back(i);
      at_upper.push_back(0);
    } else if (up && !low) {
      active.push_back(i);
      at_upper.push_back(1);
    } else if (low && !up) {
      active.push_back(i);
      at_upper.push_back(-1);
    } else if (low && up) {
      // Ambiguous: pin to the nearer bound.
      active.push_back(i);
      at_upper.push_back(ub(i) - ax(i) < ax(i) - lb(i) ? 1 : -1);
    }
  }
  const auto na = static_cast<Eigen::Index>(active.size());

  // KKT system with light regularization, then iterative refinement.
  const double delta = 1e-9;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
  kkt.topLeftCorner(n, n) = h + delta * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n + na);
  rhs.head(n) = -g;
  for (Eigen::Index j = 0; j < na; ++j) {
    const Eigen::Index i = active[static_cast<std::size_t>(j)];
    kkt.block(n + j, 0, 1, n) = a.row(i);
    kkt.block(0, n + j, n, 1) = a.row(i).transpose();
    kkt(n + j, n + j) = -delta;
    rhs(n + j) = at_upper[static_cast<std::size_t>(j)] >= 0 ? ub(i) : lb(i);
    if (lb(i) == ub(i)) {
      rhs(n + j) = lb(i);
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(kkt);
  PolishResult res;
  if (ldlt.info() != Eigen::Success) {
    return res;
  }
  Eigen::VectorXd sol = ldlt.solve(rhs);
  for (int refine = 0; refine < 3; ++refine) {
    // Residual of the unregularized KKT system: undo the +/- delta shifts.
    Eigen::VectorXd resid = rhs - kkt * sol;
    resid.head(n) += delta * sol.head(n);
    resid.tail(na) -= delta * sol.tail(na);
    sol += ldlt.solve(resid);
  }

  res.z = sol.head(n);
  res.y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j < na; ++j) {
    res.y(active[static_cast<std::size_t>(j)]) = sol(n + j);
  }

  // Multiplier signs: <= 0 on lower-active rows, >= 0 on upper-active rows.
  for (Eigen::Index j = 0; j < na; ++j) {
    const Eigen::Index i = active[static_cast<std::size_t>(j)];
    if (lb(i) == ub(i)) {
      continue;
    }
    const double yi = res.y(i);
    if ((at_upper[static_cast<std::size_t>(j)] > 0 && yi < -tol) ||
        (at_upper[static_cast<std::size_t>(j)] < 0 && yi > tol)) {
      return res;
    }
  }

  res.primal_residual = bound_violation(a * res.z, lb, ub);
  res.dual_residual = inf_norm(h * res.z + g + a.transpose() * res.y);
  res.accepted = res.primal_residual <= tol && res.dual_residual <= tol;
  return res;
}

bool primal_infeasibility_certificate(const Eigen::MatrixXd& a, const Eigen::VectorXd& lb,
                                      const Eigen::VectorXd& ub, const Eigen::VectorXd& dy) {
  const double ndy = inf_norm(dy);
  if (ndy < 1e-12) {
    return false;
  }
  const Eigen::VectorXd v = dy / ndy;
  if (inf_norm(a.transpose() * v) > kEpsInfeasible) {
    return false;
  }
  double support = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double pos = std::max(v(i), 0.0);
    const double neg = std::min(v(i), 0.0);
    if (pos > kEpsInfeasible && !std::isfinite(ub(i))) {
      return false;
    }
    if (neg < -kEpsInfeasible && !std::isfinite(lb(i))) {
      return false;
    }
    if (std::isfinite(ub(i))) {
      support += ub(i) * pos;
    }
    if (std::isfinite(lb(i))) {
      support += lb(i) * neg;
    }
  }
  return support <= -kEpsInfeasible;
}

bool dual_infeasibility_certificate(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                                    const Eigen::MatrixXd& a, const Eigen::VectorXd& lb,
                                    const Eigen::VectorXd& ub, const Eigen::VectorXd& dx) {
  const double ndx = inf_norm(dx);
  if (ndx < 1e-12) {
    return false;
  }
  const Eigen::VectorXd w = dx / ndx;
  if (inf_norm(h * w) > kEpsInfeasible || g.dot(w) > -kEpsInfeasible) {
    return false;
  }
  const Eigen::VectorXd aw = a * w;
  for (Eigen::Index i = 0; i < aw.size(); ++i) {
    if (std::isfinite(ub(i)) && aw(i) > kEpsInfeasible) {
      return false;
    }
    if (std::isfinite(lb(i)) && aw(i) < -kEpsInfeasible) {
      return false;
    }
  }
  return true;
}

}  // namespace

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::solved:
      return "solved";
    case QpStatus::max_iterations:
      return "max_iterations";
    case QpStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

QpSolver::QpSolver(QpSettings settings) : settings_(settings) {}

QpSolution QpSolver::solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                           const Eigen::MatrixXd& a, const Eigen::VectorXd& lb,
                           const Eigen::VectorXd& ub, const std::optional<QpWarmStart>& warm) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = a.rows();
  if (h.cols() != n || g.size() != n || (m > 0 && a.cols() != n) || lb.size() != m ||
      ub.size() != m) {
    throw std::invalid_argument("qp: inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isnan(lb(i)) || std::isnan(ub(i)) || lb(i) > ub(i)) {
      throw std::invalid_argument("qp: bounds must satisfy lb <= ub");
    }
  }
  const double h_scale = std::max(1.0, h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0);
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-9 * h_scale) {
    throw std::invalid_argument("qp: H must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-8 * h_scale) {
    throw std::invalid_argument("qp: H is not positive semidefinite");
  }
  Eigen::MatrixXd h_reg = h;
  if (min_eig < 1e-10) {
    h_reg += 1e-9 * Eigen::MatrixXd::Identity(n, n);
  }

  const double tol = settings_.tol;
  QpSolution sol;

  if (m == 0) {
    sol.z = Eigen::LDLT<Eigen::MatrixXd>(h_reg).solve(-g);
    sol.y.resize(0);
    sol.status = QpStatus::solved;
    sol.iterations = 0;
    sol.primal_residual = 0.0;
    sol.dual_residual = inf_norm(h * sol.z + g);
    sol.objective = 0.5 * sol.z.dot(h * sol.z) + g.dot(sol.z);
    return sol;
  }

  // Per-row step sizes.
  double rho_base = settings_.rho;
  auto make_rho = [&](double base) {
    Eigen::VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!std::isfinite(lb(i)) && !std::isfinite(ub(i))) {
        r(i) = base * kRhoLoose;
      } else if (lb(i) == ub(i)) {
        r(i) = base * kRhoEq;
      } else {
        r(i) = base;
      }
    }
    return r;
  };
  Eigen::VectorXd rho = make_rho(rho_base);

  auto factor = [&](const Eigen::VectorXd& rho_vec) {
    return Eigen::LDLT<Eigen::MatrixXd>(
        h_reg + settings_.sigma * Eigen::MatrixXd::Identity(n, n) +
        a.transpose() * rho_vec.asDiagonal() * a);
  };
  Eigen::LDLT<Eigen::MatrixXd> ldlt = factor(rho);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  if (warm && warm->z.size() == n) {
    x = warm->z;
    if (warm->y.size() == m) {
      y = warm->y;
    }
  }
  Eigen::VectorXd z_slack = (a * x).cwiseMax(lb).cwiseMin(ub);

  Eigen::VectorXd x_prev_check = x;
  Eigen::VectorXd y_prev_check = y;
  int polish_failures = 0;

  const double alpha = settings_.alpha;
  int iter = 0;
  while (iter < settings_.max_iter) {
    ++iter;
    const Eigen::VectorXd rhs =
        settings_.sigma * x - g + a.transpose() * (rho.cwiseProduct(z_slack) - y);
    const Eigen::VectorXd xt = ldlt.solve(rhs);
    const Eigen::VectorXd v = a * xt;
    const Eigen::VectorXd z_tilde = alpha * v + (1.0 - alpha) * z_slack;
    x = alpha * xt + (1.0 - alpha) * x;
    z_slack = (z_tilde + y.cwiseQuotient(rho)).cwiseMax(lb).cwiseMin(ub);
    y += rho.cwiseProduct(z_tilde - z_slack);

    const bool last = iter == settings_.max_iter;
    if (iter % settings_.check_interval != 0 && !last) {
      continue;
    }

    const Eigen::VectorXd ax = a * x;
    const double r_prim = inf_norm(ax - z_slack);
    const Eigen::VectorXd dual_vec = h * x + g + a.transpose() * y;
    const double r_dual = inf_norm(dual_vec);
    sol.primal_residual = bound_violation(ax, lb, ub);
    sol.dual_residual = r_dual;

    const double pscale = std::max({1.0, inf_norm(ax), inf_norm(z_slack)});
    const double dscale =
        std::max({1.0, inf_norm(h * x), inf_norm(a.transpose() * y), inf_norm(g)});
    const bool rel_converged = r_prim <= tol * pscale && r_dual <= tol * dscale;
    const bool abs_converged = sol.primal_residual <= tol && r_dual <= tol;

    if (rel_converged || abs_converged) {
      if (settings_.polish && polish_failures < 3) {
        PolishResult pol = polish(h, g, a, lb, ub, ax, y, tol);
        if (pol.accepted) {
          sol.z = pol.z;
          sol.y = pol.y;
          sol.primal_residual = pol.primal_residual;
          sol.dual_residual = pol.dual_residual;
          sol.status = QpStatus::solved;
          sol.iterations = iter;
          sol.polished = true;
          sol.objective = 0.5 * sol.z.dot(h * sol.z) + g.dot(sol.z);
          return sol;
        }
        ++polish_failures;
      }
      if (abs_converged) {
        sol.z = x;
        sol.y = y;
        sol.status = QpStatus::solved;
        sol.iterations = iter;
        sol.objective = 0.5 * x.dot(h * x) + g.dot(x);
        return sol;
      }
    }

    // Infeasibility certificates from the iterate deltas.
    if (sol.primal_residual > tol &&
        primal_infeasibility_certificate(a, lb, ub, y - y_prev_check)) {
      sol.z = x;
      sol.y = y;
      sol.status = QpStatus::infeasible;
      sol.iterations = iter;
      sol.objective = 0.5 * x.dot(h * x) + g.dot(x);
      return sol;
    }
    if (dual_infeasibility_certificate(h, g, a, lb, ub, x - x_prev_check)) {
      sol.z = x;
      sol.y = y;
      sol.status = QpStatus::infeasible;
      sol.iterations = iter;
      sol.objective = 0.5 * x.dot(h * x) + g.dot(x);
      return sol;
    }
    x_prev_check = x;
    y_prev_check = y;

    if (settings_.adaptive_rho && !last) {
      const double ratio = (r_prim / pscale) / (r_dual / dscale + 1e-30);
      const double candidate = std::clamp(rho_base * std::sqrt(ratio), 1e-6, 1e6);
      if (candidate > 5.0 * rho_base || candidate < rho_base / 5.0) {
        rho_base = candidate;
        rho = make_rho(rho_base);
        ldlt = factor(rho);
      }
    }
  }

  sol.z = x;
  sol.y = y;
  sol.status = QpStatus::max_iterations;
  sol.iterations = iter;
  sol.objective = 0.5 * x.dot(h * x) + g.dot(x);
  return sol;
}

}  // namespace lpvmpc
