#pragma once

#include <optional>

#include <Eigen/Dense>

namespace lpvmpc {

enum class QpStatus { solved, max_iterations, infeasible };

const char* to_string(QpStatus status);

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 4000;
  double rho = 0.1;          ///< initial step-size; adapted during the solve
  double sigma = 1e-6;       ///< proximal regularization
  double alpha = 1.6;        ///< over-relaxation
  int check_interval = 25;   ///< residual/certificate check cadence
  bool adaptive_rho = true;
  bool polish = true;
};

struct QpSolution {
  Eigen::VectorXd z;              ///< primal solution
  Eigen::VectorXd y;              ///< dual multipliers, one per constraint row
  QpStatus status = QpStatus::max_iterations;
  int iterations = 0;
  double primal_residual = 0.0;   ///< max constraint violation
  double dual_residual = 0.0;     ///< || H z + g + A' y ||_inf
  double objective = 0.0;         ///< 1/2 z' H z + g' z
  bool polished = false;
};

struct QpWarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd y; ///< may be empty
};

/// Dense convex QP solver for
///   minimize 1/2 z' H z + g' z   subject to   lb <= A z <= ub,
/// using operator splitting (ADMM with over-relaxation and per-row step
/// sizes) followed by an active-set polish that drives the KKT residuals to
/// the requested tolerance. Bounds may be +-infinity. Deterministic for
/// identical inputs and settings. One instance per thread.
class QpSolver {
 public:
  explicit QpSolver(QpSettings settings = {});

  /// Throws std::invalid_argument on dimension mismatch, lb > ub, asymmetric
  /// or indefinite H.
  QpSolution solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                   const Eigen::MatrixXd& a, const Eigen::VectorXd& lb,
                   const Eigen::VectorXd& ub,
                   const std::optional<QpWarmStart>& warm = std::nullopt);

  const QpSettings& settings() const { return settings_; }

 private:
  QpSettings settings_;
};

}  // namespace lpvmpc
