#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace coop {

using SparseMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// min 1/2 z'Hz + g'z  s.t.  A_eq z = b_eq,  A_in z <= b_in.
/// Matrices are stored sparse; only the lower triangle of H is read.
struct QpProblem {
  SparseMat H;
  Eigen::VectorXd g;
  SparseMat A_eq;
  Eigen::VectorXd b_eq;
  SparseMat A_in;
  Eigen::VectorXd b_in;

  int num_vars() const { return static_cast<int>(g.size()); }
  int num_eq() const { return static_cast<int>(b_eq.size()); }
  int num_in() const { return static_cast<int>(b_in.size()); }

  static QpProblem from_dense(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                              const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                              const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in);
};

enum class QpStatus { Optimal, MaxIter, Infeasible };

const char* to_string(QpStatus s);

/// Duals follow H z + g + A_eq' eq_duals + A_in' ineq_duals = 0, ineq_duals >= 0.
struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  double solve_time = 0.0;  // s

  bool ok() const { return status == QpStatus::Optimal; }
};

struct QpSettings {
  int max_iter = 100;
  double tol = 1e-9;         // relative KKT tolerance in the scaled problem
  double ridge = 1e-9;       // added to diag(H)
  double static_reg = 1e-9;  // KKT regularization, removed by refinement
  int refine_steps = 1;
  int ruiz_iters = 15;
};

struct KktResiduals {
  double primal_eq = 0.0;   // ||A_eq z - b_eq||_inf
  double primal_in = 0.0;   // max(A_in z - b_in, 0)
  double stationarity = 0.0;
  double complementarity = 0.0;  // max |mu_i (b_in - A_in z)_i|
  double dual_sign = 0.0;        // max(-mu, 0)
};

KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& s);

/// Primal-dual interior point with Mehrotra predictor-corrector on a sparse
/// quasi-definite KKT system. Never throws on infeasible data; reports status.
QpSolution solve_qp(const QpProblem& p, const QpSettings& settings = {},
                    const Eigen::VectorXd* warm_start = nullptr);

}  // namespace coop
