#pragma once

#include <Eigen/Dense>

#include "coop/qp.hpp"

namespace coop {

/// Output and contact dynamics affine in (tau, f), as produced by an
/// input-output linearization of a full-order model:
///   y_ddot = Phi_tau tau + Phi_f f + phi,   Theta_tau tau + Theta_f f + theta = 0.
struct IoLinData {
  Eigen::MatrixXd Phi_tau;    // n_y x n_tau
  Eigen::MatrixXd Phi_f;      // n_y x 3c
  Eigen::VectorXd phi;        // n_y
  Eigen::MatrixXd Theta_tau;  // 3c x n_tau
  Eigen::MatrixXd Theta_f;    // 3c x 3c
  Eigen::VectorXd theta;      // 3c
  Eigen::VectorXd y;
  Eigen::VectorXd y_dot;
  Eigen::VectorXd kp;         // diagonal gains
  Eigen::VectorXd kd;
  Eigen::VectorXd f_des;      // 3c
  double tau_max = 33.5;      // N m
  double friction = 0.6;
  double fz_min = 0.0;        // N

  int n_tau() const { return static_cast<int>(Phi_tau.cols()); }
  int n_f() const { return static_cast<int>(Phi_f.cols()); }
  int n_y() const { return static_cast<int>(phi.size()); }
};

struct WbcWeights {
  double gamma_tau = 1e2;
  double gamma_force = 1e4;
  double gamma_slack = 1e6;
};

struct WbcSolution {
  Eigen::VectorXd tau;
  Eigen::VectorXd f;
  Eigen::VectorXd delta;  // output-dynamics slack
  QpStatus status = QpStatus::MaxIter;
  double solve_time = 0.0;  // s
};

/// Decision vector (tau, f, delta). Throws std::invalid_argument on inconsistent sizes.
QpProblem build_wbc_qp(const IoLinData& d, const WbcWeights& w);

WbcSolution solve_wbc(const IoLinData& d, const WbcWeights& w = {});

}  // namespace coop
