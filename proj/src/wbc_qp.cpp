#include "coop/wbc_qp.hpp"

#include <stdexcept>
#include <vector>

#include "coop/mpc_common.hpp"

namespace coop {

QpProblem build_wbc_qp(const IoLinData& d, const WbcWeights& w) {
  const int nt = d.n_tau();
  const int nf = d.n_f();
  const int ny = d.n_y();
  if (d.Phi_tau.rows() != ny || d.Phi_f.rows() != ny || nf % 3 != 0 ||
      d.Theta_tau.rows() != nf || d.Theta_tau.cols() != nt || d.Theta_f.rows() != nf ||
      d.Theta_f.cols() != nf || d.theta.size() != nf || d.y.size() != ny ||
      d.y_dot.size() != ny || d.kp.size() != ny || d.kd.size() != ny || d.f_des.size() != nf) {
    throw std::invalid_argument("build_wbc_qp: dimension mismatch");
  }
  const int n = nt + nf + ny;
  Eigen::VectorXd hdiag(n);
  hdiag << Eigen::VectorXd::Constant(nt, w.gamma_tau), Eigen::VectorXd::Constant(nf, w.gamma_force),
      Eigen::VectorXd::Constant(ny, w.gamma_slack);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  g.segment(nt, nf) = -w.gamma_force * d.f_des;

  // Phi_tau tau + Phi_f f - delta = -Kp y - Kd y_dot - phi; contact rows follow.
  Eigen::MatrixXd Aeq = Eigen::MatrixXd::Zero(ny + nf, n);
  Eigen::VectorXd beq(ny + nf);
  Aeq.block(0, 0, ny, nt) = d.Phi_tau;
  Aeq.block(0, nt, ny, nf) = d.Phi_f;
  Aeq.block(0, nt + nf, ny, ny) = -Eigen::MatrixXd::Identity(ny, ny);
  beq.head(ny) = -d.kp.cwiseProduct(d.y) - d.kd.cwiseProduct(d.y_dot) - d.phi;
  Aeq.block(ny, 0, nf, nt) = d.Theta_tau;
  Aeq.block(ny, nt, nf, nf) = d.Theta_f;
  beq.tail(nf) = -d.theta;

  std::vector<Eigen::Triplet<double>> it;
  std::vector<double> ib;
  int row = 0;
  for (int k = 0; k < nt; ++k) {
    it.emplace_back(row++, k, 1.0);
    ib.push_back(d.tau_max);
    it.emplace_back(row++, k, -1.0);
    ib.push_back(d.tau_max);
  }
  for (int c = 0; c < nf / 3; ++c) append_friction_cone(it, ib, row, nt + 3 * c, d.friction, d.fz_min);

  QpProblem p;
  p.H = SparseMat(hdiag.asDiagonal().toDenseMatrix().sparseView());
  p.g = g;
  p.A_eq = Aeq.sparseView();
  p.b_eq = beq;
  p.A_in.resize(row, n);
  p.A_in.setFromTriplets(it.begin(), it.end());
  p.b_in = Eigen::Map<Eigen::VectorXd>(ib.data(), static_cast<int>(ib.size()));
  return p;
}

WbcSolution solve_wbc(const IoLinData& d, const WbcWeights& w) {
  const QpSolution s = solve_qp(build_wbc_qp(d, w));
  WbcSolution out;
  out.tau = s.z.head(d.n_tau());
  out.f = s.z.segment(d.n_tau(), d.n_f());
  out.delta = s.z.tail(d.n_y());
  out.status = s.status;
  out.solve_time = s.solve_time;
  return out;
}

}  // namespace coop
