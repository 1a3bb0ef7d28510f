#include "coop/qp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

namespace coop {

using Eigen::VectorXd;

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::MaxIter: return "max_iter";
    case QpStatus::Infeasible: return "infeasible";
  }
  return "?";
}

QpProblem QpProblem::from_dense(const Eigen::MatrixXd& H, const VectorXd& g,
                                const Eigen::MatrixXd& A_eq, const VectorXd& b_eq,
                                const Eigen::MatrixXd& A_in, const VectorXd& b_in) {
  QpProblem p;
  p.H = H.sparseView();
  p.g = g;
  p.A_eq.resize(b_eq.size(), g.size());
  if (A_eq.size() > 0) p.A_eq = A_eq.sparseView();
  p.b_eq = b_eq;
  p.A_in.resize(b_in.size(), g.size());
  if (A_in.size() > 0) p.A_in = A_in.sparseView();
  p.b_in = b_in;
  return p;
}

KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& s) {
  const SparseMat H = p.H.selfadjointView<Eigen::Lower>();
  KktResiduals r;
  if (p.num_eq() > 0) r.primal_eq = (p.A_eq * s.z - p.b_eq).cwiseAbs().maxCoeff();
  VectorXd stat = H * s.z + p.g;
  if (p.num_eq() > 0) stat += p.A_eq.transpose() * s.eq_duals;
  if (p.num_in() > 0) {
    const VectorXd slack = p.b_in - p.A_in * s.z;
    r.primal_in = std::max(0.0, (-slack).maxCoeff());
    r.complementarity = (slack.cwiseProduct(s.ineq_duals)).cwiseAbs().maxCoeff();
    r.dual_sign = std::max(0.0, (-s.ineq_duals).maxCoeff());
    stat += p.A_in.transpose() * s.ineq_duals;
  }
  r.stationarity = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

namespace {

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

SparseMat select_rows(const SparseMat& A, const std::vector<int>& rows) {
  std::vector<int> map(A.rows(), -1);
  for (size_t k = 0; k < rows.size(); ++k) map[rows[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SparseMat::InnerIterator it(A, c); it; ++it) {
      if (map[it.row()] >= 0) t.emplace_back(map[it.row()], c, it.value());
    }
  }
  SparseMat out(static_cast<int>(rows.size()), A.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

VectorXd row_inf_norms(const SparseMat& A) {
  VectorXd r = VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SparseMat::InnerIterator it(A, c); it; ++it) {
      r(it.row()) = std::max(r(it.row()), std::abs(it.value()));
    }
  }
  return r;
}

VectorXd col_inf_norms(const SparseMat& A) {
  VectorXd r = VectorXd::Zero(A.cols());
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SparseMat::InnerIterator it(A, c); it; ++it) {
      r(c) = std::max(r(c), std::abs(it.value()));
    }
  }
  return r;
}

VectorXd safe_inv_sqrt(const VectorXd& v) {
  VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = v(i) > 1e-12 ? 1.0 / std::sqrt(v(i)) : 1.0;
  return out;
}

// Largest step in (0, 1] keeping v + a dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double a = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

// Reduced KKT  [H + ridge + Ai' D Ai, Ae'; Ae, 0]  with a cached sparsity
// pattern; the factorized matrix additionally carries +/- static_reg.
class KktSystem {
 public:
  KktSystem(const SparseMat& H_lower, const SparseMat& Ae, const SparseMat& Ai, double ridge,
            double reg)
      : n_(static_cast<int>(H_lower.cols())),
        p_(static_cast<int>(Ae.rows())),
        ridge_(ridge),
        reg_(reg),
        H_(H_lower),
        Ae_(Ae),
        Ai_(Ai) {
    const int dim = n_ + p_;
    std::vector<Eigen::Triplet<double>> t;
    for (int c = 0; c < H_.outerSize(); ++c) {
      for (SparseMat::InnerIterator it(H_, c); it; ++it) t.emplace_back(it.row(), c, 0.0);
    }
    for (int i = 0; i < dim; ++i) t.emplace_back(i, i, 0.0);
    for (int c = 0; c < Ae_.outerSize(); ++c) {
      for (SparseMat::InnerIterator it(Ae_, c); it; ++it) t.emplace_back(n_ + it.row(), c, 0.0);
    }
    const Eigen::SparseMatrix<double, Eigen::RowMajor, int> Air = Ai_;
    for (int r = 0; r < Air.outerSize(); ++r) {
      for (decltype(Air)::InnerIterator a(Air, r); a; ++a) {
        for (decltype(Air)::InnerIterator b(Air, r); b; ++b) {
          if (a.col() >= b.col()) t.emplace_back(a.col(), b.col(), 0.0);
        }
      }
    }
    K_.resize(dim, dim);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();
    base_.assign(K_.nonZeros(), 0.0);

    for (int c = 0; c < H_.outerSize(); ++c) {
      for (SparseMat::InnerIterator it(H_, c); it; ++it) base_[index(it.row(), c)] += it.value();
    }
    for (int i = 0; i < n_; ++i) base_[index(i, i)] += ridge_ + reg_;
    for (int i = 0; i < p_; ++i) base_[index(n_ + i, n_ + i)] -= reg_;
    for (int c = 0; c < Ae_.outerSize(); ++c) {
      for (SparseMat::InnerIterator it(Ae_, c); it; ++it) {
        base_[index(n_ + it.row(), c)] += it.value();
      }
    }
    for (int r = 0; r < Air.outerSize(); ++r) {
      for (decltype(Air)::InnerIterator a(Air, r); a; ++a) {
        for (decltype(Air)::InnerIterator b(Air, r); b; ++b) {
          if (a.col() >= b.col()) {
            contrib_.push_back({index(a.col(), b.col()), r, a.value() * b.value()});
          }
        }
      }
    }
    ldlt_.analyzePattern(K_);
  }

  bool factorize(const VectorXd& D) {
    D_ = D;
    double* vals = K_.valuePtr();
    std::copy(base_.begin(), base_.end(), vals);
    for (const auto& c : contrib_) vals[c.idx] += D(c.row) * c.coef;
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  // Solves the unregularized system with iterative refinement.
  void solve(const VectorXd& rhs, int refine_steps, VectorXd& sol) const {
    sol = ldlt_.solve(rhs);
    for (int k = 0; k < refine_steps; ++k) {
      const VectorXd res = rhs - apply(sol);
      if (inf_norm(res) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
      sol += ldlt_.solve(res);
    }
  }

 private:
  struct Contribution {
    int idx;
    int row;
    double coef;
  };

  int index(int row, int col) const {
    const int* inner = K_.innerIndexPtr();
    const int begin = K_.outerIndexPtr()[col];
    const int end = K_.outerIndexPtr()[col + 1];
    const int* pos = std::lower_bound(inner + begin, inner + end, row);
    return static_cast<int>(pos - inner);
  }

  VectorXd apply(const VectorXd& x) const {
    const auto dz = x.head(n_);
    const auto dy = x.tail(p_);
    VectorXd out(n_ + p_);
    out.head(n_) = H_.selfadjointView<Eigen::Lower>() * dz + ridge_ * dz +
                   Ai_.transpose() * D_.cwiseProduct(Ai_ * dz) + Ae_.transpose() * dy;
    out.tail(p_) = Ae_ * dz;
    return out;
  }

  int n_;
  int p_;
  double ridge_;
  double reg_;
  SparseMat H_;
  SparseMat Ae_;
  SparseMat Ai_;
  SparseMat K_;
  std::vector<double> base_;
  std::vector<Contribution> contrib_;
  VectorXd D_;
  Eigen::SimplicialLDLT<SparseMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

}  // namespace

QpSolution solve_qp(const QpProblem& prob, const QpSettings& st, const VectorXd* warm_start) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = prob.num_vars();
  if (prob.H.rows() != n || prob.H.cols() != n || prob.A_eq.cols() != n ||
      prob.A_eq.rows() != prob.num_eq() || prob.A_in.cols() != n ||
      prob.A_in.rows() != prob.num_in()) {
    throw std::invalid_argument("solve_qp: inconsistent problem dimensions");
  }

  QpSolution sol;
  sol.z = VectorXd::Zero(n);
  sol.eq_duals = VectorXd::Zero(prob.num_eq());
  sol.ineq_duals = VectorXd::Zero(prob.num_in());
  auto finish = [&](QpStatus status) {
    sol.status = status;
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  };

  // Presolve: drop empty rows after checking their consistency.
  std::vector<int> eq_rows, in_rows;
  {
    const VectorXd en = row_inf_norms(prob.A_eq);
    for (int r = 0; r < prob.num_eq(); ++r) {
      if (en(r) > 0.0) {
        eq_rows.push_back(r);
      } else if (std::abs(prob.b_eq(r)) > 1e-9) {
        return finish(QpStatus::Infeasible);
      }
    }
    const VectorXd in = row_inf_norms(prob.A_in);
    for (int r = 0; r < prob.num_in(); ++r) {
      if (in(r) > 0.0) {
        in_rows.push_back(r);
      } else if (prob.b_in(r) < -1e-9) {
        return finish(QpStatus::Infeasible);
      }
    }
  }
  const int p = static_cast<int>(eq_rows.size());
  const int q = static_cast<int>(in_rows.size());

  SparseMat H = prob.H.triangularView<Eigen::Lower>();
  SparseMat Ae = select_rows(prob.A_eq, eq_rows);
  SparseMat Ai = select_rows(prob.A_in, in_rows);
  VectorXd g = prob.g;
  VectorXd be(p), bi(q);
  for (int k = 0; k < p; ++k) be(k) = prob.b_eq(eq_rows[k]);
  for (int k = 0; k < q; ++k) bi(k) = prob.b_in(in_rows[k]);

  // Ruiz equilibration of [H A'; A 0] followed by cost scaling.
  VectorXd Dv = VectorXd::Ones(n), Ee = VectorXd::Ones(p), Ei = VectorXd::Ones(q);
  for (int it = 0; it < st.ruiz_iters; ++it) {
    const SparseMat Hf = H.selfadjointView<Eigen::Lower>();
    VectorXd cn = col_inf_norms(Hf).cwiseMax(col_inf_norms(Ae)).cwiseMax(col_inf_norms(Ai));
    const VectorXd dv = safe_inv_sqrt(cn);
    const VectorXd de = safe_inv_sqrt(row_inf_norms(Ae));
    const VectorXd di = safe_inv_sqrt(row_inf_norms(Ai));
    H = dv.asDiagonal() * H * dv.asDiagonal();
    Ae = de.asDiagonal() * Ae * dv.asDiagonal();
    Ai = di.asDiagonal() * Ai * dv.asDiagonal();
    Dv = Dv.cwiseProduct(dv);
    Ee = Ee.cwiseProduct(de);
    Ei = Ei.cwiseProduct(di);
    if ((cn.array() - 1.0).abs().maxCoeff() < 1e-3) break;
  }
  g = Dv.cwiseProduct(g);
  be = Ee.cwiseProduct(be);
  bi = Ei.cwiseProduct(bi);
  double cost_scale = 1.0;
  {
    const SparseMat Hf = H.selfadjointView<Eigen::Lower>();
    const VectorXd hn = col_inf_norms(Hf);
    const double m = std::max(n ? hn.mean() : 0.0, inf_norm(g));
    if (m > 1e-12) cost_scale = std::clamp(1.0 / m, 1e-8, 1e8);
    H *= cost_scale;
    g *= cost_scale;
  }
  const SparseMat Hf = H.selfadjointView<Eigen::Lower>();

  KktSystem kkt(H, Ae, Ai, st.ridge, st.static_reg);
  VectorXd z(n), y(p), mu(q), s(q), sol_vec;

  // Initial point: least-squares fit to the inequalities, then shift into the interior.
  {
    if (!kkt.factorize(VectorXd::Ones(q))) return finish(QpStatus::Infeasible);
    VectorXd rhs(n + p);
    rhs.head(n) = -g + Ai.transpose() * bi;
    rhs.tail(p) = be;
    kkt.solve(rhs, st.refine_steps, sol_vec);
    z = sol_vec.head(n);
    y = sol_vec.tail(p);
    if (warm_start && warm_start->size() == n) z = Dv.cwiseInverse().cwiseProduct(*warm_start);
    const VectorXd w = Ai * z - bi;
    s = -w;
    mu = w;
    if (q > 0) {
      const double ap = -s.minCoeff();
      if (ap >= -1e-8) s.array() += 1.0 + ap;
      const double ad = -mu.minCoeff();
      if (ad >= -1e-8) mu.array() += 1.0 + ad;
    }
  }

  int short_steps = 0;
  QpStatus status = QpStatus::MaxIter;
  int iter = 0;
  for (; iter <= st.max_iter; ++iter) {
    const VectorXd Hz = Hf * z;
    const VectorXd Aey = Ae.transpose() * y;
    const VectorXd Aimu = Ai.transpose() * mu;
    const VectorXd Aez = Ae * z;
    const VectorXd Aiz = Ai * z;
    const VectorXd rd = Hz + st.ridge * z + g + Aey + Aimu;
    const VectorXd re = Aez - be;
    const VectorXd ri = Aiz + s - bi;
    const double gap = q > 0 ? s.dot(mu) / q : 0.0;

    const double rd_n = inf_norm(rd);
    const double re_n = inf_norm(re);
    const double ri_n = inf_norm(ri);
    const bool converged =
        rd_n <= st.tol * (1.0 + std::max({inf_norm(Hz), inf_norm(g), inf_norm(Aey), inf_norm(Aimu)})) &&
        re_n <= st.tol * (1.0 + std::max(inf_norm(Aez), inf_norm(be))) &&
        ri_n <= st.tol * (1.0 + std::max(inf_norm(Aiz), inf_norm(bi))) && gap <= st.tol;
    if (converged) {
      status = QpStatus::Optimal;
      break;
    }
    const double dual_mag = std::max(inf_norm(y), inf_norm(mu));
    if (!std::isfinite(dual_mag) || dual_mag > 1e12 || short_steps >= 5) {
      status = QpStatus::Infeasible;
      break;
    }
    if (iter == st.max_iter) break;

    const VectorXd D = mu.cwiseQuotient(s);
    if (!kkt.factorize(D)) {
      status = QpStatus::Infeasible;
      break;
    }
    VectorXd rhs(n + p);
    rhs.tail(p) = -re;

    // Predictor.
    rhs.head(n) = -rd + Ai.transpose() * (mu - D.cwiseProduct(ri));
    kkt.solve(rhs, st.refine_steps, sol_vec);
    VectorXd dz = sol_vec.head(n);
    VectorXd dy = sol_vec.tail(p);
    VectorXd ds = -ri - Ai * dz;
    VectorXd dmu = -mu - D.cwiseProduct(ds);
    if (q > 0) {
      const double a_aff = std::min(max_step(s, ds), max_step(mu, dmu));
      const double gap_aff = (s + a_aff * ds).dot(mu + a_aff * dmu) / q;
      const double sigma = std::pow(gap_aff / gap, 3);

      // Corrector.
      const VectorXd rc = s.cwiseProduct(mu) + ds.cwiseProduct(dmu) -
                          VectorXd::Constant(q, sigma * gap);
      rhs.head(n) = -rd + Ai.transpose() * (rc - mu.cwiseProduct(ri)).cwiseQuotient(s);
      kkt.solve(rhs, st.refine_steps, sol_vec);
      dz = sol_vec.head(n);
      dy = sol_vec.tail(p);
      ds = -ri - Ai * dz;
      dmu = (-rc - mu.cwiseProduct(ds)).cwiseQuotient(s);
    }
    const double alpha =
        q > 0 ? std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(mu, dmu))) : 1.0;
    short_steps = alpha < 1e-8 ? short_steps + 1 : 0;
    z += alpha * dz;
    y += alpha * dy;
    s += alpha * ds;
    mu += alpha * dmu;
  }

  const VectorXd z_out = Dv.cwiseProduct(z);
  const VectorXd y_out = Ee.cwiseProduct(y) / cost_scale;
  const VectorXd mu_out = Ei.cwiseProduct(mu) / cost_scale;
  sol.z = z_out;
  for (int k = 0; k < p; ++k) sol.eq_duals(eq_rows[k]) = y_out(k);
  for (int k = 0; k < q; ++k) sol.ineq_duals(in_rows[k]) = mu_out(k);
  sol.iterations = iter;
  return finish(status);
}

}  // namespace coop
