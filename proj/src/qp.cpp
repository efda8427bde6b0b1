#include "mrta/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mrta {

double KktResiduals::worst() const {
  return std::max(std::max(stationarity, primal), std::max(dual, complementarity));
}

KktResiduals compute_kkt_residuals(const QpProblem& problem, const VectorXd& z,
                                   const VectorXd& lambda) {
  KktResiduals r;
  const VectorXd stat = problem.Q * z + problem.c + problem.G.transpose() * lambda;
  r.stationarity = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  if (problem.G.rows() > 0) {
    const VectorXd slack = problem.G * z - problem.d;
    r.primal = std::max(0.0, slack.maxCoeff());
    r.dual = std::max(0.0, -lambda.minCoeff());
    r.complementarity = (lambda.array() * slack.array()).abs().maxCoeff();
  }
  return r;
}

namespace {

void check_problem(const QpProblem& p, double symmetry_tol) {
  const int n = p.num_vars();
  if (p.Q.cols() != n || p.c.size() != n)
    throw std::invalid_argument("qp: Q/c dimensions inconsistent");
  if (p.G.rows() != p.d.size() || (p.G.rows() > 0 && p.G.cols() != n))
    throw std::invalid_argument("qp: G/d dimensions inconsistent");
  if (n > 0 && (p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > symmetry_tol)
    throw std::invalid_argument("qp: Q is not symmetric");
}

}  // namespace

// Step restricted to the null space of the working rows. The reduced Hessian
// gets the diagonal shift only if its factorization fails.
VectorXd QpSolver::equality_step(const MatrixXd& Q, const VectorXd& g, const MatrixXd& G,
                                 const std::vector<int>& working) {
  const int n = static_cast<int>(Q.rows());
  const int mw = static_cast<int>(working.size());
  MatrixXd basis;  // columns span the feasible directions
  if (mw == 0) {
    basis = MatrixXd::Identity(n, n);
  } else {
    MatrixXd At(n, mw);
    for (int j = 0; j < mw; ++j) At.col(j) = G.row(working[j]).transpose();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(At);
    const int rank = static_cast<int>(qr.rank());
    if (rank >= n) return VectorXd::Zero(n);
    const MatrixXd q_full = qr.householderQ();
    basis = q_full.rightCols(n - rank);
  }
  MatrixXd reduced = basis.transpose() * Q * basis;
  const VectorXd rhs = -basis.transpose() * g;
  Eigen::LLT<MatrixXd> llt(reduced);
  if (llt.info() != Eigen::Success) {
    reduced.diagonal().array() += settings_.regularization;
    llt.compute(reduced);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("qp: reduced Hessian not positive definite");
  }
  return basis * llt.solve(rhs);
}

VectorXd QpSolver::working_multipliers(const VectorXd& g, const MatrixXd& G,
                                       const std::vector<int>& working) {
  const int n = static_cast<int>(g.size());
  const int mw = static_cast<int>(working.size());
  MatrixXd At(n, mw);
  for (int j = 0; j < mw; ++j) At.col(j) = G.row(working[j]).transpose();
  return At.colPivHouseholderQr().solve(-g);
}

QpSolution QpSolver::active_set_iterate(const MatrixXd& Q, const VectorXd& c,
                                        const MatrixXd& G, const VectorXd& d, VectorXd z,
                                        int max_iter) {
  const int m = static_cast<int>(G.rows());
  std::vector<int> working;
  QpSolution sol;
  sol.lambda = VectorXd::Zero(m);

  for (int iter = 0; iter < max_iter; ++iter) {
    sol.iterations = iter + 1;
    const VectorXd g = Q * z + c;
    const VectorXd p = equality_step(Q, g, G, working);

    if (p.cwiseAbs().maxCoeff() <= settings_.step_tol * (1.0 + z.cwiseAbs().maxCoeff())) {
      VectorXd lam_w = working.empty() ? VectorXd() : working_multipliers(g, G, working);
      int drop = -1;
      double most_negative = -settings_.dual_tol;
      for (size_t j = 0; j < working.size(); ++j) {
        if (lam_w[static_cast<Eigen::Index>(j)] < most_negative) {
          most_negative = lam_w[static_cast<Eigen::Index>(j)];
          drop = static_cast<int>(j);
        }
      }
      if (drop < 0) {
        sol.status = QpStatus::optimal;
        sol.z = z;
        sol.lambda.setZero();
        for (size_t j = 0; j < working.size(); ++j)
          sol.lambda[working[j]] = std::max(0.0, lam_w[static_cast<Eigen::Index>(j)]);
        sol.active_set = working;
        std::sort(sol.active_set.begin(), sol.active_set.end());
        return sol;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    // Ratio test toward the nearest blocking row; smallest index wins ties.
    double step = 1.0;
    int blocking = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) continue;
      const double gp = G.row(i).dot(p);
      if (gp <= settings_.step_tol) continue;
      const double ratio = std::max(0.0, (d[i] - G.row(i).dot(z))) / gp;
      if (ratio < step - 1e-14) {
        step = ratio;
        blocking = i;
      }
    }
    z += step * p;
    if (blocking >= 0) working.push_back(blocking);
  }

  sol.status = QpStatus::max_iter;
  sol.z = z;
  return sol;
}

QpSolution QpSolver::solve(const QpProblem& problem, const std::optional<VectorXd>& warm_start) {
  check_problem(problem, settings_.symmetry_tol);
  const int n = problem.num_vars();
  const int m = problem.num_constraints();
  const int max_iter = settings_.max_iter_factor * (n + m) * (n + m) + 16;

  // Row scaling keeps all feasibility tests on O(1) coefficients.
  MatrixXd G = problem.G;
  VectorXd d = problem.d;
  VectorXd row_scale = VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) {
    const double s = G.row(i).cwiseAbs().maxCoeff();
    if (s > 1.0) {
      row_scale[i] = s;
      G.row(i) /= s;
      d[i] /= s;
    }
  }

  VectorXd z0 = warm_start.value_or(VectorXd::Zero(n));
  if (z0.size() != n) z0 = VectorXd::Zero(n);

  double violation = m > 0 ? std::max(0.0, (G * z0 - d).maxCoeff()) : 0.0;
  if (violation > settings_.feasibility_tol) {
    // Phase 1: minimize the single slack that covers every violated row.
    const double eps = settings_.phase1_anchor;
    MatrixXd Q1 = MatrixXd::Zero(n + 1, n + 1);
    Q1.topLeftCorner(n, n) = eps * MatrixXd::Identity(n, n);
    Q1(n, n) = 1.0;
    VectorXd c1 = VectorXd::Zero(n + 1);
    c1.head(n) = -eps * z0;
    MatrixXd G1 = MatrixXd::Zero(m + 1, n + 1);
    G1.topLeftCorner(m, n) = G;
    G1.col(n).head(m).setConstant(-1.0);
    G1(m, n) = -1.0;  // t >= 0
    VectorXd d1(m + 1);
    d1.head(m) = d;
    d1[m] = 0.0;

    VectorXd y0(n + 1);
    y0.head(n) = z0;
    y0[n] = violation + 1.0;
    QpSolution phase1 = active_set_iterate(Q1, c1, G1, d1, y0, max_iter);
    const double t_opt = phase1.z.size() ? phase1.z[n] : violation;
    if (phase1.status != QpStatus::optimal || t_opt > 10.0 * settings_.feasibility_tol) {
      QpSolution sol;
      sol.status = QpStatus::infeasible;
      sol.z = phase1.z.size() ? VectorXd(phase1.z.head(n)) : z0;
      sol.phase1_violation = t_opt;
      sol.lambda = VectorXd::Zero(m);
      return sol;
    }
    z0 = phase1.z.head(n);
  }

  QpSolution sol = active_set_iterate(problem.Q, problem.c, G, d, z0, max_iter);
  if (sol.status == QpStatus::optimal) {
    // Undo row scaling on the multipliers, then report residuals on the
    // problem as given.
    for (int i = 0; i < m; ++i) sol.lambda[i] /= row_scale[i];
    sol.objective = 0.5 * sol.z.dot(problem.Q * sol.z) + problem.c.dot(sol.z);
    sol.kkt = compute_kkt_residuals(problem, sol.z, sol.lambda);
  }
  return sol;
}

}  // namespace mrta
