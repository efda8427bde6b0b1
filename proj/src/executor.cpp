#include "mrta/executor.hpp"

#include <stdexcept>

namespace mrta {

QpProblem assemble_execution_qp(const ExecutionInput& in) {
  const int nt = static_cast<int>(in.tasks->size());
  const int nu = in.dynamics->nu;
  const int nv = nu + nt;
  if (in.alpha_col.size() != nt) throw std::invalid_argument("executor: alpha column size");
  if (in.alpha_col.sum() > 1) throw std::invalid_argument("executor: alpha column sums above 1");

  QpProblem qp;
  qp.Q = MatrixXd::Zero(nv, nv);
  qp.c = VectorXd::Zero(nv);
  for (int k = 0; k < nu; ++k) qp.Q(k, k) = 2.0;
  for (int m = 0; m < nt; ++m) qp.Q(nu + m, nu + m) = 2.0 * in.l * in.specialization->s[m];

  const int rows = nt + in.priority->rows() + 2 * nt;
  qp.G = MatrixXd::Zero(rows, nv);
  qp.d = VectorXd::Zero(rows);

  int r = 0;
  for (int m = 0; m < nt; ++m) {
    const double h = (*in.tasks)[m]->value(in.robot, in.x->x[in.robot], *in.x, in.t);
    const LieTerms lie = lie_terms(*(*in.tasks)[m], *in.dynamics, *in.x, in.t, in.robot);
    for (int k = 0; k < nu; ++k) qp.G(r, k) = -lie.input_row[k];
    qp.G(r, nu + m) = -1.0;
    qp.d[r] = in.gamma(h) + lie.drift;
    ++r;
  }
  for (int pr = 0; pr < in.priority->rows(); ++pr) {
    for (int m = 0; m < nt; ++m) qp.G(r, nu + m) = in.priority->Theta(pr, m);
    // Alpha is data here, so the Phi term moves to the right-hand side.
    qp.d[r] = in.priority->Psi[pr] -
              in.priority->Phi.row(pr).dot(in.alpha_col.cast<double>());
    ++r;
  }
  for (int m = 0; m < nt; ++m) {
    qp.G(r, nu + m) = -1.0;
    qp.d[r] = 0.0;
    ++r;
    qp.G(r, nu + m) = 1.0;
    qp.d[r] = in.delta_max;
    ++r;
  }
  return qp;
}

ExecutionOutput execute_step(const ExecutionInput& in, QpSolver& solver,
                             const std::optional<VectorXd>& warm_start) {
  const int nt = static_cast<int>(in.tasks->size());
  const int nu = in.dynamics->nu;
  const QpProblem qp = assemble_execution_qp(in);
  const QpSolution qs = solver.solve(qp, warm_start);

  ExecutionOutput out;
  if (qs.status != QpStatus::optimal) {
    // Should not happen under the delta_max feasibility guard; surface it.
    out.u = VectorXd::Zero(nu);
    out.delta = VectorXd::Constant(nt, in.delta_max);
    out.infeasible_fallback = true;
    warn("executor: QP not solved to optimality, applying zero input");
    return out;
  }
  out.u = qs.z.head(nu);
  out.delta = qs.z.tail(nt);
  out.objective = qs.objective;
  out.kkt = qs.kkt;
  return out;
}

}  // namespace mrta
