#include "mrta/allocator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace mrta {

PriorityConstraints build_priority_constraints(int num_tasks, double kappa, double delta_max) {
  if (num_tasks < 1) throw std::invalid_argument("need at least one task");
  const int rows = num_tasks * (num_tasks - 1);
  PriorityConstraints pc;
  pc.kappa = kappa;
  pc.delta_max = delta_max;
  pc.Theta = MatrixXd::Zero(rows, num_tasks);
  pc.Phi = MatrixXd::Zero(rows, num_tasks);
  pc.Psi = VectorXd::Constant(rows, delta_max);
  int r = 0;
  for (int m = 0; m < num_tasks; ++m)
    for (int n = 0; n < num_tasks; ++n) {
      if (n == m) continue;
      pc.Theta(r, m) = 1.0;
      pc.Theta(r, n) = -1.0 / kappa;
      pc.Phi(r, m) = delta_max;
      ++r;
    }
  return pc;
}

namespace {

int total_input_dim(const AllocationProblem& p) {
  int n = 0;
  for (const auto& dyn : p.dynamics) n += dyn.nu;
  return n;
}

CardinalityBound cardinality_for(const AllocationProblem& p, int task) {
  if (task < static_cast<int>(p.params.cardinality.size())) {
    CardinalityBound b = p.params.cardinality[task];
    if (b.max_robots < 0) b.max_robots = p.num_robots();
    return b;
  }
  return {0, p.num_robots()};
}

}  // namespace

MiqpMatrices assemble_allocation_qp(const AllocationProblem& p) {
  const int nt = p.num_tasks();
  const int nr = p.num_robots();
  const int nc = p.model->num_capabilities();
  if (static_cast<int>(p.specialization.size()) != nr)
    throw std::invalid_argument("allocation problem needs one specialization per robot");

  MiqpMatrices mm;
  mm.nt = nt;
  mm.nr = nr;
  mm.nu_total = total_input_dim(p);
  mm.u_offset.resize(nr);
  for (int i = 0, off = 0; i < nr; ++i) {
    mm.u_offset[i] = off;
    off += p.dynamics[i].nu;
  }
  const int nv = mm.num_vars();

  const PriorityConstraints pc =
      build_priority_constraints(nt, p.params.kappa, p.params.delta_max);
  const int rows = nt * nr + nr * pc.rows() + (nr + nt * nc + 2 * nt) + 2 * nt * nr + 2 * nt * nr;
  mm.G = MatrixXd::Zero(rows, nv);
  mm.d = VectorXd::Zero(rows);

  mm.Q = MatrixXd::Zero(nv, nv);
  mm.c = VectorXd::Zero(nv);
  for (int i = 0; i < nr; ++i) {
    for (int k = 0; k < p.dynamics[i].nu; ++k) mm.Q(mm.u_offset[i] + k, mm.u_offset[i] + k) = 2.0;
    const VectorXd pi = p.specialization[i].projector();
    for (int m = 0; m < nt; ++m) {
      mm.Q(mm.delta_index(i, m), mm.delta_index(i, m)) = 2.0 * p.params.l * p.specialization[i].s[m];
      mm.Q(mm.alpha_index(m, i), mm.alpha_index(m, i)) = 2.0 * p.params.C * pi[m];
    }
  }

  int r = 0;
  // Task execution rows (one per robot-task pair):
  //   -L_g h_{m,i} u_i - delta_{im} <= gamma(h_{m,i}) + L_f h_{m,i} + dh/dt
  mm.cbf_begin = r;
  for (int i = 0; i < nr; ++i) {
    for (int m = 0; m < nt; ++m) {
      const double h = p.tasks[m]->value(i, p.x.x[i], p.x, p.t);
      const LieTerms lie = lie_terms(*p.tasks[m], p.dynamics[i], p.x, p.t, i);
      for (int k = 0; k < p.dynamics[i].nu; ++k) mm.G(r, mm.u_offset[i] + k) = -lie.input_row[k];
      mm.G(r, mm.delta_index(i, m)) = -1.0;
      mm.d[r] = p.params.gamma(h) + lie.drift;
      ++r;
    }
  }
  mm.cbf_end = r;

  // Priority ordering rows per robot.
  mm.priority_begin = r;
  for (int i = 0; i < nr; ++i) {
    for (int pr = 0; pr < pc.rows(); ++pr) {
      for (int m = 0; m < nt; ++m) {
        mm.G(r, mm.delta_index(i, m)) = pc.Theta(pr, m);
        mm.G(r, mm.alpha_index(m, i)) = pc.Phi(pr, m);
      }
      mm.d[r] = pc.Psi[pr];
      ++r;
    }
  }
  mm.priority_end = r;

  // Pure-alpha rows: at most one task per robot, capability coverage,
  // cardinality bounds.
  mm.alpha_rows_begin = r;
  for (int i = 0; i < nr; ++i) {
    for (int m = 0; m < nt; ++m) mm.G(r, mm.alpha_index(m, i)) = 1.0;
    mm.d[r] = 1.0;
    ++r;
  }
  const MatrixXd& F = p.model->F();
  for (int m = 0; m < nt; ++m) {
    for (int k = 0; k < nc; ++k) {
      for (int i = 0; i < nr; ++i) mm.G(r, mm.alpha_index(m, i)) = -F(k, i);
      mm.d[r] = -static_cast<double>(p.model->T()(m, k));
      ++r;
    }
  }
  for (int m = 0; m < nt; ++m) {
    const CardinalityBound b = cardinality_for(p, m);
    for (int i = 0; i < nr; ++i) mm.G(r, mm.alpha_index(m, i)) = -1.0;
    mm.d[r] = -static_cast<double>(b.min_robots);
    ++r;
    for (int i = 0; i < nr; ++i) mm.G(r, mm.alpha_index(m, i)) = 1.0;
    mm.d[r] = static_cast<double>(b.max_robots);
    ++r;
  }
  mm.alpha_rows_end = r;

  // Boxes: 0 <= delta <= delta_max, 0 <= alpha <= 1.
  mm.delta_box_begin = r;
  for (int i = 0; i < nr; ++i)
    for (int m = 0; m < nt; ++m) {
      mm.G(r, mm.delta_index(i, m)) = -1.0;
      mm.d[r] = 0.0;
      ++r;
      mm.G(r, mm.delta_index(i, m)) = 1.0;
      mm.d[r] = p.params.delta_max;
      ++r;
    }
  mm.delta_box_end = r;
  mm.alpha_box_begin = r;
  for (int i = 0; i < nr; ++i)
    for (int m = 0; m < nt; ++m) {
      mm.G(r, mm.alpha_index(m, i)) = -1.0;
      mm.d[r] = 0.0;
      ++r;
      mm.G(r, mm.alpha_index(m, i)) = 1.0;
      mm.d[r] = 1.0;
      ++r;
    }
  mm.alpha_box_end = r;

  return mm;
}

namespace {

constexpr double kIntegralTol = 1e-7;

struct Node {
  std::vector<int> fixed_value;  // per alpha entry: -1 free, else 0/1
  double bound = -std::numeric_limits<double>::infinity();
  VectorXd warm;  // parent solution in full z coordinates
  long seq = 0;
};

// QP over the free variables with the fixed alpha entries substituted out.
struct ReducedQp {
  QpProblem qp;
  std::vector<int> free_index;  // free z index -> full z index
  double constant = 0.0;
};

ReducedQp reduce(const MiqpMatrices& mm, const std::vector<int>& fixed_value) {
  const int nv = mm.num_vars();
  const int na = mm.nt * mm.nr;
  std::vector<char> is_fixed(nv, 0);
  VectorXd fixed_val = VectorXd::Zero(nv);
  for (int e = 0; e < na; ++e)
    if (fixed_value[e] >= 0) {
      is_fixed[mm.alpha_offset() + e] = 1;
      fixed_val[mm.alpha_offset() + e] = fixed_value[e];
    }

  ReducedQp red;
  for (int j = 0; j < nv; ++j)
    if (!is_fixed[j]) red.free_index.push_back(j);
  const int nf = static_cast<int>(red.free_index.size());

  red.qp.Q = MatrixXd::Zero(nf, nf);
  red.qp.c = VectorXd::Zero(nf);
  for (int a = 0; a < nf; ++a) red.qp.Q(a, a) = mm.Q(red.free_index[a], red.free_index[a]);
  // Q is diagonal, so substitution leaves no cross terms, only a constant.
  for (int j = 0; j < nv; ++j)
    if (is_fixed[j]) red.constant += 0.5 * mm.Q(j, j) * fixed_val[j] * fixed_val[j];

  red.qp.G = MatrixXd::Zero(mm.G.rows(), nf);
  for (int a = 0; a < nf; ++a) red.qp.G.col(a) = mm.G.col(red.free_index[a]);
  red.qp.d = mm.d - mm.G * fixed_val;
  return red;
}

VectorXd expand(const ReducedQp& red, const MiqpMatrices& mm,
                const std::vector<int>& fixed_value, const VectorXd& zfree) {
  VectorXd z = VectorXd::Zero(mm.num_vars());
  for (size_t a = 0; a < red.free_index.size(); ++a) z[red.free_index[a]] = zfree[a];
  for (int e = 0; e < mm.nt * mm.nr; ++e)
    if (fixed_value[e] >= 0) z[mm.alpha_offset() + e] = fixed_value[e];
  return z;
}

AllocationSolution extract_solution(const AllocationProblem& p, const MiqpMatrices& mm,
                                    const VectorXd& z, double objective) {
  AllocationSolution sol;
  sol.status = AllocationStatus::optimal;
  sol.objective = objective;
  sol.alpha = MatrixXi::Zero(mm.nt, mm.nr);
  sol.delta = MatrixXd::Zero(mm.nt, mm.nr);
  sol.u.resize(mm.nr);
  for (int i = 0; i < mm.nr; ++i) {
    sol.u[i] = z.segment(mm.u_offset[i], p.dynamics[i].nu);
    for (int m = 0; m < mm.nt; ++m) {
      sol.delta(m, i) = z[mm.delta_index(i, m)];
      sol.alpha(m, i) = static_cast<int>(std::lround(z[mm.alpha_index(m, i)]));
    }
  }
  return sol;
}

// Names the task whose requirements cannot be met by any robot subset, for
// infeasibility reports.
std::string diagnose_infeasibility(const AllocationProblem& p) {
  const int nr = p.num_robots();
  const MatrixXd& F = p.model->F();
  for (int m = 0; m < p.num_tasks(); ++m) {
    const CardinalityBound b = cardinality_for(p, m);
    bool satisfiable = false;
    for (unsigned mask = 0; mask < (1u << nr) && !satisfiable; ++mask) {
      const int size = __builtin_popcount(mask);
      if (size < b.min_robots || size > b.max_robots) continue;
      VectorXd total = VectorXd::Zero(F.rows());
      for (int i = 0; i < nr; ++i)
        if (mask & (1u << i)) total += F.col(i);
      satisfiable = true;
      for (int k = 0; k < F.rows(); ++k)
        if (total[k] < static_cast<double>(p.model->T()(m, k))) satisfiable = false;
    }
    if (!satisfiable)
      return "task " + std::to_string(m) +
             ": capability row F alpha >= T cannot be met by any admissible robot subset";
  }
  return "tasks are individually satisfiable but jointly conflict (robots serve at most one task)";
}

}  // namespace

AllocationSolution solve_allocation(const AllocationProblem& p, const BnbOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  const MiqpMatrices mm = assemble_allocation_qp(p);
  const int na = mm.nt * mm.nr;
  QpSolver solver;

  AllocationSolution incumbent;
  incumbent.status = AllocationStatus::infeasible;
  double incumbent_obj = std::numeric_limits<double>::infinity();
  double max_kkt = 0.0;
  long seq = 0;
  int explored = 0;
  bool out_of_budget = false;

  // The previous allocation, when given and feasible, seeds the incumbent so
  // pruning starts immediately.
  if (options.hint_alpha && options.hint_alpha->rows() == mm.nt &&
      options.hint_alpha->cols() == mm.nr) {
    std::vector<int> fixed(na, -1);
    for (int i = 0; i < mm.nr; ++i)
      for (int m = 0; m < mm.nt; ++m) fixed[i * mm.nt + m] = (*options.hint_alpha)(m, i);
    const ReducedQp red = reduce(mm, fixed);
    const QpSolution qs = solver.solve(red.qp);
    if (qs.status == QpStatus::optimal) {
      incumbent = extract_solution(p, mm, expand(red, mm, fixed, qs.z), qs.objective + red.constant);
      incumbent_obj = incumbent.objective;
      max_kkt = std::max(max_kkt, qs.kkt.worst());
    }
  }

  std::deque<Node> pending;
  Node root;
  root.fixed_value.assign(na, -1);
  root.seq = seq++;
  pending.push_back(std::move(root));
  bool have_incumbent = incumbent_obj < std::numeric_limits<double>::infinity();

  while (!pending.empty()) {
    if (explored >= options.max_nodes) {
      out_of_budget = true;
      break;
    }
    if (options.wall_time_limit > 0.0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      if (elapsed > options.wall_time_limit) {
        out_of_budget = true;
        break;
      }
    }

    // Depth-first until an incumbent exists, then best relaxation bound.
    size_t pick = pending.size() - 1;
    if (have_incumbent) {
      pick = 0;
      for (size_t j = 1; j < pending.size(); ++j)
        if (pending[j].bound < pending[pick].bound) pick = j;
    }
    Node node = std::move(pending[pick]);
    pending.erase(pending.begin() + static_cast<long>(pick));
    ++explored;

    const ReducedQp red = reduce(mm, node.fixed_value);
    std::optional<VectorXd> warm;
    if (node.warm.size() == mm.num_vars()) {
      VectorXd w(red.free_index.size());
      for (size_t a = 0; a < red.free_index.size(); ++a) w[a] = node.warm[red.free_index[a]];
      warm = w;
    }
    const QpSolution qs = solver.solve(red.qp, warm);
    if (qs.status == QpStatus::infeasible) continue;
    if (qs.status != QpStatus::optimal) continue;
    max_kkt = std::max(max_kkt, qs.kkt.worst());
    const double bound = qs.objective + red.constant;
    if (have_incumbent && bound >= incumbent_obj - 1e-9 * (1.0 + std::abs(incumbent_obj)))
      continue;

    const VectorXd zfull = expand(red, mm, node.fixed_value, qs.z);

    // Most fractional free alpha entry; ties broken (task, robot)-lexicographic.
    int branch_entry = -1;
    double best_frac = kIntegralTol;
    for (int m = 0; m < mm.nt; ++m)
      for (int i = 0; i < mm.nr; ++i) {
        const int e = i * mm.nt + m;
        if (node.fixed_value[e] >= 0) continue;
        const double a = zfull[mm.alpha_index(m, i)];
        const double frac = std::min(a, 1.0 - a);
        if (frac > best_frac + 1e-12) {
          best_frac = frac;
          branch_entry = e;
        }
      }

    if (branch_entry < 0) {
      // Integral relaxation: fix everything and re-solve for clean numbers.
      std::vector<int> fixed(na);
      for (int e = 0; e < na; ++e) {
        const double a = zfull[mm.alpha_offset() + e];
        fixed[e] = static_cast<int>(std::lround(a));
      }
      const ReducedQp leaf = reduce(mm, fixed);
      const QpSolution ls = solver.solve(leaf.qp, warm);
      if (ls.status != QpStatus::optimal) continue;
      max_kkt = std::max(max_kkt, ls.kkt.worst());
      const double obj = ls.objective + leaf.constant;
      if (obj < incumbent_obj - 1e-12 * (1.0 + std::abs(obj))) {
        incumbent = extract_solution(p, mm, expand(leaf, mm, fixed, ls.z), obj);
        incumbent_obj = obj;
        have_incumbent = true;
      }
      continue;
    }

    const int m_branch = branch_entry % mm.nt;
    const int i_branch = branch_entry / mm.nt;
    int preferred = static_cast<int>(
        std::lround(zfull[mm.alpha_index(m_branch, i_branch)]));
    if (options.hint_alpha && options.hint_alpha->rows() == mm.nt)
      preferred = (*options.hint_alpha)(m_branch, i_branch);

    for (int value : {1 - preferred, preferred}) {  // preferred explored first (LIFO)
      Node child;
      child.fixed_value = node.fixed_value;
      child.fixed_value[branch_entry] = value;
      child.bound = bound;
      child.warm = zfull;
      child.seq = seq++;
      pending.push_back(std::move(child));
    }
  }

  incumbent.nodes = explored;
  incumbent.max_kkt = max_kkt;
  incumbent.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (incumbent_obj == std::numeric_limits<double>::infinity()) {
    incumbent.status = AllocationStatus::infeasible;
    incumbent.note = diagnose_infeasibility(p);
  } else if (out_of_budget) {
    incumbent.status = AllocationStatus::suboptimal;
    incumbent.note = "node budget exhausted; best incumbent returned";
  }
  return incumbent;
}

AllocationSolution solve_fixed_alpha(const AllocationProblem& p, const MatrixXi& alpha) {
  const MiqpMatrices mm = assemble_allocation_qp(p);
  std::vector<int> fixed(mm.nt * mm.nr);
  for (int i = 0; i < mm.nr; ++i)
    for (int m = 0; m < mm.nt; ++m) fixed[i * mm.nt + m] = alpha(m, i);
  const ReducedQp red = reduce(mm, fixed);
  QpSolver solver;
  const QpSolution qs = solver.solve(red.qp);
  if (qs.status != QpStatus::optimal) {
    AllocationSolution sol;
    sol.status = AllocationStatus::infeasible;
    sol.note = "fixed-alpha program infeasible";
    return sol;
  }
  AllocationSolution sol = extract_solution(p, mm, expand(red, mm, fixed, qs.z),
                                            qs.objective + red.constant);
  sol.max_kkt = qs.kkt.worst();
  sol.nodes = 1;
  return sol;
}

AllocationSolution brute_force_allocation(const AllocationProblem& p) {
  const int nt = p.num_tasks();
  const int nr = p.num_robots();
  double combos = std::pow(static_cast<double>(nt + 1), nr);
  if (combos > 1e5) throw std::invalid_argument("brute force: instance too large to enumerate");

  const MatrixXd& F = p.model->F();
  AllocationSolution best;
  best.status = AllocationStatus::infeasible;
  double best_obj = std::numeric_limits<double>::infinity();
  int checked = 0;

  std::vector<int> choice(nr, -1);  // -1 = idle, else task index
  while (true) {
    MatrixXi alpha = MatrixXi::Zero(nt, nr);
    for (int i = 0; i < nr; ++i)
      if (choice[i] >= 0) alpha(choice[i], i) = 1;

    bool feasible = true;
    for (int m = 0; m < nt && feasible; ++m) {
      const CardinalityBound b = cardinality_for(p, m);
      const int count = alpha.row(m).sum();
      if (count < b.min_robots || count > b.max_robots) feasible = false;
      VectorXd total = VectorXd::Zero(F.rows());
      for (int i = 0; i < nr; ++i)
        if (alpha(m, i)) total += F.col(i);
      for (int k = 0; k < F.rows() && feasible; ++k)
        if (total[k] < static_cast<double>(p.model->T()(m, k))) feasible = false;
    }

    if (feasible) {
      ++checked;
      const AllocationSolution cand = solve_fixed_alpha(p, alpha);
      if (cand.status == AllocationStatus::optimal && cand.objective < best_obj) {
        best = cand;
        best_obj = cand.objective;
      }
    }

    int i = 0;
    for (; i < nr; ++i) {
      if (choice[i] < nt - 1) {
        ++choice[i];
        break;
      }
      choice[i] = -1;
    }
    if (i == nr) break;
  }

  best.nodes = checked;
  if (best.status == AllocationStatus::infeasible) best.note = diagnose_infeasibility(p);
  return best;
}

}  // namespace mrta
