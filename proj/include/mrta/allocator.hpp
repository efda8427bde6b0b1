#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrta/hetero_model.hpp"
#include "mrta/qp.hpp"
#include "mrta/tasks.hpp"

namespace mrta {

// Slack-ordering rows, one per ordered task pair (m, n). Stored kappa-scaled:
//   delta_m - delta_n / kappa + delta_max * alpha_m <= delta_max
// which is the Eq.-(20) prioritization divided by kappa (same feasible set,
// O(1) coefficients).
struct PriorityConstraints {
  MatrixXd Theta;  // rows x n_t, acts on delta_i
  MatrixXd Phi;    // rows x n_t, acts on alpha_{-,i}
  VectorXd Psi;
  double kappa = 1e6;
  double delta_max = 1e3;

  int rows() const { return static_cast<int>(Psi.size()); }
};

PriorityConstraints build_priority_constraints(int num_tasks, double kappa, double delta_max);

struct CardinalityBound {
  int min_robots = 0;
  int max_robots = -1;  // -1: no cap (n_r)
};

struct AllocatorParams {
  double C = 1e6;
  double l = 1e-6;
  double kappa = 1e6;
  double delta_max = 1e3;
  ClassK gamma;
  std::vector<CardinalityBound> cardinality;  // per task; empty = no bounds
};

struct AllocationProblem {
  const HeterogeneityModel* model = nullptr;
  std::vector<TaskPtr> tasks;
  std::vector<Dynamics> dynamics;  // per robot
  Ensemble x;
  double t = 0.0;
  std::vector<Specialization> specialization;  // current, possibly decayed
  AllocatorParams params;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  int num_robots() const { return static_cast<int>(dynamics.size()); }
};

// Variable layout and inequality rows of the allocation program with alpha
// relaxed to a box; also feeds the convergence analysis (the stacked
// inequality system and the pure-alpha / pure-delta row groups).
struct MiqpMatrices {
  MatrixXd Q;  // diagonal
  VectorXd c;
  MatrixXd G;
  VectorXd d;
  int nu_total = 0;
  int nt = 0, nr = 0;
  std::vector<int> u_offset;  // per robot, into z

  int delta_offset() const { return nu_total; }
  int alpha_offset() const { return nu_total + nt * nr; }
  int delta_index(int robot, int task) const { return delta_offset() + robot * nt + task; }
  int alpha_index(int task, int robot) const { return alpha_offset() + robot * nt + task; }
  int num_vars() const { return nu_total + 2 * nt * nr; }

  // Row groups, as [begin, end) into G.
  int cbf_begin = 0, cbf_end = 0;
  int priority_begin = 0, priority_end = 0;
  int alpha_rows_begin = 0, alpha_rows_end = 0;  // Eq. 19d/e/f
  int delta_box_begin = 0, delta_box_end = 0;
  int alpha_box_begin = 0, alpha_box_end = 0;
};

MiqpMatrices assemble_allocation_qp(const AllocationProblem& problem);

enum class AllocationStatus { optimal, infeasible, suboptimal };

struct AllocationSolution {
  AllocationStatus status = AllocationStatus::infeasible;
  MatrixXi alpha;            // n_t x n_r
  std::vector<VectorXd> u;   // per robot
  MatrixXd delta;            // n_t x n_r, column i = delta_i
  double objective = 0.0;
  int nodes = 0;
  double wall_time = 0.0;
  std::string note;
  double max_kkt = 0.0;
};

struct BnbOptions {
  int max_nodes = 200000;
  double wall_time_limit = 0.0;          // seconds, 0 = unlimited
  std::optional<MatrixXi> hint_alpha;    // previous allocation, explored first
};

// Global optimum of the allocation MIQP by branch-and-bound on alpha with
// convex QP relaxations.
AllocationSolution solve_allocation(const AllocationProblem& problem,
                                    const BnbOptions& options = {});

// Exhaustive oracle: every robot picks one task or none; feasible choices are
// scored by the fixed-alpha QP. Guarded to small instances.
AllocationSolution brute_force_allocation(const AllocationProblem& problem);

// Continuous QP in (u, delta) with alpha fixed; shared by both solvers.
AllocationSolution solve_fixed_alpha(const AllocationProblem& problem, const MatrixXi& alpha);

}  // namespace mrta
