#pragma once

#include <optional>

#include "mrta/allocator.hpp"

namespace mrta {

// One robot's view of the decentralized execution program: the last published
// priority column plus the shared task set and tuning.
struct ExecutionInput {
  int robot = 0;
  const Ensemble* x = nullptr;
  double t = 0.0;
  VectorXi alpha_col;  // length n_t, binary, sum <= 1
  const Specialization* specialization = nullptr;
  const PriorityConstraints* priority = nullptr;
  ClassK gamma;
  double l = 1e-6;
  double delta_max = 1e3;
  const std::vector<TaskPtr>* tasks = nullptr;
  const Dynamics* dynamics = nullptr;
};

struct ExecutionOutput {
  VectorXd u;
  VectorXd delta;
  double objective = 0.0;
  bool infeasible_fallback = false;
  KktResiduals kkt;
};

// Builds the per-robot execution QP over (u_i, delta_i).
QpProblem assemble_execution_qp(const ExecutionInput& in);

ExecutionOutput execute_step(const ExecutionInput& in, QpSolver& solver,
                             const std::optional<VectorXd>& warm_start = std::nullopt);

}  // namespace mrta
