#pragma once

#include <string>
#include <vector>

#include "mrta/common.hpp"

namespace mrta {

struct TraceStep {
  double t = 0.0;
  std::vector<VectorXd> x;        // per robot
  std::vector<VectorXd> u;        // applied input
  MatrixXd delta;                 // n_t x n_r
  VectorXi alpha_task;            // per robot: assigned task index, -1 = none
  double lyapunov = 0.0;
  MatrixXd s_diag;                // n_t x n_r specialization diagonals
  double miqp_objective = 0.0;
  std::vector<std::string> events;
};

struct RunTrace {
  int num_tasks = 0;
  int num_robots = 0;
  double dt = 0.0;
  double C = 1e6;
  double l = 1e-6;
  bool prop1_hypotheses = false;
  std::vector<TraceStep> steps;
};

// CSV with one row per (step, robot):
//   t,robot,x1,x2,x3,u1,u2,u3,delta_1..delta_nt,alpha,V
// States narrower than 3 are zero-padded. Floats are printed with 17
// significant digits so parsing recovers them bit-exactly.
void write_trace_csv(const RunTrace& trace, const std::string& path);
// Sidecar with run parameters, per-step specializations, objectives, events.
void write_trace_sidecar(const RunTrace& trace, const std::string& path);

RunTrace read_trace(const std::string& csv_path, const std::string& sidecar_path);

}  // namespace mrta
