#pragma once

#include <vector>

#include "mrta/common.hpp"

namespace mrta {

// One feature bundle supporting a capability, with a quality weight.
struct Hyperedge {
  std::vector<int> features;
  double weight = 1.0;
};

// All bundles incident to one capability.
struct CapabilityEdges {
  std::vector<Hyperedge> edges;
};

// Diagonal specialization state of one robot. Entries live in [0,1]; the
// projector has a 1 exactly where the specialization is 0.
struct Specialization {
  VectorXd s;

  VectorXd projector() const;             // diag of Pi = I - S S^+
  bool positive_definite() const;
};

int kron_shift(double x, int n);

// Capability/feature model of the team. Immutable after construction; the
// robot-to-capability matrix F is derived eagerly. Mutations return a new
// model value.
class HeterogeneityModel {
 public:
  HeterogeneityModel(MatrixXi task_capability, MatrixXi robot_feature,
                     std::vector<CapabilityEdges> capability_edges);

  int num_tasks() const { return static_cast<int>(T_.rows()); }
  int num_capabilities() const { return static_cast<int>(T_.cols()); }
  int num_features() const { return static_cast<int>(A_.rows()); }
  int num_robots() const { return static_cast<int>(A_.cols()); }

  const MatrixXi& T() const { return T_; }
  const MatrixXi& A() const { return A_; }
  const std::vector<CapabilityEdges>& capability_edges() const { return edges_; }
  const MatrixXd& F() const { return F_; }

  // Row-stochastic bundle matrix of capability k (n_edges x n_features).
  MatrixXd H(int k) const;
  // Diagonal bundle weights of capability k.
  VectorXd W(int k) const;

  // F_k = max(W_k kron_1(H_k A)), column-wise max over bundles.
  VectorXd capability_row(int k) const;

  // Binary specialization of Eq.-(18) form: s_ij = 1 iff (T F_{-,i})_j > 0.
  Specialization specialization(int robot) const;
  std::vector<Specialization> all_specializations() const;

  HeterogeneityModel with_feature_failure(int robot, int feature) const;
  HeterogeneityModel with_hyperedge_weight(int capability, int edge, double w) const;

 private:
  void validate() const;
  void recompute_capabilities();

  MatrixXi T_;  // n_t x n_c, non-negative integer capability counts per task
  MatrixXi A_;  // n_f x n_r, binary robot features
  std::vector<CapabilityEdges> edges_;
  MatrixXd F_;  // n_c x n_r
};

// Eq.-(14) feasibility: for every task, the F-columns of its robots must
// elementwise dominate the task's capability-count row.
bool check_feasible_assignment(const MatrixXd& F, const MatrixXi& T,
                               const std::vector<std::vector<int>>& robots_per_task);

}  // namespace mrta
