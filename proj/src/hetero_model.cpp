#include "mrta/hetero_model.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace mrta {

namespace {
std::mutex warn_mutex;
WarnSink warn_sink = [](const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; };
}  // namespace

void set_warn_sink(WarnSink sink) {
  std::lock_guard<std::mutex> lock(warn_mutex);
  warn_sink = std::move(sink);
}

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(warn_mutex);
  if (warn_sink) warn_sink(msg);
}

VectorXd Specialization::projector() const {
  VectorXd pi(s.size());
  for (int j = 0; j < s.size(); ++j) pi[j] = (s[j] == 0.0) ? 1.0 : 0.0;
  return pi;
}

bool Specialization::positive_definite() const { return (s.array() > 0.0).all(); }

int kron_shift(double x, int n) {
  // Bundle sizes are <= 64, so accumulated float error in H_k A stays far
  // below this absolute tolerance.
  return std::abs(x - static_cast<double>(n)) <= 1e-9 ? 1 : 0;
}

HeterogeneityModel::HeterogeneityModel(MatrixXi task_capability, MatrixXi robot_feature,
                                       std::vector<CapabilityEdges> capability_edges)
    : T_(std::move(task_capability)),
      A_(std::move(robot_feature)),
      edges_(std::move(capability_edges)) {
  validate();
  recompute_capabilities();
}

void HeterogeneityModel::validate() const {
  if (static_cast<int>(edges_.size()) != num_capabilities())
    throw std::invalid_argument("hyperedge sets must match the number of capabilities");
  if ((T_.array() < 0).any())
    throw std::invalid_argument("capability-task counts must be non-negative");
  for (int f = 0; f < num_features(); ++f)
    for (int j = 0; j < num_robots(); ++j)
      if (A_(f, j) != 0 && A_(f, j) != 1)
        throw std::invalid_argument("robot-feature map must be binary");
  for (const auto& cap : edges_) {
    for (const auto& e : cap.edges) {
      if (e.features.empty()) throw std::invalid_argument("hyperedge must contain features");
      if (e.weight < 0.0) throw std::invalid_argument("hyperedge weight must be non-negative");
      for (int f : e.features)
        if (f < 0 || f >= num_features()) throw std::invalid_argument("hyperedge feature out of range");
    }
  }
}

MatrixXd HeterogeneityModel::H(int k) const {
  const auto& cap = edges_.at(k);
  MatrixXd h = MatrixXd::Zero(static_cast<Eigen::Index>(cap.edges.size()), num_features());
  for (size_t e = 0; e < cap.edges.size(); ++e) {
    const double share = 1.0 / static_cast<double>(cap.edges[e].features.size());
    for (int f : cap.edges[e].features) h(static_cast<Eigen::Index>(e), f) = share;
  }
  return h;
}

VectorXd HeterogeneityModel::W(int k) const {
  const auto& cap = edges_.at(k);
  VectorXd w(cap.edges.size());
  for (size_t e = 0; e < cap.edges.size(); ++e) w[static_cast<Eigen::Index>(e)] = cap.edges[e].weight;
  return w;
}

VectorXd HeterogeneityModel::capability_row(int k) const {
  const MatrixXd h = H(k);
  const VectorXd w = W(k);
  VectorXd row = VectorXd::Zero(num_robots());
  if (h.rows() == 0) return row;  // vacuous max: capability nobody can provide
  const MatrixXd ha = h * A_.cast<double>();
  for (int j = 0; j < num_robots(); ++j) {
    double best = 0.0;
    for (int e = 0; e < ha.rows(); ++e)
      best = std::max(best, w[e] * kron_shift(ha(e, j), 1));
    row[j] = best;
  }
  return row;
}

void HeterogeneityModel::recompute_capabilities() {
  F_.resize(num_capabilities(), num_robots());
  for (int k = 0; k < num_capabilities(); ++k) F_.row(k) = capability_row(k).transpose();
}

Specialization HeterogeneityModel::specialization(int robot) const {
  const VectorXd tf = T_.cast<double>() * F_.col(robot);
  Specialization out;
  out.s.resize(num_tasks());
  for (int m = 0; m < num_tasks(); ++m) out.s[m] = tf[m] > 0.0 ? 1.0 : 0.0;
  return out;
}

std::vector<Specialization> HeterogeneityModel::all_specializations() const {
  std::vector<Specialization> out;
  out.reserve(num_robots());
  for (int i = 0; i < num_robots(); ++i) out.push_back(specialization(i));
  return out;
}

HeterogeneityModel HeterogeneityModel::with_feature_failure(int robot, int feature) const {
  if (robot < 0 || robot >= num_robots() || feature < 0 || feature >= num_features())
    throw std::out_of_range("feature failure index out of range");
  HeterogeneityModel next = *this;
  if (next.A_(feature, robot) == 0) {
    warn("feature failure on robot " + std::to_string(robot) + ", feature " +
         std::to_string(feature) + " is a no-op (feature already absent)");
    return next;
  }
  next.A_(feature, robot) = 0;
  next.recompute_capabilities();
  return next;
}

HeterogeneityModel HeterogeneityModel::with_hyperedge_weight(int capability, int edge,
                                                             double w) const {
  if (capability < 0 || capability >= num_capabilities())
    throw std::out_of_range("capability index out of range");
  if (edge < 0 || edge >= static_cast<int>(edges_[capability].edges.size()))
    throw std::out_of_range("hyperedge index out of range");
  if (w < 0.0) throw std::invalid_argument("hyperedge weight must be non-negative");
  HeterogeneityModel next = *this;
  next.edges_[capability].edges[edge].weight = w;
  next.recompute_capabilities();
  return next;
}

bool check_feasible_assignment(const MatrixXd& F, const MatrixXi& T,
                               const std::vector<std::vector<int>>& robots_per_task) {
  const int nt = static_cast<int>(T.rows());
  if (static_cast<int>(robots_per_task.size()) != nt)
    throw std::invalid_argument("assignment must list a robot set per task");
  for (int t = 0; t < nt; ++t) {
    VectorXd total = VectorXd::Zero(F.rows());
    for (int i : robots_per_task[t]) total += F.col(i);
    for (int k = 0; k < F.rows(); ++k)
      if (total[k] < static_cast<double>(T(t, k))) return false;
  }
  return true;
}

}  // namespace mrta
