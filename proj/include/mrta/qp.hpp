#pragma once

#include <optional>
#include <vector>

#include "mrta/common.hpp"

namespace mrta {

// Dense convex QP:  minimize 1/2 z'Qz + c'z  subject to Gz <= d.
struct QpProblem {
  MatrixXd Q;
  VectorXd c;
  MatrixXd G;
  VectorXd d;

  int num_vars() const { return static_cast<int>(Q.rows()); }
  int num_constraints() const { return static_cast<int>(G.rows()); }
};

enum class QpStatus { optimal, infeasible, max_iter };

struct KktResiduals {
  double stationarity = 0.0;    // ||Qz + c + G'lambda||_inf
  double primal = 0.0;          // max(0, max_i (Gz - d)_i)
  double dual = 0.0;            // max(0, -min_i lambda_i)
  double complementarity = 0.0; // max_i |lambda_i (Gz - d)_i|
  double worst() const;
};

struct QpSolution {
  QpStatus status = QpStatus::max_iter;
  VectorXd z;
  double objective = 0.0;
  VectorXd lambda;              // one multiplier per row, 0 when inactive
  std::vector<int> active_set;
  KktResiduals kkt;
  int iterations = 0;
  double phase1_violation = 0.0; // positive phase-1 optimum when infeasible
};

// All numerical tolerances in one place.
struct QpSettings {
  double feasibility_tol = 1e-8;
  double dual_tol = 1e-10;
  double step_tol = 1e-11;          // |p| below this counts as a stationary point
  double symmetry_tol = 1e-10;
  double regularization = 1e-10;    // diagonal shift when Cholesky fails
  double phase1_anchor = 1e-6;      // weight keeping phase-1 z near the start point
  int max_iter_factor = 10;         // cap = factor * (vars + constraints)^2
};

// Primal active-set solver with a phase-1 feasibility stage. One instance per
// thread; problems and solutions are plain values.
class QpSolver {
 public:
  explicit QpSolver(QpSettings settings = {}) : settings_(settings) {}

  QpSolution solve(const QpProblem& problem,
                   const std::optional<VectorXd>& warm_start = std::nullopt);

  const QpSettings& settings() const { return settings_; }

 private:
  VectorXd equality_step(const MatrixXd& Q, const VectorXd& g, const MatrixXd& G,
                         const std::vector<int>& working);
  VectorXd working_multipliers(const VectorXd& g, const MatrixXd& G,
                               const std::vector<int>& working);
  QpSolution active_set_iterate(const MatrixXd& Q, const VectorXd& c, const MatrixXd& G,
                                const VectorXd& d, VectorXd z, int max_iter);

  QpSettings settings_;
};

KktResiduals compute_kkt_residuals(const QpProblem& problem, const VectorXd& z,
                                   const VectorXd& lambda);

}  // namespace mrta
