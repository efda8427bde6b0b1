#pragma once

#include <memory>
#include <vector>

#include "mrta/common.hpp"

namespace mrta {

// Ensemble state: one state vector per robot (dimensions may differ).
struct Ensemble {
  std::vector<VectorXd> x;

  int num_robots() const { return static_cast<int>(x.size()); }
  Vector2d position(int i) const { return x[i].head<2>(); }
};

// Control-affine robot model xdot = f(x) + g(x) u.
struct Dynamics {
  int nx = 2;
  int nu = 2;
  std::function<VectorXd(const VectorXd&)> f;
  std::function<MatrixXd(const VectorXd&)> g;

  static Dynamics single_integrator(int dim);
};

// Piecewise-cubic path through timed waypoints, clamped to zero velocity at
// both ends so the constant extension beyond the time range stays C1.
class CubicPath {
 public:
  CubicPath(std::vector<double> times, std::vector<Vector2d> points);

  Vector2d position(double t) const;
  Vector2d velocity(double t) const;
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<Vector2d> points_;
  std::vector<Vector2d> second_derivs_;
};

struct Rect {
  double xmin = -1.8, xmax = 1.8, ymin = -1.2, ymax = 1.2;
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Vector2d center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  bool contains(const Vector2d& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

// Coverage region, ring density parameters and quadrature resolution.
struct CoverageDomain {
  Rect rect;
  double density_gain = 100.0;  // k in the ring density
  double ring_radius = 0.4;
  int grid_nx = 120;
  int grid_ny = 80;
};

struct CentroidResult {
  Vector2d centroid = Vector2d::Zero();
  Vector2d centroid_rate = Vector2d::Zero();  // d centroid / dt from the moving density
  double mass = 0.0;
  bool empty_cell_fallback = false;
};

// Weighted centroid of site `which`'s Voronoi cell restricted to the
// rectangle, by grid quadrature with nearest-site cell membership.
CentroidResult voronoi_centroid(const std::vector<Vector2d>& sites, int which,
                                const CoverageDomain& domain,
                                const std::function<double(const Vector2d&)>& density,
                                const std::function<double(const Vector2d&)>* density_rate = nullptr);

// A CBF-encoded task. Robot i's contribution h_{m,i} is a function of the
// robot's own state with the rest of the ensemble frozen at a snapshot; the
// ensemble-level value sums contributions over the currently allocated
// participants.
class Task {
 public:
  virtual ~Task() = default;

  virtual double value(int i, const VectorXd& xi, const Ensemble& snap, double t) const = 0;
  virtual VectorXd gradient(int i, const VectorXd& xi, const Ensemble& snap, double t) const = 0;
  virtual double partial_t(int i, const VectorXd& xi, const Ensemble& snap, double t) const = 0;
  virtual bool coordinated() const { return false; }

  double value(int i, const Ensemble& x, double t) const { return value(i, x.x[i], x, t); }
  double ensemble_value(const Ensemble& x, double t) const;

  void set_participants(std::vector<int> robots) { participants_ = std::move(robots); }
  const std::vector<int>& participants() const { return participants_; }

 private:
  std::vector<int> participants_;
};

using TaskPtr = std::shared_ptr<Task>;

// h = -|p_i - target|^2.
class GotoTask : public Task {
 public:
  explicit GotoTask(Vector2d target) : target_(std::move(target)) {}
  double value(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  VectorXd gradient(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  double partial_t(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  const Vector2d& target() const { return target_; }

 private:
  Vector2d target_;
};

// h = -|p_i - phat(t)|^2 with explicit time dependence.
class TrajectoryTask : public Task {
 public:
  explicit TrajectoryTask(CubicPath path) : path_(std::move(path)) {}
  double value(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  VectorXd gradient(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  double partial_t(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  const CubicPath& path() const { return path_; }

 private:
  CubicPath path_;
};

// h = -|p_i - G_i(x)|^2 - wrap(x_{i,3} - angle(p* - p_i))^2, with G_i the
// weighted Voronoi centroid under the ring density that escorts the moving
// point phat(t). Needs 3-state robots (position + camera angle).
class CoverageEscortTask : public Task {
 public:
  CoverageEscortTask(CoverageDomain domain, Vector2d monitor_point, CubicPath ring_center);

  double value(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  VectorXd gradient(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  double partial_t(int i, const VectorXd& xi, const Ensemble& snap, double t) const override;
  bool coordinated() const override { return true; }

  const CoverageDomain& domain() const { return domain_; }
  CentroidResult centroid_for(int i, const Ensemble& snap, double t) const;

 private:
  std::vector<Vector2d> sites_for(int i, const Ensemble& snap, int* own_index) const;

  CoverageDomain domain_;
  Vector2d monitor_;
  CubicPath ring_center_;
};

double wrap_angle(double a);  // into (-pi, pi]

struct LieTerms {
  double drift = 0.0;    // L_f h_{m,i} + dh_{m,i}/dt
  VectorXd input_row;    // L_g h_{m,i}, coefficients of robot i's input
};

LieTerms lie_terms(const Task& task, const Dynamics& dyn, const Ensemble& x, double t, int i);

}  // namespace mrta
