#include "mrta/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrta {

Dynamics Dynamics::single_integrator(int dim) {
  Dynamics d;
  d.nx = dim;
  d.nu = dim;
  d.f = [dim](const VectorXd&) { return VectorXd::Zero(dim).eval(); };
  d.g = [dim](const VectorXd&) { return MatrixXd::Identity(dim, dim).eval(); };
  return d;
}

CubicPath::CubicPath(std::vector<double> times, std::vector<Vector2d> points)
    : times_(std::move(times)), points_(std::move(points)) {
  if (times_.size() != points_.size() || times_.size() < 2)
    throw std::invalid_argument("path needs at least two timed waypoints");
  for (size_t i = 1; i < times_.size(); ++i)
    if (times_[i] <= times_[i - 1]) throw std::invalid_argument("path times must increase");

  // Clamped spline (zero velocity at both ends): solve the standard
  // tridiagonal system for second derivatives, per axis.
  const int n = static_cast<int>(times_.size());
  second_derivs_.assign(n, Vector2d::Zero());
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
    const auto y = [&](int i) { return points_[i][axis]; };
    const auto hseg = [&](int i) { return times_[i + 1] - times_[i]; };
    b[0] = 2.0 * hseg(0);
    c[0] = hseg(0);
    r[0] = 6.0 * ((y(1) - y(0)) / hseg(0) - 0.0);
    for (int i = 1; i < n - 1; ++i) {
      a[i] = hseg(i - 1);
      b[i] = 2.0 * (hseg(i - 1) + hseg(i));
      c[i] = hseg(i);
      r[i] = 6.0 * ((y(i + 1) - y(i)) / hseg(i) - (y(i) - y(i - 1)) / hseg(i - 1));
    }
    a[n - 1] = hseg(n - 2);
    b[n - 1] = 2.0 * hseg(n - 2);
    r[n - 1] = 6.0 * (0.0 - (y(n - 1) - y(n - 2)) / hseg(n - 2));

    // Thomas algorithm.
    for (int i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    std::vector<double> m(n);
    m[n - 1] = r[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
    for (int i = 0; i < n; ++i) second_derivs_[i][axis] = m[i];
  }
}

Vector2d CubicPath::position(double t) const {
  if (t <= times_.front()) return points_.front();
  if (t >= times_.back()) return points_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const int i = static_cast<int>(it - times_.begin()) - 1;
  const double h = times_[i + 1] - times_[i];
  const double A = (times_[i + 1] - t) / h;
  const double B = (t - times_[i]) / h;
  return A * points_[i] + B * points_[i + 1] +
         ((A * A * A - A) * second_derivs_[i] + (B * B * B - B) * second_derivs_[i + 1]) *
             (h * h) / 6.0;
}

Vector2d CubicPath::velocity(double t) const {
  if (t <= times_.front() || t >= times_.back()) return Vector2d::Zero();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const int i = static_cast<int>(it - times_.begin()) - 1;
  const double h = times_[i + 1] - times_[i];
  const double A = (times_[i + 1] - t) / h;
  const double B = (t - times_[i]) / h;
  return (points_[i + 1] - points_[i]) / h +
         ((1.0 - 3.0 * A * A) * second_derivs_[i] + (3.0 * B * B - 1.0) * second_derivs_[i + 1]) *
             h / 6.0;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

double Task::ensemble_value(const Ensemble& x, double t) const {
  double total = 0.0;
  for (int i : participants()) total += value(i, x.x[i], x, t);
  return total;
}

double GotoTask::value(int, const VectorXd& xi, const Ensemble&, double) const {
  return -(xi.head<2>() - target_).squaredNorm();
}

VectorXd GotoTask::gradient(int, const VectorXd& xi, const Ensemble&, double) const {
  VectorXd g = VectorXd::Zero(xi.size());
  g.head<2>() = -2.0 * (xi.head<2>() - target_);
  return g;
}

double GotoTask::partial_t(int, const VectorXd&, const Ensemble&, double) const { return 0.0; }

double TrajectoryTask::value(int, const VectorXd& xi, const Ensemble&, double t) const {
  return -(xi.head<2>() - path_.position(t)).squaredNorm();
}

VectorXd TrajectoryTask::gradient(int, const VectorXd& xi, const Ensemble&, double t) const {
  VectorXd g = VectorXd::Zero(xi.size());
  g.head<2>() = -2.0 * (xi.head<2>() - path_.position(t));
  return g;
}

double TrajectoryTask::partial_t(int, const VectorXd& xi, const Ensemble&, double t) const {
  return 2.0 * (xi.head<2>() - path_.position(t)).dot(path_.velocity(t));
}

CentroidResult voronoi_centroid(const std::vector<Vector2d>& sites, int which,
                                const CoverageDomain& domain,
                                const std::function<double(const Vector2d&)>& density,
                                const std::function<double(const Vector2d&)>* density_rate) {
  if (sites.empty()) throw std::invalid_argument("voronoi_centroid: no sites");

  // Coincident sites make cell membership ill-defined; nudge them apart.
  std::vector<Vector2d> pts = sites;
  bool jittered = false;
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b)
      if ((pts[a] - pts[b]).norm() < 1e-9) {
        pts[b].x() += 1e-6 * static_cast<double>(b + 1);
        jittered = true;
      }
  if (jittered) warn("voronoi_centroid: coincident sites perturbed by deterministic jitter");

  const Rect& r = domain.rect;
  const double dx = r.width() / domain.grid_nx;
  const double dy = r.height() / domain.grid_ny;
  double mass = 0.0, mass_rate = 0.0;
  Vector2d first = Vector2d::Zero(), first_rate = Vector2d::Zero();
  Vector2d unweighted = Vector2d::Zero();
  double cell_area = 0.0;
  for (int ix = 0; ix < domain.grid_nx; ++ix) {
    for (int iy = 0; iy < domain.grid_ny; ++iy) {
      const Vector2d p(r.xmin + (ix + 0.5) * dx, r.ymin + (iy + 0.5) * dy);
      double best = (p - pts[0]).squaredNorm();
      int owner = 0;
      for (size_t s = 1; s < pts.size(); ++s) {
        const double dist = (p - pts[s]).squaredNorm();
        if (dist < best) {
          best = dist;
          owner = static_cast<int>(s);
        }
      }
      if (owner != which) continue;
      const double w = density(p);
      mass += w;
      first += w * p;
      unweighted += p;
      cell_area += 1.0;
      if (density_rate) {
        const double wr = (*density_rate)(p);
        mass_rate += wr;
        first_rate += wr * p;
      }
    }
  }

  CentroidResult out;
  if (mass <= 0.0 || cell_area == 0.0) {
    out.empty_cell_fallback = true;
    out.centroid = cell_area > 0.0 ? Vector2d(unweighted / cell_area) : r.center();
    out.mass = 0.0;
    warn("voronoi_centroid: zero density mass in cell, using unweighted centroid");
    return out;
  }
  out.centroid = first / mass;
  out.mass = mass;
  if (density_rate) out.centroid_rate = (first_rate - out.centroid * mass_rate) / mass;
  return out;
}

CoverageEscortTask::CoverageEscortTask(CoverageDomain domain, Vector2d monitor_point,
                                       CubicPath ring_center)
    : domain_(std::move(domain)), monitor_(std::move(monitor_point)),
      ring_center_(std::move(ring_center)) {}

std::vector<Vector2d> CoverageEscortTask::sites_for(int i, const Ensemble& snap,
                                                    int* own_index) const {
  std::vector<int> robots = participants();
  if (std::find(robots.begin(), robots.end(), i) == robots.end()) robots.push_back(i);
  std::sort(robots.begin(), robots.end());
  std::vector<Vector2d> sites;
  sites.reserve(robots.size());
  for (size_t s = 0; s < robots.size(); ++s) {
    if (robots[s] == i) *own_index = static_cast<int>(s);
    sites.push_back(snap.position(robots[s]));
  }
  return sites;
}

CentroidResult CoverageEscortTask::centroid_for(int i, const Ensemble& snap, double t) const {
  int own = -1;
  const std::vector<Vector2d> sites = sites_for(i, snap, &own);
  const Vector2d c = ring_center_.position(t);
  const Vector2d cdot = ring_center_.velocity(t);
  const double k = domain_.density_gain;
  const double r2 = domain_.ring_radius * domain_.ring_radius;
  const auto phi = [&](const Vector2d& p) {
    const double q = (p - c).squaredNorm() - r2;
    return std::exp(-k * q * q);
  };
  const std::function<double(const Vector2d&)> phi_fn = phi;
  const std::function<double(const Vector2d&)> phi_rate = [&](const Vector2d& p) {
    const double q = (p - c).squaredNorm() - r2;
    return phi(p) * 4.0 * k * q * (p - c).dot(cdot);
  };
  return voronoi_centroid(sites, own, domain_, phi_fn, &phi_rate);
}

double CoverageEscortTask::value(int i, const VectorXd& xi, const Ensemble& snap,
                                 double t) const {
  if (xi.size() < 3)
    throw std::invalid_argument("coverage escort needs position + camera angle states");
  const CentroidResult cr = centroid_for(i, snap, t);
  const Vector2d p = xi.head<2>();
  const Vector2d v = monitor_ - p;
  const double w = wrap_angle(xi[2] - std::atan2(v.y(), v.x()));
  return -(p - cr.centroid).squaredNorm() - w * w;
}

VectorXd CoverageEscortTask::gradient(int i, const VectorXd& xi, const Ensemble& snap,
                                      double t) const {
  const CentroidResult cr = centroid_for(i, snap, t);
  const Vector2d p = xi.head<2>();
  const Vector2d v = monitor_ - p;
  const double n2 = std::max(v.squaredNorm(), 1e-12);
  const double w = wrap_angle(xi[2] - std::atan2(v.y(), v.x()));
  VectorXd g = VectorXd::Zero(xi.size());
  // Centroid frozen at the snapshot; only the explicit p_i dependence moves.
  g.head<2>() = -2.0 * (p - cr.centroid) + 2.0 * w * Vector2d(v.y(), -v.x()) / n2;
  g[2] = -2.0 * w;
  return g;
}

double CoverageEscortTask::partial_t(int i, const VectorXd& xi, const Ensemble& snap,
                                     double t) const {
  const CentroidResult cr = centroid_for(i, snap, t);
  return 2.0 * (xi.head<2>() - cr.centroid).dot(cr.centroid_rate);
}

LieTerms lie_terms(const Task& task, const Dynamics& dyn, const Ensemble& x, double t, int i) {
  const VectorXd grad = task.gradient(i, x.x[i], x, t);
  LieTerms out;
  out.drift = grad.dot(dyn.f(x.x[i])) + task.partial_t(i, x.x[i], x, t);
  out.input_row = (grad.transpose() * dyn.g(x.x[i])).transpose();
  return out;
}

}  // namespace mrta
