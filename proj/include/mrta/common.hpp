#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace mrta {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::Vector2d;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Warnings go through a swappable sink so library code stays quiet in tests.
using WarnSink = std::function<void(const std::string&)>;
void set_warn_sink(WarnSink sink);
void warn(const std::string& msg);

// Extended class-K function used in the CBF constraints; linear gamma(s) = gain*s
// covers everything the scenarios need while keeping derivative() exact.
struct ClassK {
  double gain = 5.0;
  double operator()(double s) const { return gain * s; }
  double derivative(double) const { return gain; }
};

}  // namespace mrta
