#pragma once

#include <variant>

#include "mrta/hetero_model.hpp"
#include "mrta/tasks.hpp"

namespace mrta {

// Inputs of the expected-vs-actual progress comparison for one step.
struct ProgressLedger {
  Ensemble previous_state;            // actual ensemble at step k-1
  std::vector<VectorXd> previous_input;
  double dt = 0.033;
  double beta = 1.0;                  // specialization update gain
};

// Nominal one-robot prediction: robot i advances one Euler step under its
// undisturbed dynamics, everyone else stays where they were.
Ensemble simulate_nominal(const ProgressLedger& ledger, int robot, const Dynamics& dyn);

// min{0, h_{m,i}(actual) - h_{m,i}(simulated)}: progress shortfall of robot i
// on task m, clipped so neighbors' surprises never help.
double progress_deficit(const Task& task, int robot, const Ensemble& actual,
                        const Ensemble& simulated, double t);

// s' = clamp(s + beta * alpha * deficit, [0, 1]); only assigned tasks update.
Specialization update_specialization(const Specialization& spec, const VectorXi& alpha_col,
                                     const VectorXd& deficits, double beta);

struct FeatureFailure {
  int robot = 0;
  int feature = 0;
};

struct WeightChange {
  int capability = 0;
  int edge = 0;
  double weight = 0.0;
};

struct DisturbanceEvent {
  double trigger_time = 0.0;
  std::variant<FeatureFailure, WeightChange> change;
};

// Mapping surgery for detectable disturbances; F and the derived
// specializations are refreshed by the model mutation itself.
HeterogeneityModel apply_endogenous(const HeterogeneityModel& model,
                                    const DisturbanceEvent& event);

}  // namespace mrta
