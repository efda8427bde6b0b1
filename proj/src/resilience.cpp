#include "mrta/resilience.hpp"

#include <algorithm>
#include <stdexcept>

namespace mrta {

Ensemble simulate_nominal(const ProgressLedger& ledger, int robot, const Dynamics& dyn) {
  if (robot < 0 || robot >= ledger.previous_state.num_robots())
    throw std::out_of_range("simulate_nominal: robot index");
  Ensemble sim = ledger.previous_state;
  const VectorXd& xi = ledger.previous_state.x[robot];
  const VectorXd& ui = ledger.previous_input[robot];
  sim.x[robot] = xi + (dyn.f(xi) + dyn.g(xi) * ui) * ledger.dt;
  return sim;
}

double progress_deficit(const Task& task, int robot, const Ensemble& actual,
                        const Ensemble& simulated, double t) {
  const double h_act = task.value(robot, actual.x[robot], actual, t);
  const double h_sim = task.value(robot, simulated.x[robot], simulated, t);
  return std::min(0.0, h_act - h_sim);
}

Specialization update_specialization(const Specialization& spec, const VectorXi& alpha_col,
                                     const VectorXd& deficits, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("update_specialization: beta must be positive");
  Specialization next = spec;
  for (int m = 0; m < spec.s.size(); ++m) {
    if (alpha_col[m] == 0) continue;
    next.s[m] = std::clamp(spec.s[m] + beta * deficits[m], 0.0, 1.0);
  }
  return next;
}

HeterogeneityModel apply_endogenous(const HeterogeneityModel& model,
                                    const DisturbanceEvent& event) {
  if (const auto* failure = std::get_if<FeatureFailure>(&event.change))
    return model.with_feature_failure(failure->robot, failure->feature);
  const auto& change = std::get<WeightChange>(event.change);
  return model.with_hyperedge_weight(change.capability, change.edge, change.weight);
}

}  // namespace mrta
