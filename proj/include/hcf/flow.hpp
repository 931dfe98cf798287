#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcf/dopri5.hpp"
#include "hcf/forms.hpp"
#include "hcf/lie.hpp"

namespace hcf::flow {

using forms::HermitianForm;

/// Scalar quantity evaluated at each stored sample.
struct Monitor {
  std::string name;
  std::function<double(const HermitianForm&)> fn;
};

/// Solution of dh/dt = h^# sampled in time. Monitors always include
/// "sup_norm" and "min_eigenvalue", followed by any user-registered ones.
struct Trajectory {
  lie::LieAlgebra algebra;
  IntegratorConfig config;
  std::vector<double> times;
  std::vector<HermitianForm> forms;
  Termination termination = Termination::ReachedTEnd;
  double t_last = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::vector<std::string> monitor_names;
  std::vector<std::vector<double>> monitor_values;  // [monitor][sample]
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] bool failed() const { return termination == Termination::StepUnderflow; }
  [[nodiscard]] const std::vector<double>& monitor(const std::string& name) const;
};

Trajectory integrate(const lie::LieAlgebra& alg, const HermitianForm& h0,
                     const IntegratorConfig& cfg, const std::vector<Monitor>& extra_monitors = {});

/// Solution of l1' = l2 l3, l2' = l1 l3, l3' = l1 l2.
struct EigenvalueTrajectory {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> values;
  Termination termination = Termination::ReachedTEnd;
  double t_last = 0.0;
};

EigenvalueTrajectory su2_diagonal_flow(const Eigen::Vector3d& lambda0, const IntegratorConfig& cfg);

/// Series of min eigenvalue of h(t) - k(t) for two flows advanced on one time grid.
struct ComparisonSeries {
  std::vector<double> times;
  std::vector<double> min_eigenvalue_gap;
  Termination termination = Termination::ReachedTEnd;
};

ComparisonSeries comparison_monitor(const lie::LieAlgebra& alg, const HermitianForm& h0,
                                    const HermitianForm& k0, const IntegratorConfig& cfg);

nlohmann::json to_json(const IntegratorConfig& cfg);
IntegratorConfig integrator_config_from_json(const nlohmann::json& j,
                                             IntegratorConfig base = IntegratorConfig{});

}  // namespace hcf::flow
