#include "hcf/flow.hpp"

#include <cmath>
#include <limits>

#include "hcf/errors.hpp"

namespace hcf::flow {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTEnd: return "ReachedTEnd";
    case Termination::BlowupDetected: return "BlowupDetected";
    case Termination::StepUnderflow: return "StepUnderflow";
    case Termination::MaxSteps: return "MaxSteps";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(blowup_norm > 0) || !(min_step > 0))
    throw ArgumentError("integrator: rel_tol, abs_tol, blowup_norm and min_step must be positive");
  if (!(t_end > 0)) throw ArgumentError("integrator: t_end must be positive");
  if (sample_interval < 0) throw ArgumentError("integrator: sample_interval must be >= 0");
  if (max_steps == 0) throw ArgumentError("integrator: max_steps must be positive");
}

const std::vector<double>& Trajectory::monitor(const std::string& name) const {
  for (std::size_t i = 0; i < monitor_names.size(); ++i)
    if (monitor_names[i] == name) return monitor_values[i];
  throw ArgumentError("trajectory has no monitor '" + name + "'");
}

namespace {

CMatrix hermitian_part(CMatrix m) {
  const CMatrix adj = m.adjoint();
  return (m + adj) * 0.5;
}

double matrix_sup_norm(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Trajectory integrate(const lie::LieAlgebra& alg, const HermitianForm& h0,
                     const IntegratorConfig& cfg, const std::vector<Monitor>& extra_monitors) {
  if (h0.dim() != alg.dim()) throw ArgumentError("integrate: initial form has the wrong dimension");
  Trajectory traj{alg, cfg};
  const auto pos = forms::positivity(h0);
  if (pos.status == forms::Positivity::Indefinite)
    traj.warnings.push_back("initial form is indefinite (min eigenvalue " +
                            std::to_string(pos.min_eigenvalue) + ")");

  auto rhs = [&alg](const CMatrix& y) -> CMatrix {
    return forms::sharp_square(alg, HermitianForm(y)).matrix();
  };
  auto sol = dormand_prince(rhs, h0.matrix(), cfg, matrix_sup_norm, hermitian_part);

  traj.times = std::move(sol.times);
  traj.forms.reserve(sol.states.size());
  for (auto& s : sol.states) traj.forms.emplace_back(std::move(s));
  traj.termination = sol.termination;
  traj.t_last = sol.t_last;
  traj.accepted_steps = sol.accepted;
  traj.rejected_steps = sol.rejected;

  std::vector<Monitor> monitors = {{"sup_norm", forms::sup_norm},
                                   {"min_eigenvalue", forms::min_eigenvalue}};
  monitors.insert(monitors.end(), extra_monitors.begin(), extra_monitors.end());
  for (const auto& m : monitors) {
    traj.monitor_names.push_back(m.name);
    std::vector<double> values;
    values.reserve(traj.forms.size());
    for (const auto& f : traj.forms) values.push_back(m.fn(f));
    traj.monitor_values.push_back(std::move(values));
  }
  return traj;
}

EigenvalueTrajectory su2_diagonal_flow(const Eigen::Vector3d& lambda0, const IntegratorConfig& cfg) {
  if (!(lambda0.minCoeff() > 0)) throw ArgumentError("su2_diagonal_flow: eigenvalues must be positive");
  auto rhs = [](const Eigen::Vector3d& l) -> Eigen::Vector3d {
    return {l(1) * l(2), l(0) * l(2), l(0) * l(1)};
  };
  auto size = [](const Eigen::Vector3d& l) { return l.cwiseAbs().maxCoeff(); };
  auto identity = [](Eigen::Vector3d l) { return l; };
  auto sol = dormand_prince(rhs, Eigen::Vector3d(lambda0), cfg, size, identity);
  return {std::move(sol.times), std::move(sol.states), sol.termination, sol.t_last};
}

ComparisonSeries comparison_monitor(const lie::LieAlgebra& alg, const HermitianForm& h0,
                                    const HermitianForm& k0, const IntegratorConfig& cfg) {
  const int d = alg.dim();
  if (h0.dim() != d || k0.dim() != d)
    throw ArgumentError("comparison_monitor: forms do not match the algebra dimension");
  const double tol = 1e-10 * std::max(1.0, forms::sup_norm(h0));
  const double gap0 = forms::min_eigenvalue(h0 - k0);
  if (gap0 < -tol)
    throw ArgumentError("comparison_monitor: h0 >= k0 fails (min eigenvalue of h0 - k0 = " +
                        std::to_string(gap0) + ")");
  const double kmin = forms::min_eigenvalue(k0);
  if (kmin < -tol)
    throw ArgumentError("comparison_monitor: k0 >= 0 fails (min eigenvalue of k0 = " +
                        std::to_string(kmin) + ")");

  // Both flows stacked as one state [h; k] so they share every step.
  CMatrix y0(2 * d, d);
  y0.topRows(d) = h0.matrix();
  y0.bottomRows(d) = k0.matrix();
  auto rhs = [&alg, d](const CMatrix& y) -> CMatrix {
    CMatrix out(2 * d, d);
    out.topRows(d) = forms::sharp_square(alg, HermitianForm(y.topRows(d))).matrix();
    out.bottomRows(d) = forms::sharp_square(alg, HermitianForm(y.bottomRows(d))).matrix();
    return out;
  };
  auto size = [d](const CMatrix& y) {
    return std::max(matrix_sup_norm(y.topRows(d)), matrix_sup_norm(y.bottomRows(d)));
  };
  auto repair = [d](CMatrix y) {
    CMatrix out(2 * d, d);
    out.topRows(d) = hermitian_part(y.topRows(d));
    out.bottomRows(d) = hermitian_part(y.bottomRows(d));
    return out;
  };
  auto sol = dormand_prince(rhs, y0, cfg, size, repair);

  ComparisonSeries out;
  out.times = sol.times;
  out.termination = sol.termination;
  for (const auto& y : sol.states) {
    const CMatrix diff = y.topRows(d) - y.bottomRows(d);
    out.min_eigenvalue_gap.push_back(forms::min_eigenvalue(HermitianForm(diff)));
  }
  return out;
}

nlohmann::json to_json(const IntegratorConfig& cfg) {
  nlohmann::json j = {{"rel_tol", cfg.rel_tol},
                      {"abs_tol", cfg.abs_tol},
                      {"max_steps", cfg.max_steps},
                      {"blowup_norm", cfg.blowup_norm},
                      {"min_step", cfg.min_step},
                      {"sample_interval", cfg.sample_interval},
                      {"record_steps", cfg.record_steps},
                      {"max_samples", cfg.max_samples},
                      {"initial_step", cfg.initial_step}};
  if (std::isfinite(cfg.t_end))
    j["t_end"] = cfg.t_end;
  else
    j["t_end"] = nullptr;
  return j;
}

IntegratorConfig integrator_config_from_json(const nlohmann::json& j, IntegratorConfig cfg) {
  try {
    if (j.contains("rel_tol")) cfg.rel_tol = j.at("rel_tol").get<double>();
    if (j.contains("abs_tol")) cfg.abs_tol = j.at("abs_tol").get<double>();
    if (j.contains("t_end"))
      cfg.t_end = j.at("t_end").is_null() ? std::numeric_limits<double>::infinity()
                                           : j.at("t_end").get<double>();
    if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps").get<std::size_t>();
    if (j.contains("blowup_norm")) cfg.blowup_norm = j.at("blowup_norm").get<double>();
    if (j.contains("min_step")) cfg.min_step = j.at("min_step").get<double>();
    if (j.contains("sample_interval")) cfg.sample_interval = j.at("sample_interval").get<double>();
    if (j.contains("record_steps")) cfg.record_steps = j.at("record_steps").get<bool>();
    if (j.contains("max_samples")) cfg.max_samples = j.at("max_samples").get<std::size_t>();
    if (j.contains("initial_step")) cfg.initial_step = j.at("initial_step").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("integrator config: ") + e.what());
  }
  return cfg;
}

}  // namespace hcf::flow
