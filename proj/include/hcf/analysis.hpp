#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hcf/flow.hpp"
#include "hcf/forms.hpp"
#include "hcf/lie.hpp"

namespace hcf::analysis {

using forms::HermitianForm;

enum class Regime { Polynomial, Exponential, FiniteTimeBlowup };

std::string to_string(Regime r);

/// One candidate model for s(t) = log sup_norm(h(t)) on the fit window.
struct ModelFit {
  bool admissible = false;
  double mse = 0.0;
  double r_squared = 0.0;
  double slope = 0.0;      // alpha, K or beta
  double intercept = 0.0;
  double t_star = 0.0;     // blow-up model only
  std::string note;
};

struct GrowthReport {
  Regime regime = Regime::Polynomial;
  double degree = 0.0;  // Polynomial
  double rate = 0.0;    // Exponential
  double t_star = 0.0;  // FiniteTimeBlowup
  double fit_quality = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t window_samples = 0;
  ModelFit polynomial;
  ModelFit exponential;
  ModelFit blowup;
};

/// Fits alpha log t + c, K t + c and -beta log(t* - t) + c to log sup_norm on the
/// trailing window and picks the smallest residual, preferring simpler models within 5%.
GrowthReport classify_growth(const flow::Trajectory& traj);

/// Same, from raw series; `blowup_terminated` selects the window rule and admits the
/// blow-up model.
GrowthReport classify_growth(const std::vector<double>& times, const std::vector<double>& sup_norms,
                             bool blowup_terminated);

/// Root of the linear fit of 1/sup_norm against t on the trailing window.
double estimate_blowup_time(const flow::Trajectory& traj);

/// d(t) = min_{s>0} || h(t)/sup_norm(h(t)) - s * target ||_F.
std::vector<double> pinching_series(const flow::Trajectory& traj, const HermitianForm& target);

struct EinsteinReport {
  double lambda_star = 0.0;
  /// tan of the Frobenius angle between h^# and h; 0 iff h^# = lambda_star h.
  double residual = 0.0;
};

EinsteinReport einstein_residual(const lie::LieAlgebra& alg, const HermitianForm& h);

/// h / lambda_star, a fixed point of h -> h^# when h^# is proportional to h.
HermitianForm renormalize_fixed_point(const lie::LieAlgebra& alg, const HermitianForm& h);

struct KernelCheck {
  bool agrees = false;
  int kernel_dim = 0;
  int annihilator_dim = 0;
  int joint_rank = 0;
};

/// Compares ker(h#k) with the annihilator of [g, g] by mutual rank tests at 1e-8.
KernelCheck kernel_annihilator_check(const lie::LieAlgebra& alg, const HermitianForm& h,
                                     const HermitianForm& k);

nlohmann::json to_json(const GrowthReport& r);
nlohmann::json to_json(const EinsteinReport& r);

}  // namespace hcf::analysis
