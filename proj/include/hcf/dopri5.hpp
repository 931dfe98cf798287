#pragma once

// Dormand-Prince 5(4) with PI step-size control (Hairer, Norsett & Wanner, DOPRI5),
// generic over Eigen dense state types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hcf/errors.hpp"

namespace hcf::flow {

enum class Termination { ReachedTEnd, BlowupDetected, StepUnderflow, MaxSteps };

std::string to_string(Termination t);

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double t_end = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  double blowup_norm = 1e12;
  double min_step = 1e-14;
  /// 0 records every accepted step; > 0 records the grid k * sample_interval,
  /// and the integrator lands on each grid point exactly.
  double sample_interval = 0.0;
  /// With a sample grid, also record the accepted steps in between.
  bool record_steps = false;
  /// Thinning cap; the effective cap is max(10^4, max_samples).
  std::size_t max_samples = 10'000;
  /// 0 picks the first step automatically.
  double initial_step = 0.0;

  void validate() const;
};

template <class State>
struct OdeSolution {
  std::vector<double> times;
  std::vector<State> states;
  Termination termination = Termination::ReachedTEnd;
  double t_last = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace detail {

// Butcher tableau of DOPRI5.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

inline constexpr double kSafety = 0.9;
inline constexpr double kBeta = 0.04;
inline constexpr double kExpo = 0.2 - kBeta * 0.75;
inline constexpr double kMaxShrink = 5.0;   // hnew >= h / 5
inline constexpr double kMaxGrowth = 10.0;  // hnew <= 10 h
inline constexpr double kMaxStep = 1e150;
// A step underflow counts as blow-up once the solution has grown by this factor.
inline constexpr double kGrowthForBlowup = 1e2;

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1, double atol, double rtol) {
  const auto scale = atol + rtol * y0.array().abs().max(y1.array().abs());
  return (err.array().abs() / scale).maxCoeff();
}

template <class State>
bool all_finite(const State& y) {
  return y.array().abs().isFinite().all();
}

}  // namespace detail

/// Integrates y' = rhs(y) from t = 0. `size(y)` drives blow-up detection; `repair(y)`
/// projects each accepted state back onto the invariant set.
template <class State, class Rhs, class Size, class Repair>
OdeSolution<State> dormand_prince(Rhs&& rhs, State y, const IntegratorConfig& cfg, Size&& size,
                                  Repair&& repair) {
  using namespace detail;
  cfg.validate();
  OdeSolution<State> sol;
  const std::size_t cap = std::max<std::size_t>(10'000, cfg.max_samples);
  const bool grid = cfg.sample_interval > 0;
  const double size0 = size(y);

  double t = 0.0;
  std::size_t next_grid = 1;
  auto grid_time = [&](std::size_t k) { return static_cast<double>(k) * cfg.sample_interval; };

  auto record = [&](double tt, const State& yy) {
    if (!sol.times.empty() && !(tt > sol.times.back())) return;
    sol.times.push_back(tt);
    sol.states.push_back(yy);
    if (sol.times.size() > cap) {
      // Keep every other interior sample plus the newest one.
      std::vector<double> tk;
      std::vector<State> yk;
      const std::size_t last = sol.times.size() - 1;
      for (std::size_t i = 0; i < last; i += 2) {
        tk.push_back(sol.times[i]);
        yk.push_back(std::move(sol.states[i]));
      }
      tk.push_back(sol.times[last]);
      yk.push_back(std::move(sol.states[last]));
      sol.times = std::move(tk);
      sol.states = std::move(yk);
    }
  };

  auto finish = [&](Termination why) {
    sol.termination = why;
    sol.t_last = t;
    if (sol.times.empty() || sol.times.back() < t) record(t, y);
    return sol;
  };

  record(0.0, y);
  if (size0 > cfg.blowup_norm) return finish(Termination::BlowupDetected);

  State k1 = rhs(y);
  const double t_end = cfg.t_end;

  double h = cfg.initial_step;
  if (!(h > 0)) {
    // Starting step from the local scale of y and y'.
    const State zero = y * 0.0;
    auto norm = [&](const State& v) { return scaled_error(v, y, zero, cfg.abs_tol, cfg.rel_tol); };
    const double d0 = norm(y);
    const double d1 = norm(k1);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (std::isfinite(t_end)) h0 = std::min(h0, t_end);
    const State y1 = y + h0 * k1;
    const State f1 = rhs(y1);
    const double d2 = norm(f1 - k1) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100 * h0, h1);
  }

  double facold = 1e-4;
  bool last_rejected = false;

  while (true) {
    if (t >= t_end) return finish(Termination::ReachedTEnd);
    if (sol.accepted + sol.rejected >= cfg.max_steps) return finish(Termination::MaxSteps);

    h = std::min(h, kMaxStep);
    double h_try = h;
    double t_target = t + h;
    bool clipped = false;
    if (t_target >= t_end) {
      h_try = t_end - t;
      t_target = t_end;
      clipped = true;
    }
    if (grid && t_target >= grid_time(next_grid)) {
      const double tg = grid_time(next_grid);
      if (tg <= t_target) {
        h_try = tg - t;
        t_target = tg;
        clipped = true;
      }
    }

    const State k2 = rhs(State(y + h_try * (a21 * k1)));
    const State k3 = rhs(State(y + h_try * (a31 * k1 + a32 * k2)));
    const State k4 = rhs(State(y + h_try * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 = rhs(State(y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 =
        rhs(State(y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    State y_new = y + h_try * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const State k7 = rhs(y_new);
    const State err = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = scaled_error(err, y, y_new, cfg.abs_tol, cfg.rel_tol);
    if (!std::isfinite(err_norm) || !all_finite(y_new) || !all_finite(k7))
      err_norm = std::numeric_limits<double>::infinity();

    const double fac11 = std::isfinite(err_norm) ? std::pow(err_norm, kExpo) : kMaxShrink;
    double h_new;
    if (err_norm <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxGrowth, kMaxShrink);
      h_new = h_try / fac;
      facold = std::max(err_norm, 1e-4);
      if (last_rejected) h_new = std::min(h_new, h_try);
      if (clipped) h_new = std::max(h_new, h);
      last_rejected = false;

      t = t_target;
      y = repair(std::move(y_new));
      k1 = k7;
      ++sol.accepted;

      const bool on_grid = grid && t == grid_time(next_grid);
      if (on_grid) ++next_grid;
      if (!grid || on_grid || cfg.record_steps || t >= t_end) record(t, y);

      if (size(y) > cfg.blowup_norm) return finish(Termination::BlowupDetected);
    } else {
      h_new = h_try / std::min(kMaxShrink, fac11 / kSafety);
      last_rejected = true;
      ++sol.rejected;
    }

    if (h_new < cfg.min_step && t < t_end) {
      const double grown = size(y);
      const bool growth = grown > kGrowthForBlowup * std::max(size0, 1e-300);
      return finish(growth ? Termination::BlowupDetected : Termination::StepUnderflow);
    }
    h = h_new;
  }
}

}  // namespace hcf::flow
