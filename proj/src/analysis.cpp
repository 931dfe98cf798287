#include "hcf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hcf/errors.hpp"

namespace hcf::analysis {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Polynomial: return "Polynomial";
    case Regime::Exponential: return "Exponential";
    case Regime::FiniteTimeBlowup: return "FiniteTimeBlowup";
  }
  return "?";
}

namespace {

constexpr double kSimplerModelMargin = 1.05;
constexpr std::size_t kMinSamplesPastOne = 50;
constexpr std::size_t kMinBlowupWindow = 8;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
  double sst = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    f.sse += r * r;
  }
  f.sst = syy;
  return f;
}

ModelFit to_model(const LineFit& f, std::size_t n) {
  ModelFit m;
  m.admissible = true;
  m.slope = f.slope;
  m.intercept = f.intercept;
  m.mse = f.sse / static_cast<double>(n);
  m.r_squared = f.sst > 0 ? std::max(0.0, 1.0 - f.sse / f.sst) : 1.0;
  return m;
}

ModelFit fit_blowup(const std::vector<double>& t, const std::vector<double>& s) {
  const double t_lo = t.front();
  const double t_hi = t.back();
  const double span = std::max(t_hi - t_lo, 1e-300);
  const double gap_min = 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_hi));
  const double gap_max = 1e6 * std::max(span, gap_min);

  std::vector<double> x(t.size());
  auto fit_at = [&](double log_gap) {
    const double t_star = t_hi + std::exp(log_gap);
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = -std::log(t_star - t[i]);
    return fit_line(x, s);
  };

  const double lo = std::log(gap_min);
  const double hi = std::log(gap_max);
  constexpr int kGrid = 400;
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double sse = fit_at(lo + (hi - lo) * i / kGrid).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best = i;
    }
  }
  // Golden-section refinement between the neighbours of the best grid point.
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kGrid;
  double b = lo + (hi - lo) * std::min(best + 1, kGrid) / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = fit_at(c).sse;
  double fd = fit_at(d).sse;
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = fit_at(c).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = fit_at(d).sse;
    }
  }
  const double log_gap = 0.5 * (a + b);
  ModelFit m = to_model(fit_at(log_gap), t.size());
  m.t_star = t_hi + std::exp(log_gap);
  return m;
}

}  // namespace

GrowthReport classify_growth(const std::vector<double>& times, const std::vector<double>& sup_norms,
                             bool blowup_terminated) {
  if (times.size() != sup_norms.size()) throw ArgumentError("classify_growth: series length mismatch");
  const std::size_t n = times.size();
  std::size_t start = 0;
  if (blowup_terminated) {
    start = n - n / 4;
    if (n - start < kMinBlowupWindow)
      throw InsufficientDataError("classify_growth: blow-up window needs at least " +
                                  std::to_string(kMinBlowupWindow) + " samples");
  } else {
    const auto past_one = static_cast<std::size_t>(
        std::count_if(times.begin(), times.end(), [](double t) { return t > 1.0; }));
    if (past_one < kMinSamplesPastOne)
      throw InsufficientDataError("classify_growth: need at least 50 samples past t = 1, have " +
                                  std::to_string(past_one));
    start = n / 2;
  }

  std::vector<double> t, s, log_t, s_pos;
  for (std::size_t i = start; i < n; ++i) {
    t.push_back(times[i]);
    s.push_back(std::log(std::max(sup_norms[i], std::numeric_limits<double>::min())));
    if (times[i] > 0) {
      log_t.push_back(std::log(times[i]));
      s_pos.push_back(s.back());
    }
  }

  GrowthReport rep;
  rep.t_lo = t.front();
  rep.t_hi = t.back();
  rep.window_samples = t.size();

  if (log_t.size() >= 3) {
    rep.polynomial = to_model(fit_line(log_t, s_pos), log_t.size());
  } else {
    rep.polynomial.note = "window has too few positive times";
  }
  rep.exponential = to_model(fit_line(t, s), t.size());
  if (blowup_terminated) {
    rep.blowup = fit_blowup(t, s);
    const double gap = rep.blowup.t_star - rep.t_hi;
    if (!(rep.blowup.slope > 0)) {
      rep.blowup.admissible = false;
      rep.blowup.note = "non-positive blow-up exponent";
    } else if (gap > 0.5 * (rep.t_hi - rep.t_lo)) {
      rep.blowup.admissible = false;
      rep.blowup.note = "fitted singularity lies far beyond the window";
    }
  } else {
    rep.blowup.note = "trajectory did not terminate by blow-up";
  }

  // Residuals below roundoff are indistinguishable.
  double mean_sq = 0.0;
  for (double v : s) mean_sq += v * v;
  mean_sq /= static_cast<double>(s.size());
  const double floor = 1e-14 * std::max(1.0, mean_sq);
  auto eff = [floor](const ModelFit& m) {
    return m.admissible ? m.mse + floor : std::numeric_limits<double>::infinity();
  };

  // Order of simplicity: polynomial, exponential, blow-up.
  Regime winner = Regime::FiniteTimeBlowup;
  if (eff(rep.exponential) <= kSimplerModelMargin * eff(rep.blowup)) winner = Regime::Exponential;
  const ModelFit& runner = winner == Regime::Exponential ? rep.exponential : rep.blowup;
  if (eff(rep.polynomial) <= kSimplerModelMargin * eff(runner)) winner = Regime::Polynomial;

  rep.regime = winner;
  switch (winner) {
    case Regime::Polynomial:
      rep.degree = rep.polynomial.slope;
      rep.fit_quality = rep.polynomial.r_squared;
      break;
    case Regime::Exponential:
      rep.rate = rep.exponential.slope;
      rep.fit_quality = rep.exponential.r_squared;
      break;
    case Regime::FiniteTimeBlowup:
      rep.t_star = rep.blowup.t_star;
      rep.fit_quality = rep.blowup.r_squared;
      break;
  }
  return rep;
}

GrowthReport classify_growth(const flow::Trajectory& traj) {
  return classify_growth(traj.times, traj.monitor("sup_norm"),
                         traj.termination == flow::Termination::BlowupDetected);
}

double estimate_blowup_time(const flow::Trajectory& traj) {
  if (traj.termination != flow::Termination::BlowupDetected)
    throw ArgumentError("estimate_blowup_time: trajectory did not terminate by blow-up");
  const auto& norms = traj.monitor("sup_norm");
  const std::size_t n = traj.size();
  const std::size_t start = n - n / 4;
  if (n - start < 2) throw InsufficientDataError("estimate_blowup_time: too few samples");
  std::vector<double> t, inv;
  for (std::size_t i = start; i < n; ++i) {
    t.push_back(traj.times[i]);
    inv.push_back(1.0 / norms[i]);
  }
  const LineFit f = fit_line(t, inv);
  if (!(f.slope < 0)) throw InsufficientDataError("estimate_blowup_time: 1/sup_norm is not decreasing");
  return -f.intercept / f.slope;
}

std::vector<double> pinching_series(const flow::Trajectory& traj, const HermitianForm& target) {
  const double tnorm2 = forms::frobenius_inner(target, target);
  if (!(tnorm2 > 0)) throw ArgumentError("pinching_series: target form is zero");
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& h : traj.forms) {
    const double sup = forms::sup_norm(h);
    if (!(sup > 0)) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const HermitianForm normalized = (1.0 / sup) * h;
    const double s = std::max(0.0, forms::frobenius_inner(normalized, target) / tnorm2);
    out.push_back(forms::frobenius_norm(normalized - s * target));
  }
  return out;
}

EinsteinReport einstein_residual(const lie::LieAlgebra& alg, const HermitianForm& h) {
  const double hh = forms::frobenius_inner(h, h);
  if (!(hh > 0)) throw ArgumentError("einstein_residual: zero form");
  const HermitianForm hs = forms::sharp_square(alg, h);
  EinsteinReport rep;
  rep.lambda_star = forms::frobenius_inner(hs, h) / hh;
  const double off = forms::frobenius_norm(hs - rep.lambda_star * h);
  if (off == 0.0) {
    rep.residual = 0.0;
  } else {
    const double along = std::abs(rep.lambda_star) * std::sqrt(hh);
    rep.residual = along > 0 ? off / along : std::numeric_limits<double>::infinity();
  }
  return rep;
}

HermitianForm renormalize_fixed_point(const lie::LieAlgebra& alg, const HermitianForm& h) {
  const EinsteinReport rep = einstein_residual(alg, h);
  if (!(rep.lambda_star > 0))
    throw ArgumentError("renormalize_fixed_point: lambda_star must be positive");
  return (1.0 / rep.lambda_star) * h;
}

namespace {

int numeric_rank(const CMatrix& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  Eigen::BDCSVD<CMatrix> svd(m);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

CMatrix columns(const std::vector<CVector>& vs, int rows) {
  CMatrix m(rows, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = vs[i];
  return m;
}

}  // namespace

KernelCheck kernel_annihilator_check(const lie::LieAlgebra& alg, const HermitianForm& h,
                                     const HermitianForm& k) {
  constexpr double kTol = 1e-8;
  if (forms::positivity(h).status != forms::Positivity::PositiveDefinite ||
      forms::positivity(k).status != forms::Positivity::PositiveDefinite)
    throw ArgumentError("kernel_annihilator_check: h and k must be positive definite");
  const int d = alg.dim();
  const HermitianForm s = forms::sharp(alg, h, k);
  const auto pos = forms::positivity(s, kTol * std::max(1.0, forms::sup_norm(s)));
  const CMatrix K = columns(pos.kernel_basis, d);

  // A covector xi annihilates [g,g] iff D^T xi = 0; kernel vectors of the form are
  // conj(xi), i.e. the orthogonal complement of span(D).
  const auto cls = lie::classify_algebra(alg);
  const CMatrix D = columns(cls.derived_subalgebra_basis, d);
  CMatrix A;
  if (D.cols() == 0) {
    A = CMatrix::Identity(d, d);
  } else {
    Eigen::BDCSVD<CMatrix> svd(D, Eigen::ComputeFullU);
    const int r = numeric_rank(D, kTol);
    A = svd.matrixU().rightCols(d - r);
  }

  KernelCheck out;
  out.kernel_dim = static_cast<int>(K.cols());
  out.annihilator_dim = static_cast<int>(A.cols());
  CMatrix joint(d, K.cols() + A.cols());
  joint << K, A;
  out.joint_rank = numeric_rank(joint, kTol);
  out.agrees = out.kernel_dim == out.annihilator_dim && out.joint_rank == out.kernel_dim;
  return out;
}

nlohmann::json to_json(const GrowthReport& r) {
  auto model = [](const ModelFit& m) {
    return nlohmann::json{{"admissible", m.admissible}, {"mse", m.mse},
                          {"r_squared", m.r_squared},   {"slope", m.slope},
                          {"intercept", m.intercept},   {"t_star", m.t_star},
                          {"note", m.note}};
  };
  nlohmann::json j = {{"regime", to_string(r.regime)},
                      {"fit_quality", r.fit_quality},
                      {"window", {r.t_lo, r.t_hi}},
                      {"window_samples", r.window_samples},
                      {"diagnostics",
                       {{"polynomial", model(r.polynomial)},
                        {"exponential", model(r.exponential)},
                        {"blowup", model(r.blowup)}}}};
  switch (r.regime) {
    case Regime::Polynomial: j["degree"] = r.degree; break;
    case Regime::Exponential: j["rate"] = r.rate; break;
    case Regime::FiniteTimeBlowup: j["t_star"] = r.t_star; break;
  }
  return j;
}

nlohmann::json to_json(const EinsteinReport& r) {
  return {{"lambda_star", r.lambda_star}, {"residual", r.residual}};
}

}  // namespace hcf::analysis
