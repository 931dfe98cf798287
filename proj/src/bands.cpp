#include "hcf/bands.hpp"

#include <cmath>

#include "hcf/errors.hpp"

namespace hcf::flow {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

int Polynomial::degree() const { return static_cast<int>(c_.size()) - 1; }

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  trim();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c_.empty() || b.c_.empty()) return {};
  std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::integral() const {
  std::vector<double> out(c_.size() + 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) out[i + 1] = c_[i] / static_cast<double>(i + 1);
  return Polynomial(std::move(out));
}

double BandSolution::value(int band, double t) const {
  const int idx = band - first_band;
  if (idx < 0 || idx >= static_cast<int>(bands.size()))
    throw ArgumentError("BandSolution: band index out of range");
  if (kind == Kind::NilpotentPolynomial || band == 0) return bands[idx](t);
  return bands[idx](std::exp(rate * t));
}

std::vector<double> BandSolution::values(double t) const {
  std::vector<double> out;
  for (int i = 0; i < static_cast<int>(bands.size()); ++i) out.push_back(value(first_band + i, t));
  return out;
}

double BandSolution::top_band_rate() const {
  if (kind == Kind::NilpotentPolynomial) return 0.0;
  return rate * bands.back().degree();
}

namespace {

// Sum_{j=1}^{k-1} f^{(j)} f^{(k-j)} with bands[j-1] = f^{(j)}, offset for band 0.
Polynomial convolution(const std::vector<Polynomial>& bands, int k, int first_band) {
  Polynomial s;
  for (int j = 1; j <= k - 1; ++j) s += bands[j - first_band] * bands[k - j - first_band];
  return s;
}

void check_inputs(int n, std::size_t got, std::size_t want, const char* who) {
  if (n < 2) throw ArgumentError(std::string(who) + ": n must be >= 2");
  if (got != want)
    throw ArgumentError(std::string(who) + ": expected " + std::to_string(want) +
                        " initial band values, got " + std::to_string(got));
}

}  // namespace

BandSolution nilpotent_band_closed_form(int n, std::span<const double> f0) {
  check_inputs(n, f0.size(), n >= 2 ? static_cast<std::size_t>(n - 1) : 0, "nilpotent_band_closed_form");
  BandSolution sol;
  sol.kind = BandSolution::Kind::NilpotentPolynomial;
  sol.n = n;
  sol.first_band = 1;
  for (int k = 1; k <= n - 1; ++k) {
    Polynomial p = convolution(sol.bands, k, 1).integral();
    p += Polynomial({f0[k - 1]});
    sol.bands.push_back(std::move(p));
  }
  return sol;
}

BandSolution borel_band_closed_form(int n, std::span<const double> f0) {
  check_inputs(n, f0.size(), static_cast<std::size_t>(std::max(n, 0)), "borel_band_closed_form");
  const double diag = f0[0];
  if (diag == 0.0) {
    // Diagonal coupling vanishes; the remaining bands follow the nilpotent recursion in t.
    BandSolution sol = nilpotent_band_closed_form(n, f0.subspan(1));
    sol.first_band = 0;
    sol.bands.insert(sol.bands.begin(), Polynomial{});
    return sol;
  }
  BandSolution sol;
  sol.kind = BandSolution::Kind::BorelExponential;
  sol.n = n;
  sol.first_band = 0;
  sol.rate = 2.0 * diag;
  sol.bands.push_back(Polynomial({diag}));
  for (int k = 1; k <= n - 1; ++k) {
    // d/dt sum_m a_m u^m = rate * sum_m a_m u^m + sum_m s_m u^m with d/dt u^m = m rate u^m,
    // so a_m (m - 1) rate = s_m for m >= 2, and a_1 fixes the initial value.
    const Polynomial s = convolution(sol.bands, k, 0);
    std::vector<double> a(static_cast<std::size_t>(k) + 1, 0.0);
    double tail = 0.0;
    for (int m = 2; m <= s.degree(); ++m) {
      a[m] = s.coefficient(m) / (sol.rate * (m - 1));
      tail += a[m];
    }
    a[1] = f0[k] - tail;
    sol.bands.emplace_back(std::move(a));
  }
  return sol;
}

namespace {

forms::HermitianForm band_form(int n, int first_band, std::span<const double> f) {
  if (n < 2) throw ArgumentError("band form: n must be >= 2");
  if (static_cast<int>(f.size()) != n - first_band)
    throw ArgumentError("band form: wrong number of band values");
  std::vector<double> diag;
  for (int band = first_band; band < n; ++band)
    for (int i = 0; i + band < n; ++i) diag.push_back(f[band - first_band]);
  return forms::HermitianForm::diagonal(Eigen::Map<const RVector>(diag.data(), diag.size()));
}

}  // namespace

forms::HermitianForm nilpotent_band_form(int n, std::span<const double> f) {
  return band_form(n, 1, f);
}

forms::HermitianForm borel_band_form(int n, std::span<const double> f) {
  return band_form(n, 0, f);
}

std::vector<double> band_values(const forms::HermitianForm& h, int n, int first_band) {
  std::vector<double> out;
  int idx = 0;
  for (int band = first_band; band < n; ++band) {
    double sum = 0.0;
    const int count = n - band;
    for (int i = 0; i < count; ++i, ++idx) sum += h(idx, idx).real();
    out.push_back(sum / count);
  }
  if (idx != h.dim()) throw ArgumentError("band_values: form dimension does not match n");
  return out;
}

}  // namespace hcf::flow
