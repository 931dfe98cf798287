#pragma once

#include <span>
#include <vector>

#include "hcf/forms.hpp"

namespace hcf::flow {

/// Dense real polynomial, coefficient i multiplies x^i.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] int degree() const;  // -1 for the zero polynomial
  [[nodiscard]] const std::vector<double>& coefficients() const { return c_; }
  [[nodiscard]] double coefficient(int i) const {
    return i < static_cast<int>(c_.size()) ? c_[i] : 0.0;
  }

  Polynomial& operator+=(const Polynomial& o);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  /// Antiderivative with zero constant term.
  [[nodiscard]] Polynomial integral() const;

 private:
  void trim();
  std::vector<double> c_;
};

/// Closed-form solution of the flow restricted to diagonal "band" forms
///   f = sum_{i<=j} f^{(j-i)} E_ij (x) conj(E_ij)
/// on strict_upper(n) (bands 1..n-1) or borel(n) (bands 0..n-1).
///
/// NilpotentPolynomial: band k is a polynomial of degree k-1 in t.
/// BorelExponential: band 0 is constant, band k >= 1 is a polynomial of degree k in
/// u = exp(rate * t), rate = 2 f^{(0)}, with zero constant term.
struct BandSolution {
  enum class Kind { NilpotentPolynomial, BorelExponential };

  Kind kind = Kind::NilpotentPolynomial;
  int n = 0;
  int first_band = 1;  // 1 on strict_upper(n), 0 on borel(n)
  double rate = 0.0;
  std::vector<Polynomial> bands;  // bands[i] is band first_band + i

  [[nodiscard]] double value(int band, double t) const;
  /// All band values at t, in the order the initial data was given.
  [[nodiscard]] std::vector<double> values(double t) const;
  /// Asymptotic exponential rate of the top band (0 for polynomial solutions).
  [[nodiscard]] double top_band_rate() const;
};

/// Bands evolve by d/dt f^{(k)} = sum_{j=1}^{k-1} f^{(j)} f^{(k-j)}.
BandSolution nilpotent_band_closed_form(int n, std::span<const double> f0);

/// Bands evolve by d/dt f^{(k)} = 2 f^{(0)} f^{(k)} + sum_{j=1}^{k-1} f^{(j)} f^{(k-j)},
/// f^{(0)} constant. With f^{(0)} = 0 this degenerates to the nilpotent recursion.
BandSolution borel_band_closed_form(int n, std::span<const double> f0);

/// Diagonal band form on strict_upper(n); f has n-1 entries (bands 1..n-1).
forms::HermitianForm nilpotent_band_form(int n, std::span<const double> f);

/// Diagonal band form on borel(n); f has n entries (bands 0..n-1).
forms::HermitianForm borel_band_form(int n, std::span<const double> f);

/// Mean diagonal value on each band, matching the basis order of strict_upper/borel.
std::vector<double> band_values(const forms::HermitianForm& h, int n, int first_band);

}  // namespace hcf::flow
