#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "json.hpp"

#include "hcf/lie.hpp"
#include "hcf/types.hpp"

namespace hcf::forms {

/// Element of Sym^{1,1}(g): m(a, b) is the coefficient of e_a (x) conj(e_b).
/// The stored matrix is always exactly Hermitian.
class HermitianForm {
 public:
  HermitianForm() = default;
  explicit HermitianForm(CMatrix m);

  static HermitianForm zero(int dim);
  static HermitianForm identity(int dim);
  static HermitianForm diagonal(const RVector& values);

  [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
  [[nodiscard]] const CMatrix& matrix() const { return m_; }
  [[nodiscard]] Complex operator()(int a, int b) const { return m_(a, b); }

  HermitianForm& operator+=(const HermitianForm& o);
  HermitianForm& operator-=(const HermitianForm& o);
  HermitianForm& operator*=(double s);

 private:
  CMatrix m_;
};

HermitianForm operator+(HermitianForm a, const HermitianForm& b);
HermitianForm operator-(HermitianForm a, const HermitianForm& b);
HermitianForm operator*(double s, HermitianForm a);

/// (h#k)(a,b) = sum c[e][d][a] conj(c[g][t][b]) h(e,g) k(d,t).
HermitianForm sharp(const lie::LieAlgebra& alg, const HermitianForm& h, const HermitianForm& k);

/// h^# = sharp(h, h) / 2.
HermitianForm sharp_square(const lie::LieAlgebra& alg, const HermitianForm& h);

/// Embeds a real symmetric form as a Hermitian one with zero imaginary part.
HermitianForm complexify(const RMatrix& h_real);

enum class Positivity { PositiveDefinite, PositiveSemidefinite, Indefinite };

std::string to_string(Positivity p);

struct PositivityReport {
  Positivity status = Positivity::Indefinite;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  std::vector<CVector> kernel_basis;  // eigenvectors with |lambda| < tol
};

/// 1e-10 * max(1, largest |eigenvalue|).
double default_positivity_tolerance(const HermitianForm& h);

PositivityReport positivity(const HermitianForm& h, double tol);
PositivityReport positivity(const HermitianForm& h);

/// rho * m * rho^H.
HermitianForm pushforward(const lie::Homomorphism& rho, const HermitianForm& h);

/// Re <h#k, l> with the metric `inner` on g extended to g (x) conj(g).
double trilinear(const lie::LieAlgebra& alg, const HermitianForm& inner, const HermitianForm& h,
                 const HermitianForm& k, const HermitianForm& l);

/// Largest |eigenvalue|.
double sup_norm(const HermitianForm& h);

double min_eigenvalue(const HermitianForm& h);

double frobenius_norm(const HermitianForm& h);

/// Re tr(a b^H).
double frobenius_inner(const HermitianForm& a, const HermitianForm& b);

/// Upper-triangle listing [[a, b, re, im], ...] with a <= b.
nlohmann::json to_json(const HermitianForm& h);
HermitianForm form_from_json(const nlohmann::json& j, int dim);

/// scale * (L L^H + 1e-3 I), L with standard complex Gaussian entries.
HermitianForm random_positive_definite(int dim, std::mt19937_64& rng, double scale = 1.0);

/// Diagonal of random_positive_definite: positive, seeded, diagonal.
HermitianForm random_positive_diagonal(int dim, std::mt19937_64& rng, double scale = 1.0);

}  // namespace hcf::forms
