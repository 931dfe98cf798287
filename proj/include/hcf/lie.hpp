#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hcf/errors.hpp"
#include "hcf/types.hpp"

namespace hcf::lie {

/// One structure constant c[alpha][beta][gamma] with alpha < beta.
struct StructureConstant {
  int alpha = 0;
  int beta = 0;
  int gamma = 0;
  Complex value;
};

/// Recipe for a Lie algebra. Serializes to the JSON form
/// {"kind":"strict_upper","n":3} / {"kind":"custom","dim":3,"constants":[[a,b,g,re,im],...]}.
struct AlgebraSpec {
  enum class Kind { Su2c, StrictUpper, Borel, Heisenberg3, Abelian, DirectSum, Custom };

  Kind kind = Kind::Su2c;
  int n = 0;                              // strict_upper / borel / abelian size, custom dim
  std::vector<AlgebraSpec> summands;      // direct_sum, exactly two
  std::vector<StructureConstant> constants;  // custom, alpha < beta only

  static AlgebraSpec su2c() { return {Kind::Su2c}; }
  static AlgebraSpec strict_upper(int n) { return {Kind::StrictUpper, n}; }
  static AlgebraSpec borel(int n) { return {Kind::Borel, n}; }
  static AlgebraSpec heisenberg3() { return {Kind::Heisenberg3}; }
  static AlgebraSpec abelian(int n) { return {Kind::Abelian, n}; }
  static AlgebraSpec direct_sum(AlgebraSpec a, AlgebraSpec b);
  static AlgebraSpec custom(int dim, std::vector<StructureConstant> constants);

  /// Compact text form: "su2c", "strict_upper:3", "direct_sum(su2c,borel:2)".
  /// Custom algebras render as their JSON.
  [[nodiscard]] std::string to_string() const;
};

nlohmann::json to_json(const AlgebraSpec& spec);
AlgebraSpec algebra_spec_from_json(const nlohmann::json& j);

/// Accepts either the compact text form or a JSON object.
AlgebraSpec parse_algebra_spec(std::string_view text);

/// Finite-dimensional complex Lie algebra, [e_a, e_b] = sum_g c[a][b][g] e_g.
/// Only the a < b constants are supplied; the rest follow from antisymmetry.
class LieAlgebra {
 public:
  /// Validates antisymmetry of the input listing and the Jacobi identity.
  LieAlgebra(std::vector<std::string> labels, const std::vector<StructureConstant>& upper,
             AlgebraSpec spec);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const AlgebraSpec& spec() const { return spec_; }

  [[nodiscard]] Complex c(int a, int b, int g) const {
    return c_[(static_cast<std::size_t>(a) * dim_ + b) * dim_ + g];
  }

  /// dim x dim^2 matrix with entry (g, a*dim + b) = c[a][b][g].
  [[nodiscard]] const CMatrix& bracket_matrix() const { return bracket_matrix_; }

  /// Matrix of ad(e_a) acting on coefficient vectors.
  [[nodiscard]] CMatrix ad(int a) const;

  [[nodiscard]] bool is_abelian() const { return max_abs_constant_ == 0.0; }
  [[nodiscard]] double max_abs_constant() const { return max_abs_constant_; }

 private:
  int dim_;
  std::vector<std::string> labels_;
  std::vector<Complex> c_;
  CMatrix bracket_matrix_;
  double max_abs_constant_ = 0.0;
  AlgebraSpec spec_;
};

LieAlgebra construct_algebra(const AlgebraSpec& spec);

/// Coefficient vector of [x, y].
CVector bracket(const LieAlgebra& alg, const CVector& x, const CVector& y);

/// Largest |Jacobiator| over basis triples.
double jacobi_defect(const LieAlgebra& alg);

enum class AlgebraKind { Nilpotent, SolvableNotNilpotent, NonSolvable };

std::string to_string(AlgebraKind kind);

struct AlgebraClass {
  AlgebraKind kind = AlgebraKind::NonSolvable;
  std::vector<int> lower_central_dims;
  std::vector<int> derived_dims;
  /// Orthonormal spanning set of [g, g].
  std::vector<CVector> derived_subalgebra_basis;
  /// Set when some singular value landed close to the rank cutoff.
  bool ill_conditioned = false;
  std::string warning;
};

AlgebraClass classify_algebra(const LieAlgebra& alg);

nlohmann::json to_json(const AlgebraClass& cls);

/// B[a][b] = tr(ad e_a o ad e_b).
CMatrix killing_metric(const LieAlgebra& alg);

/// Orthonormal basis (columns) of span of the given columns, using the
/// singular-value cutoff 1e-10 * max(sigma_max, reference_scale). A positive
/// reference keeps pure roundoff from counting as rank.
struct SubspaceInfo {
  CMatrix basis;
  bool ill_conditioned = false;
};
SubspaceInfo orthonormal_span(const CMatrix& columns, double reference_scale = 0.0);

struct Homomorphism {
  LieAlgebra source;
  LieAlgebra target;
  CMatrix matrix;  // target.dim x source.dim
};

struct HomomorphismReport {
  double max_deviation = 0.0;
  int worst_alpha = 0;
  int worst_beta = 0;
  bool valid = true;
};

class NotAHomomorphism : public ValidationError {
 public:
  NotAHomomorphism(const std::string& what, int alpha, int beta, double deviation)
      : ValidationError(what), alpha(alpha), beta(beta), deviation(deviation) {}
  int alpha;
  int beta;
  double deviation;
};

inline constexpr double kHomomorphismTolerance = 1e-10;

/// Max deviation of rho([e_a, e_b]) - [rho e_a, rho e_b] over basis pairs; never throws
/// for a bracket mismatch.
HomomorphismReport homomorphism_deviation(const Homomorphism& rho);

/// As homomorphism_deviation, but throws NotAHomomorphism above 1e-10.
HomomorphismReport validate_homomorphism(const Homomorphism& rho);

/// Projection of a direct_sum algebra onto summand 0 or 1.
Homomorphism summand_projection(const LieAlgebra& sum, int which);

}  // namespace hcf::lie
