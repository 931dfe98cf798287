#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hcf/forms.hpp"
#include "hcf/lie.hpp"

namespace hcf::geometry {

using forms::HermitianForm;

/// Holomorphic vector field s(z) = A z + b on C^n.
struct AffineField {
  CMatrix A;
  CVector b;

  [[nodiscard]] CVector operator()(const CVector& z) const { return A * z + b; }
};

/// [X, Y] for X = A z + b, Y = C z + d: (CA - AC) z + (C b - A d).
AffineField field_bracket(const AffineField& x, const AffineField& y);

/// Generating family of affine fields realizing a Lie algebra on C^n.
struct HomogeneousModel {
  std::string name;
  lie::LieAlgebra alg;
  std::vector<AffineField> fields;  // one per basis element
  int ambient_dim = 0;
  /// field_bracket(s_a, s_b) = sign_convention * sum_g c[a][b][g] s_g.
  int sign_convention = 1;
  double bracket_residual = 0.0;
  std::function<bool(const CVector&)> domain_guard;

  /// n x dim matrix whose column a is s_a(z).
  [[nodiscard]] CMatrix evaluation_matrix(const CVector& z) const;
};

/// Model recipes. Text forms: "hopf_sl2", "heisenberg_left", "translations:3",
/// or JSON {"kind":"custom","algebra":{...},"fields":[[[A re/im...],[b re/im...]], ...]}.
struct ModelSpec {
  enum class Kind { HopfSl2, HeisenbergLeft, Translations, Custom };
  Kind kind = Kind::HopfSl2;
  int n = 0;
  lie::AlgebraSpec algebra;          // custom
  std::vector<AffineField> fields;  // custom

  [[nodiscard]] std::string to_string() const;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);
ModelSpec parse_model_spec(std::string_view text);

/// Measures the bracket sign, validates compatibility and evaluation rank.
HomogeneousModel build_model(const ModelSpec& spec);

struct MetricSample {
  CVector z;
  CMatrix g_upper;  // sum h(a,b) s_a(z) conj(s_b(z))^T
  CMatrix g_lower;  // inverse
};

MetricSample induced_metric(const HomogeneousModel& model, const HermitianForm& h, const CVector& z);

/// Theta^{ij} = g^{mn} d_m dbar_n g^{ij} - d_m g^{in} dbar_n g^{mj} with exact derivatives.
CMatrix theta_coordinate(const HomogeneousModel& model, const HermitianForm& h, const CVector& z);

/// Same formula with derivatives of g^{ij} taken by central differences.
CMatrix theta_coordinate_fd(const HomogeneousModel& model, const HermitianForm& h,
                            const CVector& z);

/// (1/2) sum_{a,b} [s_a, s_b](z) (x) conj([s_a, s_b](z)) over an h-orthonormal frame.
CMatrix theta_brackets(const HomogeneousModel& model, const HermitianForm& h, const CVector& z);

/// ev_z * h^# * ev_z^H.
CMatrix pushed_sharp_square(const HomogeneousModel& model, const HermitianForm& h,
                            const CVector& z);

struct ScaleStaticReport {
  double lambda = 0.0;
  double max_relative_deviation = 0.0;
};

/// Least-squares lambda with Theta(z) = lambda ev_z h ev_z^H across the points.
ScaleStaticReport scale_static_check(const HomogeneousModel& model, const HermitianForm& h,
                                     const std::vector<CVector>& points);

/// ||x - y||_F / max(||x||_F, ||y||_F), 0 when both vanish.
double relative_deviation(const CMatrix& x, const CMatrix& y);

/// Points as CSV rows of 2n reals (re, im per coordinate).
std::vector<CVector> read_points_csv(const std::string& path, int n);
void write_points_csv(const std::string& path, const std::vector<CVector>& points);

}  // namespace hcf::geometry
