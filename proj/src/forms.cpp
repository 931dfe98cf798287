#include "hcf/forms.hpp"

#include <algorithm>
#include <cmath>

#include "hcf/errors.hpp"

namespace hcf::forms {

namespace {

void require_square(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ArgumentError("Hermitian form needs a square matrix");
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b)
    throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
}

}  // namespace

HermitianForm::HermitianForm(CMatrix m) : m_(std::move(m)) {
  require_square(m_);
  const CMatrix adj = m_.adjoint();
  m_ = (m_ + adj) * 0.5;
}

HermitianForm HermitianForm::zero(int dim) { return HermitianForm(CMatrix::Zero(dim, dim)); }

HermitianForm HermitianForm::identity(int dim) {
  return HermitianForm(CMatrix::Identity(dim, dim));
}

HermitianForm HermitianForm::diagonal(const RVector& values) {
  return HermitianForm(CMatrix(values.cast<Complex>().asDiagonal()));
}

HermitianForm& HermitianForm::operator+=(const HermitianForm& o) {
  require_same_dim(dim(), o.dim(), "form addition");
  m_ += o.m_;
  return *this;
}

HermitianForm& HermitianForm::operator-=(const HermitianForm& o) {
  require_same_dim(dim(), o.dim(), "form subtraction");
  m_ -= o.m_;
  return *this;
}

HermitianForm& HermitianForm::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianForm operator+(HermitianForm a, const HermitianForm& b) { return a += b; }
HermitianForm operator-(HermitianForm a, const HermitianForm& b) { return a -= b; }
HermitianForm operator*(double s, HermitianForm a) { return a *= s; }

HermitianForm sharp(const lie::LieAlgebra& alg, const HermitianForm& h, const HermitianForm& k) {
  const int d = alg.dim();
  require_same_dim(d, h.dim(), "sharp");
  require_same_dim(d, k.dim(), "sharp");
  if (alg.is_abelian()) return HermitianForm::zero(d);

  // With C_b(e, t) = c[e][t][b]:  (h#k)(a, b) = sum_{e,t} C_a(e,t) (h conj(C_b) k^T)(e,t).
  const CMatrix& C = alg.bracket_matrix();
  const CMatrix kt = k.matrix().transpose();
  CMatrix stacked(d * d, d);
  CMatrix Cb(d, d);
  for (int b = 0; b < d; ++b) {
    for (int e = 0; e < d; ++e)
      for (int t = 0; t < d; ++t) Cb(e, t) = std::conj(C(b, e * d + t));
    const CMatrix T = h.matrix() * Cb * kt;
    for (int e = 0; e < d; ++e)
      for (int t = 0; t < d; ++t) stacked(e * d + t, b) = T(e, t);
  }
  return HermitianForm(C * stacked);
}

HermitianForm sharp_square(const lie::LieAlgebra& alg, const HermitianForm& h) {
  return 0.5 * sharp(alg, h, h);
}

HermitianForm complexify(const RMatrix& h_real) {
  if (h_real.rows() != h_real.cols()) throw ArgumentError("complexify: matrix must be square");
  const double scale = std::max(1.0, h_real.cwiseAbs().maxCoeff());
  if ((h_real - h_real.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw ArgumentError("complexify: input is not symmetric");
  return HermitianForm(h_real.cast<Complex>());
}

std::string to_string(Positivity p) {
  switch (p) {
    case Positivity::PositiveDefinite: return "PositiveDefinite";
    case Positivity::PositiveSemidefinite: return "PositiveSemidefinite";
    case Positivity::Indefinite: return "Indefinite";
  }
  return "?";
}

double default_positivity_tolerance(const HermitianForm& h) {
  return 1e-10 * std::max(1.0, sup_norm(h));
}

PositivityReport positivity(const HermitianForm& h, double tol) {
  if (!(tol > 0)) throw ArgumentError("positivity: tolerance must be positive");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  const RVector& ev = es.eigenvalues();
  PositivityReport rep;
  rep.min_eigenvalue = ev.minCoeff();
  rep.max_eigenvalue = ev.maxCoeff();
  if (rep.min_eigenvalue > tol)
    rep.status = Positivity::PositiveDefinite;
  else if (rep.min_eigenvalue > -tol)
    rep.status = Positivity::PositiveSemidefinite;
  else
    rep.status = Positivity::Indefinite;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) < tol) rep.kernel_basis.push_back(es.eigenvectors().col(i));
  return rep;
}

PositivityReport positivity(const HermitianForm& h) {
  return positivity(h, default_positivity_tolerance(h));
}

HermitianForm pushforward(const lie::Homomorphism& rho, const HermitianForm& h) {
  require_same_dim(rho.source.dim(), h.dim(), "pushforward");
  if (rho.matrix.rows() != rho.target.dim() || rho.matrix.cols() != rho.source.dim())
    throw ArgumentError("pushforward: homomorphism matrix has the wrong shape");
  return HermitianForm(rho.matrix * h.matrix() * rho.matrix.adjoint());
}

double trilinear(const lie::LieAlgebra& alg, const HermitianForm& inner, const HermitianForm& h,
                 const HermitianForm& k, const HermitianForm& l) {
  require_same_dim(alg.dim(), inner.dim(), "trilinear");
  if (positivity(inner).status != Positivity::PositiveDefinite)
    throw ArgumentError("trilinear: inner metric must be positive definite");
  const CMatrix& G = inner.matrix();
  const CMatrix hk = sharp(alg, h, k).matrix();
  // <A, B> = sum_{ab} A(a,b) (G conj(B) G^H)(a,b)
  const CMatrix weighted = G * l.matrix().conjugate() * G.adjoint();
  return hk.cwiseProduct(weighted).sum().real();
}

double sup_norm(const HermitianForm& h) {
  if (h.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const HermitianForm& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double frobenius_norm(const HermitianForm& h) { return h.matrix().norm(); }

double frobenius_inner(const HermitianForm& a, const HermitianForm& b) {
  require_same_dim(a.dim(), b.dim(), "frobenius_inner");
  return a.matrix().cwiseProduct(b.matrix().conjugate()).sum().real();
}

nlohmann::json to_json(const HermitianForm& h) {
  nlohmann::json out = nlohmann::json::array();
  for (int a = 0; a < h.dim(); ++a)
    for (int b = a; b < h.dim(); ++b)
      if (h(a, b) != Complex{}) out.push_back({a, b, h(a, b).real(), h(a, b).imag()});
  return out;
}

HermitianForm form_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_array()) throw ParseError("form JSON must be a list of [a, b, re, im]");
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 4) throw ParseError("form entries are [a, b, re, im]");
    const int a = row[0].get<int>();
    const int b = row[1].get<int>();
    if (a < 0 || b < 0 || a >= dim || b >= dim || a > b)
      throw ParseError("form entry index out of range or below the diagonal");
    const Complex v(row[2].get<double>(), row[3].get<double>());
    if (a == b && v.imag() != 0.0) throw ParseError("diagonal form entries must be real");
    m(a, b) = v;
    m(b, a) = std::conj(v);
  }
  return HermitianForm(std::move(m));
}

HermitianForm random_positive_definite(int dim, std::mt19937_64& rng, double scale) {
  if (dim <= 0 || !(scale > 0)) throw ArgumentError("random_positive_definite: bad arguments");
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CMatrix L(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      L(i, j) = Complex(re, im);
    }
  CMatrix m = L * L.adjoint() + 1e-3 * CMatrix::Identity(dim, dim);
  return HermitianForm(scale * m);
}

HermitianForm random_positive_diagonal(int dim, std::mt19937_64& rng, double scale) {
  const HermitianForm full = random_positive_definite(dim, rng, scale);
  return HermitianForm::diagonal(full.matrix().diagonal().real());
}

}  // namespace hcf::forms
