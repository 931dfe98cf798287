#include "hcf/geometry.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "hcf/errors.hpp"

namespace hcf::geometry {

namespace {

constexpr double kBracketTolerance = 1e-10;
constexpr double kHopfGuardRadius = 1e-6;

const Complex I(0.0, 1.0);

double coefficient_gap(const AffineField& x, const AffineField& y) {
  double gap = 0.0;
  if (x.A.size() > 0) gap = (x.A - y.A).cwiseAbs().maxCoeff();
  if (x.b.size() > 0) gap = std::max(gap, (x.b - y.b).cwiseAbs().maxCoeff());
  return gap;
}

AffineField combination(const std::vector<AffineField>& fields, const CVector& coeffs, int n) {
  AffineField out{CMatrix::Zero(n, n), CVector::Zero(n)};
  for (std::size_t g = 0; g < fields.size(); ++g) {
    const Complex c = coeffs(static_cast<Eigen::Index>(g));
    if (c == Complex{}) continue;
    out.A += c * fields[g].A;
    out.b += c * fields[g].b;
  }
  return out;
}

CMatrix g_upper_at(const HomogeneousModel& model, const HermitianForm& h, const CVector& z) {
  const CMatrix E = model.evaluation_matrix(z);
  return E * h.matrix() * E.adjoint();
}

void check_point(const HomogeneousModel& model, const HermitianForm& h, const CVector& z) {
  if (z.size() != model.ambient_dim)
    throw ArgumentError("point has " + std::to_string(z.size()) + " coordinates, model needs " +
                        std::to_string(model.ambient_dim));
  if (h.dim() != model.alg.dim()) throw ArgumentError("form dimension does not match the model algebra");
  if (model.domain_guard && !model.domain_guard(z))
    throw EvaluationError("point lies outside the domain of model " + model.name);
}

std::vector<double> parse_numbers(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

AffineField field_bracket(const AffineField& x, const AffineField& y) {
  return {y.A * x.A - x.A * y.A, y.A * x.b - x.A * y.b};
}

CMatrix HomogeneousModel::evaluation_matrix(const CVector& z) const {
  CMatrix E(ambient_dim, static_cast<Eigen::Index>(fields.size()));
  for (std::size_t a = 0; a < fields.size(); ++a) E.col(static_cast<Eigen::Index>(a)) = fields[a](z);
  return E;
}

std::string ModelSpec::to_string() const {
  switch (kind) {
    case Kind::HopfSl2: return "hopf_sl2";
    case Kind::HeisenbergLeft: return "heisenberg_left";
    case Kind::Translations: return "translations:" + std::to_string(n);
    case Kind::Custom: return to_json(*this).dump();
  }
  return "?";
}

nlohmann::json to_json(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelSpec::Kind::HopfSl2: return {{"kind", "hopf_sl2"}};
    case ModelSpec::Kind::HeisenbergLeft: return {{"kind", "heisenberg_left"}};
    case ModelSpec::Kind::Translations: return {{"kind", "translations"}, {"n", spec.n}};
    case ModelSpec::Kind::Custom: {
      nlohmann::json fields = nlohmann::json::array();
      for (const auto& f : spec.fields) {
        nlohmann::json a = nlohmann::json::array();
        for (Eigen::Index i = 0; i < f.A.rows(); ++i)
          for (Eigen::Index j = 0; j < f.A.cols(); ++j) {
            a.push_back(f.A(i, j).real());
            a.push_back(f.A(i, j).imag());
          }
        nlohmann::json b = nlohmann::json::array();
        for (Eigen::Index i = 0; i < f.b.size(); ++i) {
          b.push_back(f.b(i).real());
          b.push_back(f.b(i).imag());
        }
        fields.push_back(nlohmann::json::array({a, b}));
      }
      return {{"kind", "custom"}, {"algebra", lie::to_json(spec.algebra)}, {"fields", fields}};
    }
  }
  return {};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return parse_model_spec(j.get<std::string>());
    const std::string kind = j.at("kind").get<std::string>();
    ModelSpec spec;
    if (kind == "hopf_sl2") {
      spec.kind = ModelSpec::Kind::HopfSl2;
    } else if (kind == "heisenberg_left") {
      spec.kind = ModelSpec::Kind::HeisenbergLeft;
    } else if (kind == "translations") {
      spec.kind = ModelSpec::Kind::Translations;
      spec.n = j.at("n").get<int>();
    } else if (kind == "custom") {
      spec.kind = ModelSpec::Kind::Custom;
      spec.algebra = lie::algebra_spec_from_json(j.at("algebra"));
      for (const auto& f : j.at("fields")) {
        if (!f.is_array() || f.size() != 2) throw ParseError("each field is [[A re/im...], [b re/im...]]");
        const auto a = parse_numbers(f[0], "field matrix");
        const auto b = parse_numbers(f[1], "field offset");
        if (b.size() % 2 != 0) throw ParseError("field offset needs re/im pairs");
        const int n = static_cast<int>(b.size() / 2);
        if (a.size() != static_cast<std::size_t>(2 * n * n))
          throw ParseError("field matrix must have 2 n^2 entries");
        AffineField field{CMatrix(n, n), CVector(n)};
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) field.A(r, c) = Complex(a[2 * (r * n + c)], a[2 * (r * n + c) + 1]);
        for (int r = 0; r < n; ++r) field.b(r) = Complex(b[2 * r], b[2 * r + 1]);
        spec.fields.push_back(std::move(field));
      }
    } else {
      throw ParseError("unknown model kind '" + kind + "'");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model spec JSON: ") + e.what());
  }
}

ModelSpec parse_model_spec(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    try {
      return model_spec_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("model spec JSON: ") + e.what());
    }
  }
  const std::string s(text);
  if (s == "hopf_sl2") return {ModelSpec::Kind::HopfSl2};
  if (s == "heisenberg_left") return {ModelSpec::Kind::HeisenbergLeft};
  for (const std::string prefix : {"translations:", "translations("}) {
    if (s.rfind(prefix, 0) == 0) {
      std::string num = s.substr(prefix.size());
      if (!num.empty() && num.back() == ')') num.pop_back();
      try {
        return {ModelSpec::Kind::Translations, std::stoi(num)};
      } catch (const std::exception&) {
        throw ParseError("model spec '" + s + "': bad size");
      }
    }
  }
  throw ParseError("unknown model spec '" + s + "'");
}

HomogeneousModel build_model(const ModelSpec& spec) {
  auto make = [](std::string name, lie::LieAlgebra alg, std::vector<AffineField> fields, int n,
                 std::function<bool(const CVector&)> guard) {
    return HomogeneousModel{std::move(name), std::move(alg), std::move(fields), n, 1, 0.0,
                            std::move(guard)};
  };
  auto always = [](const CVector&) { return true; };

  HomogeneousModel model = [&]() {
    switch (spec.kind) {
      case ModelSpec::Kind::HopfSl2: {
        // e_a = -(i/2) sigma_a acting linearly on C^2.
        CMatrix s1(2, 2), s2(2, 2), s3(2, 2);
        s1 << 0, 1, 1, 0;
        s2 << 0, -I, I, 0;
        s3 << 1, 0, 0, -1;
        std::vector<AffineField> fields;
        for (const CMatrix& s : {s1, s2, s3}) fields.push_back({-0.5 * I * s, CVector::Zero(2)});
        return make("hopf_sl2", lie::construct_algebra(lie::AlgebraSpec::su2c()), std::move(fields), 2,
                    [](const CVector& z) { return z.norm() > kHopfGuardRadius; });
      }
      case ModelSpec::Kind::HeisenbergLeft: {
        // Coordinates (a, c, b): d_a, d_c + a d_b, d_b for (E12, E23, E13).
        std::vector<AffineField> fields(3, AffineField{CMatrix::Zero(3, 3), CVector::Zero(3)});
        fields[0].b(0) = 1.0;
        fields[1].b(1) = 1.0;
        fields[1].A(2, 0) = 1.0;
        fields[2].b(2) = 1.0;
        return make("heisenberg_left", lie::construct_algebra(lie::AlgebraSpec::heisenberg3()),
                    std::move(fields), 3, always);
      }
      case ModelSpec::Kind::Translations: {
        if (spec.n < 1) throw ArgumentError("translations(n) needs n >= 1");
        std::vector<AffineField> fields;
        for (int i = 0; i < spec.n; ++i)
          fields.push_back({CMatrix::Zero(spec.n, spec.n), CVector::Unit(spec.n, i)});
        return make("translations:" + std::to_string(spec.n),
                    lie::construct_algebra(lie::AlgebraSpec::abelian(spec.n)), std::move(fields),
                    spec.n, always);
      }
      case ModelSpec::Kind::Custom: {
        lie::LieAlgebra alg = lie::construct_algebra(spec.algebra);
        if (static_cast<int>(spec.fields.size()) != alg.dim())
          throw ValidationError("custom model needs one field per basis element");
        const int n = static_cast<int>(spec.fields.front().b.size());
        for (const auto& f : spec.fields)
          if (f.b.size() != n || f.A.rows() != n || f.A.cols() != n)
            throw ValidationError("custom model fields have inconsistent shapes");
        return make("custom", std::move(alg), spec.fields, n, always);
      }
    }
    throw ArgumentError("unhandled model kind");
  }();

  // Measure the bracket sign: brackets enter Theta quadratically, so either sign works.
  const int d = model.alg.dim();
  const int n = model.ambient_dim;
  double scale = 1.0;
  for (const auto& f : model.fields)
    scale = std::max({scale, f.A.size() ? f.A.cwiseAbs().maxCoeff() : 0.0, f.b.cwiseAbs().maxCoeff()});
  double worst[2] = {0.0, 0.0};
  int worst_pair[2][2] = {{0, 0}, {0, 0}};
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const AffineField lhs = field_bracket(model.fields[a], model.fields[b]);
      const CVector coeffs = lie::bracket(model.alg, CVector::Unit(d, a), CVector::Unit(d, b));
      const AffineField rhs = combination(model.fields, coeffs, n);
      for (int k = 0; k < 2; ++k) {
        const double sign = k == 0 ? 1.0 : -1.0;
        const AffineField signed_rhs{sign * rhs.A, sign * rhs.b};
        const double gap = coefficient_gap(lhs, signed_rhs);
        if (gap > worst[k]) {
          worst[k] = gap;
          worst_pair[k][0] = a;
          worst_pair[k][1] = b;
        }
      }
    }
  const int pick = worst[0] <= worst[1] ? 0 : 1;
  model.sign_convention = pick == 0 ? 1 : -1;
  model.bracket_residual = worst[pick];
  const double tol = kBracketTolerance * scale * scale;
  if (worst[pick] > tol) {
    std::ostringstream os;
    os << "model " << model.name << ": field brackets do not match the algebra; worst pair ("
       << model.alg.labels()[worst_pair[pick][0]] << "," << model.alg.labels()[worst_pair[pick][1]]
       << ") residual " << worst[pick];
    throw ValidationError(os.str());
  }

  // Evaluation map must be onto at generic points.
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> gauss;
  int tested = 0;
  for (int attempt = 0; attempt < 50 && tested < 5; ++attempt) {
    CVector z(n);
    for (int i = 0; i < n; ++i) z(i) = Complex(gauss(rng), gauss(rng));
    if (model.domain_guard && !model.domain_guard(z)) continue;
    ++tested;
    Eigen::BDCSVD<CMatrix> svd(model.evaluation_matrix(z));
    const RVector& s = svd.singularValues();
    if (s.size() < n || s(n - 1) <= 1e-10 * s(0))
      throw ValidationError("model " + model.name + ": evaluation map is not surjective at a sample point");
  }
  return model;
}

MetricSample induced_metric(const HomogeneousModel& model, const HermitianForm& h, const CVector& z) {
  check_point(model, h, z);
  MetricSample out;
  out.z = z;
  out.g_upper = g_upper_at(model, h, z);
  Eigen::LLT<CMatrix> llt(out.g_upper);
  if (llt.info() != Eigen::Success)
    throw EvaluationError("induced metric is singular or not positive at this point");
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(out.g_upper, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-14 * es.eigenvalues().maxCoeff())
    throw EvaluationError("induced metric is rank deficient at this point");
  out.g_lower = llt.solve(CMatrix::Identity(model.ambient_dim, model.ambient_dim));
  return out;
}

CMatrix theta_coordinate(const HomogeneousModel& model, const HermitianForm& h, const CVector& z) {
  check_point(model, h, z);
  const int n = model.ambient_dim;
  const int d = model.alg.dim();
  const CMatrix& H = h.matrix();
  const CMatrix E = model.evaluation_matrix(z);
  const CMatrix G = E * H * E.adjoint();

  // P[m](i, a) = d_m s_a^i = A_a(i, m).
  std::vector<CMatrix> P(n, CMatrix(n, d));
  for (int m = 0; m < n; ++m)
    for (int a = 0; a < d; ++a) P[m].col(a) = model.fields[a].A.col(m);

  CMatrix theta = CMatrix::Zero(n, n);
  std::vector<CMatrix> dg(n), dgbar(n);
  for (int m = 0; m < n; ++m) {
    dg[m] = P[m] * H * E.adjoint();     // (i, nbar) -> d_m g^{i nbar}
    dgbar[m] = E * H * P[m].adjoint();  // (m', jbar) -> dbar_m g^{m' jbar}
  }
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      if (G(m, k) != Complex{}) theta += G(m, k) * (P[m] * H * P[k].adjoint());
      // - d_m g^{i kbar} dbar_k g^{m jbar}
      theta -= dg[m].col(k) * dgbar[k].row(m);
    }
  return theta;
}

CMatrix theta_coordinate_fd(const HomogeneousModel& model, const HermitianForm& h,
                            const CVector& z) {
  check_point(model, h, z);
  const int n = model.ambient_dim;
  const double delta = 1e-5 * (1.0 + z.norm());
  auto g = [&](const CVector& p) { return g_upper_at(model, h, p); };
  // Real direction r: x_m for r = 2m, y_m for r = 2m + 1.
  auto dir = [n](int r) {
    CVector u = CVector::Zero(n);
    u(r / 2) = (r % 2 == 0) ? Complex(1.0, 0.0) : I;
    return u;
  };
  auto d1 = [&](int r) {
    const CVector u = delta * dir(r);
    return CMatrix((g(z + u) - g(z - u)) / (2 * delta));
  };
  auto d2 = [&](int r, int s) {
    const CVector u = delta * dir(r);
    const CVector v = delta * dir(s);
    return CMatrix((g(z + u + v) - g(z + u - v) - g(z - u + v) + g(z - u - v)) / (4 * delta * delta));
  };

  const CMatrix G = g(z);
  std::vector<CMatrix> dz(n), dzbar(n);
  for (int m = 0; m < n; ++m) {
    const CMatrix dx = d1(2 * m);
    const CMatrix dy = d1(2 * m + 1);
    dz[m] = 0.5 * (dx - I * dy);
    dzbar[m] = 0.5 * (dx + I * dy);
  }
  CMatrix theta = CMatrix::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      const CMatrix mixed =
          0.25 * (d2(2 * m, 2 * k) + d2(2 * m + 1, 2 * k + 1) +
                  I * (d2(2 * m, 2 * k + 1) - d2(2 * m + 1, 2 * k)));
      theta += G(m, k) * mixed;
      theta -= dz[m].col(k) * dzbar[k].row(m);
    }
  return theta;
}

CMatrix theta_brackets(const HomogeneousModel& model, const HermitianForm& h, const CVector& z) {
  check_point(model, h, z);
  Eigen::LLT<CMatrix> llt(h.matrix());
  if (llt.info() != Eigen::Success) throw ArgumentError("theta_brackets: h must be positive definite");
  const CMatrix L = llt.matrixL();
  const int n = model.ambient_dim;
  const int d = model.alg.dim();
  std::vector<AffineField> frame;
  frame.reserve(d);
  for (int a = 0; a < d; ++a) frame.push_back(combination(model.fields, L.col(a), n));
  CMatrix theta = CMatrix::Zero(n, n);
  // The (a,b) and (b,a) terms coincide, cancelling the 1/2.
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const CVector v = field_bracket(frame[a], frame[b])(z);
      theta += v * v.adjoint();
    }
  return theta;
}

CMatrix pushed_sharp_square(const HomogeneousModel& model, const HermitianForm& h,
                            const CVector& z) {
  check_point(model, h, z);
  const CMatrix E = model.evaluation_matrix(z);
  return E * forms::sharp_square(model.alg, h).matrix() * E.adjoint();
}

double relative_deviation(const CMatrix& x, const CMatrix& y) {
  const double scale = std::max(x.norm(), y.norm());
  if (scale == 0.0) return 0.0;
  return (x - y).norm() / scale;
}

ScaleStaticReport scale_static_check(const HomogeneousModel& model, const HermitianForm& h,
                                     const std::vector<CVector>& points) {
  if (points.size() < 2) throw ArgumentError("scale_static_check: need at least two points");
  if (forms::positivity(h).status != forms::Positivity::PositiveDefinite)
    throw ArgumentError("scale_static_check: h must be positive definite");
  std::vector<CMatrix> thetas, metrics;
  double num = 0.0, den = 0.0;
  for (const auto& z : points) {
    thetas.push_back(theta_brackets(model, h, z));
    metrics.push_back(g_upper_at(model, h, z));
    num += thetas.back().cwiseProduct(metrics.back().conjugate()).sum().real();
    den += metrics.back().squaredNorm();
  }
  ScaleStaticReport rep;
  rep.lambda = den > 0 ? num / den : 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    rep.max_relative_deviation =
        std::max(rep.max_relative_deviation, relative_deviation(thetas[i], rep.lambda * metrics[i]));
  return rep;
}

std::vector<CVector> read_points_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open point file " + path);
  std::vector<CVector> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // header
    std::stringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad number '" + cell + "' in " + path);
      }
    }
    if (vals.size() != static_cast<std::size_t>(2 * n))
      throw ParseError("point rows in " + path + " need " + std::to_string(2 * n) + " columns");
    CVector z(n);
    for (int i = 0; i < n; ++i) z(i) = Complex(vals[2 * i], vals[2 * i + 1]);
    points.push_back(std::move(z));
  }
  return points;
}

void write_points_csv(const std::string& path, const std::vector<CVector>& points) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write point file " + path);
  out.precision(17);
  if (points.empty()) return;
  const auto n = points.front().size();
  for (Eigen::Index i = 0; i < n; ++i)
    out << (i ? "," : "") << "z" << i + 1 << "_re,z" << i + 1 << "_im";
  out << "\n";
  for (const auto& z : points) {
    for (Eigen::Index i = 0; i < n; ++i) out << (i ? "," : "") << z(i).real() << "," << z(i).imag();
    out << "\n";
  }
}

}  // namespace hcf::geometry
