#include "hcf/lie.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

namespace hcf::lie {

namespace {

constexpr double kRankCutoff = 1e-10;
// Singular values within two decades of the cutoff get flagged.
constexpr double kAmbiguityBand = 1e2;

std::string matrix_unit_label(int i, int j, int n) {
  if (n < 10) return "E" + std::to_string(i) + std::to_string(j);
  return "E" + std::to_string(i) + "_" + std::to_string(j);
}

struct MatrixUnits {
  std::vector<std::pair<int, int>> units;  // 1-based (i, j)
  std::vector<std::string> labels;
};

// Basis ordered by band j - i, then by row.
MatrixUnits triangular_units(int n, int first_band) {
  MatrixUnits out;
  for (int band = first_band; band < n; ++band) {
    for (int i = 1; i + band <= n; ++i) {
      out.units.emplace_back(i, i + band);
      out.labels.push_back(matrix_unit_label(i, i + band, n));
    }
  }
  return out;
}

// [E_ij, E_kl] = d_jk E_il - d_li E_kj, restricted to the span of `units`.
std::vector<StructureConstant> matrix_algebra_constants(const MatrixUnits& mu) {
  const int dim = static_cast<int>(mu.units.size());
  auto index_of = [&](int i, int j) {
    for (int a = 0; a < dim; ++a)
      if (mu.units[a] == std::make_pair(i, j)) return a;
    return -1;
  };
  std::vector<StructureConstant> out;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      const auto [i, j] = mu.units[a];
      const auto [k, l] = mu.units[b];
      std::vector<Complex> coeff(dim, Complex{});
      if (j == k) {
        const int g = index_of(i, l);
        if (g < 0) throw ValidationError("matrix algebra not closed under bracket");
        coeff[g] += 1.0;
      }
      if (l == i) {
        const int g = index_of(k, j);
        if (g < 0) throw ValidationError("matrix algebra not closed under bracket");
        coeff[g] -= 1.0;
      }
      for (int g = 0; g < dim; ++g)
        if (coeff[g] != Complex{}) out.push_back({a, b, g, coeff[g]});
    }
  }
  return out;
}

std::vector<std::string> numbered_labels(int dim) {
  std::vector<std::string> labels;
  for (int k = 1; k <= dim; ++k) labels.push_back("e" + std::to_string(k));
  return labels;
}

// Tiny recursive-descent parser for the compact text form.
class CompactParser {
 public:
  explicit CompactParser(std::string_view s) : s_(s) {}

  AlgebraSpec parse() {
    AlgebraSpec spec = parse_one();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return spec;
  }

 private:
  AlgebraSpec parse_one() {
    skip_ws();
    const std::string name = identifier();
    skip_ws();
    if (name == "direct_sum") {
      expect('(');
      AlgebraSpec a = parse_one();
      skip_ws();
      expect(',');
      AlgebraSpec b = parse_one();
      skip_ws();
      expect(')');
      return AlgebraSpec::direct_sum(std::move(a), std::move(b));
    }
    if (name == "su2c") return AlgebraSpec::su2c();
    if (name == "heisenberg3") return AlgebraSpec::heisenberg3();
    int n = 0;
    if (peek() == ':' || peek() == '(') {
      const bool paren = peek() == '(';
      ++pos_;
      n = integer();
      if (paren) expect(')');
    } else {
      fail("missing size for '" + name + "'");
    }
    if (name == "strict_upper") return AlgebraSpec::strict_upper(n);
    if (name == "borel") return AlgebraSpec::borel(n);
    if (name == "abelian") return AlgebraSpec::abelian(n);
    fail("unknown algebra kind '" + name + "'");
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected an algebra name");
    return std::string(s_.substr(start, pos_ - start));
  }

  int integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer");
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("algebra spec '" + std::string(s_) + "': " + msg + " at offset " +
                     std::to_string(pos_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

AlgebraSpec AlgebraSpec::direct_sum(AlgebraSpec a, AlgebraSpec b) {
  AlgebraSpec s{Kind::DirectSum};
  s.summands = {std::move(a), std::move(b)};
  return s;
}

AlgebraSpec AlgebraSpec::custom(int dim, std::vector<StructureConstant> constants) {
  AlgebraSpec s{Kind::Custom, dim};
  s.constants = std::move(constants);
  return s;
}

std::string AlgebraSpec::to_string() const {
  switch (kind) {
    case Kind::Su2c: return "su2c";
    case Kind::StrictUpper: return "strict_upper:" + std::to_string(n);
    case Kind::Borel: return "borel:" + std::to_string(n);
    case Kind::Heisenberg3: return "heisenberg3";
    case Kind::Abelian: return "abelian:" + std::to_string(n);
    case Kind::DirectSum:
      return "direct_sum(" + summands.at(0).to_string() + "," + summands.at(1).to_string() + ")";
    case Kind::Custom: return to_json(*this).dump();
  }
  return "?";
}

nlohmann::json to_json(const AlgebraSpec& spec) {
  using Kind = AlgebraSpec::Kind;
  nlohmann::json j;
  switch (spec.kind) {
    case Kind::Su2c: j["kind"] = "su2c"; break;
    case Kind::StrictUpper: j = {{"kind", "strict_upper"}, {"n", spec.n}}; break;
    case Kind::Borel: j = {{"kind", "borel"}, {"n", spec.n}}; break;
    case Kind::Heisenberg3: j["kind"] = "heisenberg3"; break;
    case Kind::Abelian: j = {{"kind", "abelian"}, {"n", spec.n}}; break;
    case Kind::DirectSum:
      j = {{"kind", "direct_sum"},
           {"summands", nlohmann::json::array({to_json(spec.summands.at(0)), to_json(spec.summands.at(1))})}};
      break;
    case Kind::Custom: {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& sc : spec.constants)
        rows.push_back({sc.alpha, sc.beta, sc.gamma, sc.value.real(), sc.value.imag()});
      j = {{"kind", "custom"}, {"dim", spec.n}, {"constants", rows}};
      break;
    }
  }
  return j;
}

AlgebraSpec algebra_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return parse_algebra_spec(j.get<std::string>());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "su2c") return AlgebraSpec::su2c();
    if (kind == "heisenberg3") return AlgebraSpec::heisenberg3();
    if (kind == "strict_upper") return AlgebraSpec::strict_upper(j.at("n").get<int>());
    if (kind == "borel") return AlgebraSpec::borel(j.at("n").get<int>());
    if (kind == "abelian") return AlgebraSpec::abelian(j.at("n").get<int>());
    if (kind == "direct_sum") {
      const auto& s = j.at("summands");
      if (!s.is_array() || s.size() != 2) throw ParseError("direct_sum needs exactly two summands");
      return AlgebraSpec::direct_sum(algebra_spec_from_json(s[0]), algebra_spec_from_json(s[1]));
    }
    if (kind == "custom") {
      std::vector<StructureConstant> constants;
      for (const auto& row : j.at("constants")) {
        if (!row.is_array() || row.size() != 5)
          throw ParseError("custom constants are rows [alpha, beta, gamma, re, im]");
        constants.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(),
                             Complex(row[3].get<double>(), row[4].get<double>())});
      }
      return AlgebraSpec::custom(j.at("dim").get<int>(), std::move(constants));
    }
    throw ParseError("unknown algebra kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("algebra spec JSON: ") + e.what());
  }
}

AlgebraSpec parse_algebra_spec(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\n\r");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("algebra spec JSON: ") + e.what());
    }
    return algebra_spec_from_json(j);
  }
  return CompactParser(text).parse();
}

LieAlgebra::LieAlgebra(std::vector<std::string> labels, const std::vector<StructureConstant>& upper,
                       AlgebraSpec spec)
    : dim_(static_cast<int>(labels.size())), labels_(std::move(labels)), spec_(std::move(spec)) {
  if (dim_ <= 0) throw ArgumentError("Lie algebra dimension must be positive");
  const std::size_t d = static_cast<std::size_t>(dim_);
  c_.assign(d * d * d, Complex{});
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& sc : upper) {
    const auto triple = "(" + std::to_string(sc.alpha) + "," + std::to_string(sc.beta) + "," +
                        std::to_string(sc.gamma) + ")";
    if (sc.alpha < 0 || sc.beta < 0 || sc.gamma < 0 || sc.alpha >= dim_ || sc.beta >= dim_ ||
        sc.gamma >= dim_)
      throw ValidationError("structure constant index out of range at triple " + triple);
    if (sc.alpha >= sc.beta) {
      if (sc.value == Complex{}) continue;
      throw ValidationError("antisymmetry violated at triple " + triple +
                            ": only alpha < beta entries may be listed");
    }
    if (!seen.insert({sc.alpha, sc.beta, sc.gamma}).second)
      throw ValidationError("duplicate structure constant at triple " + triple);
    c_[(sc.alpha * d + sc.beta) * d + sc.gamma] = sc.value;
    c_[(sc.beta * d + sc.alpha) * d + sc.gamma] = -sc.value;
    max_abs_constant_ = std::max(max_abs_constant_, std::abs(sc.value));
  }

  bracket_matrix_ = CMatrix::Zero(dim_, dim_ * dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int g = 0; g < dim_; ++g) bracket_matrix_(g, a * dim_ + b) = c(a, b, g);

  // Jacobi: sum over cyclic (a, b, e) of [[e_a, e_b], e_e] = 0.
  const double tol = 1e-12 * std::max(1.0, max_abs_constant_ * max_abs_constant_);
  for (int a = 0; a < dim_; ++a)
    for (int b = a + 1; b < dim_; ++b)
      for (int e = b + 1; e < dim_; ++e)
        for (int g = 0; g < dim_; ++g) {
          Complex sum{};
          for (int m = 0; m < dim_; ++m)
            sum += c(a, b, m) * c(m, e, g) + c(b, e, m) * c(m, a, g) + c(e, a, m) * c(m, b, g);
          if (std::abs(sum) > tol) {
            std::ostringstream os;
            os << "Jacobi identity violated at triple (" << a << "," << b << "," << e
               << "), component " << g << ": |defect| = " << std::abs(sum);
            throw ValidationError(os.str());
          }
        }
}

CMatrix LieAlgebra::ad(int a) const {
  CMatrix m(dim_, dim_);
  for (int b = 0; b < dim_; ++b)
    for (int g = 0; g < dim_; ++g) m(g, b) = c(a, b, g);
  return m;
}

LieAlgebra construct_algebra(const AlgebraSpec& spec) {
  using Kind = AlgebraSpec::Kind;
  switch (spec.kind) {
    case Kind::Su2c: {
      const std::vector<StructureConstant> c = {
          {0, 1, 2, 1.0},   // [e1, e2] = e3
          {1, 2, 0, 1.0},   // [e2, e3] = e1
          {0, 2, 1, -1.0},  // [e1, e3] = -[e3, e1] = -e2
      };
      return LieAlgebra(numbered_labels(3), c, spec);
    }
    case Kind::StrictUpper:
    case Kind::Heisenberg3: {
      const int n = spec.kind == Kind::Heisenberg3 ? 3 : spec.n;
      if (n < 2) throw ArgumentError("strict_upper(n) needs n >= 2");
      auto mu = triangular_units(n, 1);
      auto c = matrix_algebra_constants(mu);
      return LieAlgebra(std::move(mu.labels), c, spec);
    }
    case Kind::Borel: {
      if (spec.n < 2) throw ArgumentError("borel(n) needs n >= 2");
      auto mu = triangular_units(spec.n, 0);
      auto c = matrix_algebra_constants(mu);
      return LieAlgebra(std::move(mu.labels), c, spec);
    }
    case Kind::Abelian:
      if (spec.n < 1) throw ArgumentError("abelian(n) needs n >= 1");
      return LieAlgebra(numbered_labels(spec.n), {}, spec);
    case Kind::DirectSum: {
      if (spec.summands.size() != 2) throw ArgumentError("direct_sum needs two summands");
      const LieAlgebra a = construct_algebra(spec.summands[0]);
      const LieAlgebra b = construct_algebra(spec.summands[1]);
      std::vector<std::string> labels = a.labels();
      const std::set<std::string> left(a.labels().begin(), a.labels().end());
      for (const auto& l : b.labels()) labels.push_back(left.count(l) ? l + "'" : l);
      std::vector<StructureConstant> c;
      for (int x = 0; x < a.dim(); ++x)
        for (int y = x + 1; y < a.dim(); ++y)
          for (int g = 0; g < a.dim(); ++g)
            if (a.c(x, y, g) != Complex{}) c.push_back({x, y, g, a.c(x, y, g)});
      const int off = a.dim();
      for (int x = 0; x < b.dim(); ++x)
        for (int y = x + 1; y < b.dim(); ++y)
          for (int g = 0; g < b.dim(); ++g)
            if (b.c(x, y, g) != Complex{}) c.push_back({x + off, y + off, g + off, b.c(x, y, g)});
      return LieAlgebra(std::move(labels), c, spec);
    }
    case Kind::Custom:
      if (spec.n < 1) throw ArgumentError("custom algebra needs dim >= 1");
      return LieAlgebra(numbered_labels(spec.n), spec.constants, spec);
  }
  throw ArgumentError("unhandled algebra kind");
}

CVector bracket(const LieAlgebra& alg, const CVector& x, const CVector& y) {
  const int d = alg.dim();
  if (x.size() != d || y.size() != d)
    throw ArgumentError("bracket: vector length does not match algebra dimension " +
                        std::to_string(d));
  CVector outer(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) outer(a * d + b) = x(a) * y(b);
  return alg.bracket_matrix() * outer;
}

double jacobi_defect(const LieAlgebra& alg) {
  const int d = alg.dim();
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int e = 0; e < d; ++e)
        for (int g = 0; g < d; ++g) {
          Complex s{};
          for (int m = 0; m < d; ++m)
            s += alg.c(a, b, m) * alg.c(m, e, g) + alg.c(b, e, m) * alg.c(m, a, g) +
                 alg.c(e, a, m) * alg.c(m, b, g);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

std::string to_string(AlgebraKind kind) {
  switch (kind) {
    case AlgebraKind::Nilpotent: return "Nilpotent";
    case AlgebraKind::SolvableNotNilpotent: return "SolvableNotNilpotent";
    case AlgebraKind::NonSolvable: return "NonSolvable";
  }
  return "?";
}

SubspaceInfo orthonormal_span(const CMatrix& columns, double reference_scale) {
  SubspaceInfo info;
  if (columns.cols() == 0 || columns.rows() == 0) {
    info.basis = CMatrix(columns.rows(), 0);
    return info;
  }
  Eigen::BDCSVD<CMatrix> svd(columns, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax == 0.0 || smax <= kRankCutoff * reference_scale) {
    info.basis = CMatrix(columns.rows(), 0);
    return info;
  }
  const double cutoff = kRankCutoff * std::max(smax, reference_scale);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
    if (s(i) > cutoff / kAmbiguityBand && s(i) < cutoff * kAmbiguityBand) info.ill_conditioned = true;
  }
  info.basis = svd.matrixU().leftCols(rank);
  return info;
}

namespace {

// span{[x, y] : x in cols(X), y in cols(Y)}; inputs have unit columns.
SubspaceInfo bracket_span(const LieAlgebra& alg, const CMatrix& X, const CMatrix& Y) {
  CMatrix cols(alg.dim(), X.cols() * Y.cols());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    for (Eigen::Index j = 0; j < Y.cols(); ++j) cols.col(k++) = bracket(alg, X.col(i), Y.col(j));
  return orthonormal_span(cols, alg.max_abs_constant());
}

}  // namespace

AlgebraClass classify_algebra(const LieAlgebra& alg) {
  AlgebraClass out;
  const int d = alg.dim();
  const CMatrix full = CMatrix::Identity(d, d);

  auto note = [&](const SubspaceInfo& info, const char* series) {
    if (info.ill_conditioned) {
      out.ill_conditioned = true;
      if (!out.warning.empty()) out.warning += "; ";
      out.warning += std::string("rank decision near cutoff in ") + series;
    }
  };

  // Lower central series: stop at zero or when it stalls.
  out.lower_central_dims.push_back(d);
  CMatrix current = full;
  while (current.cols() > 0) {
    const SubspaceInfo next = bracket_span(alg, full, current);
    note(next, "lower central series");
    if (next.basis.cols() == current.cols()) break;
    out.lower_central_dims.push_back(static_cast<int>(next.basis.cols()));
    current = next.basis;
  }

  out.derived_dims.push_back(d);
  current = full;
  bool first = true;
  while (current.cols() > 0) {
    const SubspaceInfo next = bracket_span(alg, current, current);
    note(next, "derived series");
    if (first) {
      for (Eigen::Index i = 0; i < next.basis.cols(); ++i)
        out.derived_subalgebra_basis.push_back(next.basis.col(i));
      first = false;
    }
    if (next.basis.cols() == current.cols()) break;
    out.derived_dims.push_back(static_cast<int>(next.basis.cols()));
    current = next.basis;
  }

  if (out.lower_central_dims.back() == 0)
    out.kind = AlgebraKind::Nilpotent;
  else if (out.derived_dims.back() == 0)
    out.kind = AlgebraKind::SolvableNotNilpotent;
  else
    out.kind = AlgebraKind::NonSolvable;
  return out;
}

nlohmann::json to_json(const AlgebraClass& cls) {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& v : cls.derived_subalgebra_basis) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back({v(i).real(), v(i).imag()});
    basis.push_back(row);
  }
  return {{"kind", to_string(cls.kind)},
          {"lower_central_dims", cls.lower_central_dims},
          {"derived_dims", cls.derived_dims},
          {"derived_subalgebra_basis", basis},
          {"ill_conditioned", cls.ill_conditioned},
          {"warning", cls.warning}};
}

CMatrix killing_metric(const LieAlgebra& alg) {
  const int d = alg.dim();
  std::vector<CMatrix> ads;
  ads.reserve(d);
  for (int a = 0; a < d; ++a) ads.push_back(alg.ad(a));
  CMatrix B(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      B(a, b) = (ads[a] * ads[b]).trace();
      B(b, a) = B(a, b);
    }
  return B;
}

HomomorphismReport homomorphism_deviation(const Homomorphism& rho) {
  const int m = rho.source.dim();
  const int n = rho.target.dim();
  if (rho.matrix.rows() != n || rho.matrix.cols() != m)
    throw ArgumentError("homomorphism matrix must be target.dim x source.dim");
  HomomorphismReport rep;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const CVector ea = CVector::Unit(m, a);
      const CVector eb = CVector::Unit(m, b);
      const CVector lhs = rho.matrix * bracket(rho.source, ea, eb);
      const CVector rhs = bracket(rho.target, rho.matrix.col(a), rho.matrix.col(b));
      const double dev = (lhs - rhs).cwiseAbs().maxCoeff();
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_alpha = a;
        rep.worst_beta = b;
      }
    }
  rep.valid = rep.max_deviation <= kHomomorphismTolerance;
  return rep;
}

HomomorphismReport validate_homomorphism(const Homomorphism& rho) {
  HomomorphismReport rep = homomorphism_deviation(rho);
  if (!rep.valid) {
    const auto& labels = rho.source.labels();
    std::ostringstream os;
    os << "not a homomorphism: bracket mismatch at pair (" << labels[rep.worst_alpha] << ","
       << labels[rep.worst_beta] << "), deviation " << rep.max_deviation;
    throw NotAHomomorphism(os.str(), rep.worst_alpha, rep.worst_beta, rep.max_deviation);
  }
  return rep;
}

Homomorphism summand_projection(const LieAlgebra& sum, int which) {
  if (sum.spec().kind != AlgebraSpec::Kind::DirectSum)
    throw ArgumentError("summand_projection needs a direct_sum algebra");
  if (which != 0 && which != 1) throw ArgumentError("summand index must be 0 or 1");
  LieAlgebra left = construct_algebra(sum.spec().summands[0]);
  LieAlgebra right = construct_algebra(sum.spec().summands[1]);
  const int offset = which == 0 ? 0 : left.dim();
  LieAlgebra target = which == 0 ? std::move(left) : std::move(right);
  CMatrix P = CMatrix::Zero(target.dim(), sum.dim());
  for (int i = 0; i < target.dim(); ++i) P(i, offset + i) = 1.0;
  return Homomorphism{sum, std::move(target), std::move(P)};
}

}  // namespace hcf::lie
