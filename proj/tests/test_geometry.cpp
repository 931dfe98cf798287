#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "hcf/geometry.hpp"
#include "oracles.hpp"

using namespace hcf;
using namespace hcf::geometry;
using forms::HermitianForm;

namespace {

const Complex I(0.0, 1.0);

std::vector<oracle::Field> oracle_fields(const HomogeneousModel& m) {
  std::vector<oracle::Field> out;
  for (const auto& f : m.fields) out.push_back({f.A, f.b});
  return out;
}

HermitianForm diag(std::vector<double> v) {
  return HermitianForm::diagonal(Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size())));
}

CVector point(std::initializer_list<Complex> xs) {
  CVector z(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) z(i++) = x;
  return z;
}

std::vector<HomogeneousModel> all_models() {
  return {build_model(parse_model_spec("hopf_sl2")), build_model(parse_model_spec("heisenberg_left")),
          build_model(parse_model_spec("translations:2")), build_model(parse_model_spec("translations(4)"))};
}

}  // namespace

TEST_CASE("field bracket") {
  // X = d/dz1, Y = z1 d/dz2: [X, Y] = d/dz2.
  AffineField x{CMatrix::Zero(2, 2), point({1.0, 0.0})};
  AffineField y{CMatrix::Zero(2, 2), CVector::Zero(2)};
  y.A(1, 0) = 1.0;
  const auto xy = field_bracket(x, y);
  CHECK(xy.A.norm() == 0.0);
  CHECK(xy.b(0) == Complex{});
  CHECK(xy.b(1) == Complex(1.0));
  const auto yx = field_bracket(y, x);
  CHECK((yx.b + xy.b).norm() == 0.0);

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const oracle::Field a{oracle::random_hermitian(3, rng), oracle::random_point(3, rng)};
    const oracle::Field b{oracle::random_pd(3, rng), oracle::random_point(3, rng)};
    const auto ref = oracle::bracket(a, b);
    const auto got = field_bracket({a.A, a.b}, {b.A, b.b});
    CHECK((got.A - ref.A).norm() < 1e-13);
    CHECK((got.b - ref.b).norm() < 1e-13);
    // Pointwise: [X,Y](z) = DY(z) X(z) - DX(z) Y(z).
    const CVector z = oracle::random_point(3, rng);
    const CVector direct = b.A * a.at(z) - a.A * b.at(z);
    CHECK((got(z) - direct).norm() < 1e-12);
  }
}

TEST_CASE("built-in models") {
  const auto hopf = build_model(parse_model_spec("hopf_sl2"));
  CHECK(hopf.ambient_dim == 2);
  CHECK(hopf.alg.dim() == 3);
  CHECK(hopf.sign_convention == -1);
  CHECK(hopf.bracket_residual < 1e-15);

  const auto heis = build_model(parse_model_spec("heisenberg_left"));
  CHECK(heis.sign_convention == 1);
  CHECK(heis.ambient_dim == 3);
  const auto br = field_bracket(heis.fields[0], heis.fields[1]);
  CHECK(br.A.norm() == 0.0);
  CHECK((br.b - heis.fields[2].b).norm() == 0.0);
  CHECK(field_bracket(heis.fields[0], heis.fields[2]).b.norm() == 0.0);

  const auto tr = build_model(parse_model_spec("translations:3"));
  CHECK(tr.sign_convention == 1);
  CHECK(tr.alg.dim() == 3);
  CHECK(tr.evaluation_matrix(point({1.0, 2.0, 3.0})).isApprox(CMatrix::Identity(3, 3)));

  // Bracket relation holds with the measured sign, pair by pair.
  for (const auto& m : all_models()) {
    const int d = m.alg.dim();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const auto lhs = field_bracket(m.fields[a], m.fields[b]);
        CMatrix A = CMatrix::Zero(m.ambient_dim, m.ambient_dim);
        CVector v = CVector::Zero(m.ambient_dim);
        for (int g = 0; g < d; ++g) {
          A += static_cast<double>(m.sign_convention) * m.alg.c(a, b, g) * m.fields[g].A;
          v += static_cast<double>(m.sign_convention) * m.alg.c(a, b, g) * m.fields[g].b;
        }
        CHECK((lhs.A - A).norm() < 1e-14);
        CHECK((lhs.b - v).norm() < 1e-14);
      }
  }
}

TEST_CASE("model spec parsing and JSON") {
  CHECK(parse_model_spec("translations(5)").n == 5);
  CHECK(parse_model_spec("translations:2").kind == ModelSpec::Kind::Translations);
  CHECK_THROWS_AS(parse_model_spec("sphere"), ParseError);
  CHECK_THROWS_AS(parse_model_spec("translations:x"), ParseError);
  for (const char* s : {"hopf_sl2", "heisenberg_left", "translations:4"}) {
    const auto spec = parse_model_spec(s);
    CHECK(spec.to_string() == s);
    CHECK(model_spec_from_json(to_json(spec)).to_string() == s);
  }

  // Custom model equal to heisenberg_left, given as JSON text.
  const auto heis = build_model(parse_model_spec("heisenberg_left"));
  ModelSpec custom;
  custom.kind = ModelSpec::Kind::Custom;
  custom.algebra = lie::AlgebraSpec::strict_upper(3);
  custom.fields = heis.fields;
  const auto text = to_json(custom).dump();
  const auto parsed = parse_model_spec(text);
  REQUIRE(parsed.kind == ModelSpec::Kind::Custom);
  REQUIRE(parsed.fields.size() == 3);
  for (int a = 0; a < 3; ++a) {
    CHECK((parsed.fields[a].A - heis.fields[a].A).norm() == 0.0);
    CHECK((parsed.fields[a].b - heis.fields[a].b).norm() == 0.0);
  }
  const auto built = build_model(parsed);
  CHECK(built.sign_convention == 1);
  CHECK_THROWS_AS(parse_model_spec(R"({"kind":"custom","algebra":"su2c","fields":[[[1],[1,0]]]})"),
                  ParseError);
}

TEST_CASE("invalid custom models") {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::Custom;
  spec.algebra = lie::AlgebraSpec::su2c();
  // Translations do not realize su2.
  for (int i = 0; i < 3; ++i) spec.fields.push_back({CMatrix::Zero(3, 3), CVector::Unit(3, i)});
  try {
    build_model(spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
  spec.fields.pop_back();
  CHECK_THROWS_AS(build_model(spec), ValidationError);

  // Correct brackets but the evaluation map is not onto.
  ModelSpec flat;
  flat.kind = ModelSpec::Kind::Custom;
  flat.algebra = lie::AlgebraSpec::abelian(2);
  flat.fields = {{CMatrix::Zero(2, 2), point({1.0, 0.0})}, {CMatrix::Zero(2, 2), point({2.0, 0.0})}};
  CHECK_THROWS_AS(build_model(flat), ValidationError);
}

TEST_CASE("induced metric") {
  const auto hopf = build_model(parse_model_spec("hopf_sl2"));
  const auto ms = induced_metric(hopf, HermitianForm::identity(3), point({1.0, 0.0}));
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = 0.25;
  expect(1, 1) = 0.5;
  CHECK((ms.g_upper - expect).norm() < 1e-15);
  CHECK((ms.g_upper * ms.g_lower - CMatrix::Identity(2, 2)).norm() < 1e-13);

  const auto heis = build_model(parse_model_spec("heisenberg_left"));
  const auto mh = induced_metric(heis, HermitianForm::identity(3), point({2.0, 0.0, 0.0}));
  CHECK(mh.g_upper(2, 2).real() == doctest::Approx(5.0));
  CHECK(mh.g_upper(1, 2).real() == doctest::Approx(2.0));

  const auto tr = build_model(parse_model_spec("translations:3"));
  CHECK(induced_metric(tr, HermitianForm::identity(3), point({5.0, I, -1.0})).g_upper.isApprox(CMatrix::Identity(3, 3)));

  std::mt19937_64 rng(67);
  for (const auto& m : all_models()) {
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix h = oracle::random_pd(m.alg.dim(), rng);
      const CVector z = oracle::random_point(m.ambient_dim, rng);
      const auto got = induced_metric(m, HermitianForm(h), z);
      CHECK(oracle::rel(got.g_upper, oracle::naive_g_upper(oracle_fields(m), h, z)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(induced_metric(hopf, HermitianForm::identity(3), point({0.0, 0.0})), EvaluationError);
  CHECK_THROWS_AS(induced_metric(hopf, diag({1, 0, 0}), point({1.0, 0.0})), EvaluationError);
  CHECK_THROWS_AS(induced_metric(hopf, HermitianForm::identity(2), point({1.0, 0.0})), ArgumentError);
  CHECK_THROWS_AS(induced_metric(hopf, HermitianForm::identity(3), point({1.0, 0.0, 0.0})), ArgumentError);
}

TEST_CASE("theta: three computations against the oracle") {
  std::mt19937_64 rng(71);
  for (const auto& m : all_models()) {
    CAPTURE(m.name);
    for (int trial = 0; trial < 8; ++trial) {
      const CMatrix hm = oracle::random_pd(m.alg.dim(), rng);
      const HermitianForm h(hm);
      const CVector z = oracle::random_point(m.ambient_dim, rng);
      const CMatrix ref = oracle::naive_theta(oracle_fields(m), hm, z);
      const CMatrix tb = theta_brackets(m, h, z);
      const CMatrix tc = theta_coordinate(m, h, z);
      const CMatrix tf = theta_coordinate_fd(m, h, z);
      const CMatrix push = pushed_sharp_square(m, h, z);
      CHECK(oracle::rel(tb, ref) < 1e-12);
      CHECK(oracle::rel(tc, ref) < 1e-10);
      CHECK(oracle::rel(tf, ref) < 1e-5);
      CHECK(oracle::rel(push, ref) < 1e-12);
      // Hermitian and positive semidefinite.
      CHECK((tb - tb.adjoint()).norm() <= 1e-14 * std::max(1.0, tb.norm()));
      const Eigen::SelfAdjointEigenSolver<CMatrix> es(tb);
      CHECK(es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, tb.norm()));
    }
  }
}

TEST_CASE("theta on flat models") {
  const auto heis = build_model(parse_model_spec("heisenberg_left"));
  const auto h = diag({2, 3, 7});
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 5; ++trial) {
    const CVector z = oracle::random_point(3, rng);
    const CMatrix t = theta_brackets(heis, h, z);
    CMatrix expect = CMatrix::Zero(3, 3);
    expect(2, 2) = 6.0;
    CHECK((t - expect).norm() < 1e-13);
    CHECK((theta_coordinate(heis, h, z) - expect).norm() < 1e-12);
  }
  const auto tr = build_model(parse_model_spec("translations:3"));
  const auto z = point({1.0, I, 2.0});
  CHECK(theta_brackets(tr, HermitianForm::identity(3), z).norm() == 0.0);
  CHECK(theta_coordinate(tr, HermitianForm::identity(3), z).norm() == 0.0);
  CHECK_THROWS_AS(theta_brackets(tr, diag({1, 0, 1}), z), ArgumentError);
}

TEST_CASE("scale-static check") {
  std::mt19937_64 rng(79);
  std::vector<CVector> pts2, pts3;
  for (int i = 0; i < 10; ++i) {
    pts2.push_back(oracle::random_point(2, rng));
    pts3.push_back(oracle::random_point(3, rng));
  }
  const auto hopf = build_model(parse_model_spec("hopf_sl2"));
  const auto r = scale_static_check(hopf, HermitianForm::identity(3), pts2);
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.max_relative_deviation < 1e-8);
  // Scaling h by s scales lambda by s.
  const auto r2 = scale_static_check(hopf, 2.5 * HermitianForm::identity(3), pts2);
  CHECK(r2.lambda == doctest::Approx(2.5).epsilon(1e-10));

  const auto bad = scale_static_check(hopf, diag({1, 1, 2}), pts2);
  CHECK(bad.max_relative_deviation > 0.1);

  const auto tr = build_model(parse_model_spec("translations:3"));
  const auto z = scale_static_check(tr, HermitianForm::identity(3), pts3);
  CHECK(z.lambda == 0.0);
  CHECK(z.max_relative_deviation == 0.0);

  CHECK_THROWS_AS(scale_static_check(hopf, HermitianForm::identity(3), {pts2[0]}), ArgumentError);
  CHECK_THROWS_AS(scale_static_check(hopf, diag({1, 0, 1}), pts2), ArgumentError);
  CHECK(relative_deviation(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)) == 0.0);
}

TEST_CASE("point files") {
  const auto path = (std::filesystem::temp_directory_path() / "hcf_points_test.csv").string();
  const std::vector<CVector> pts = {point({Complex(0.1, -2.0), Complex(1e-17, 3.0)}),
                                    point({Complex(1.0 / 3.0, 0.0), Complex(-7.0, 0.25)})};
  write_points_csv(path, pts);
  const auto back = read_points_csv(path, 2);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK((back[i] - pts[i]).norm() == 0.0);
  CHECK_THROWS_AS(read_points_csv(path, 3), ParseError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_points_csv(path, 2), ParseError);
}
