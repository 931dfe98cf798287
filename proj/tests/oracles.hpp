#pragma once

// Brute-force reference implementations. Nothing here calls into the library.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Constants {
  int dim = 0;
  std::vector<C> c;  // c[(a*dim + b)*dim + g]

  explicit Constants(int d) : dim(d), c(static_cast<std::size_t>(d) * d * d, C{}) {}
  C& at(int a, int b, int g) { return c[(static_cast<std::size_t>(a) * dim + b) * dim + g]; }
  [[nodiscard]] C get(int a, int b, int g) const {
    return c[(static_cast<std::size_t>(a) * dim + b) * dim + g];
  }
};

inline Constants abelian(int n) { return Constants(n); }

// [e_a, e_b] = eps_{abg} e_g.
inline Constants su2c() {
  Constants k(3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int g = 0; g < 3; ++g) {
        // Levi-Civita symbol for indices in {0, 1, 2}.
        k.at(a, b, g) = 0.5 * (a - b) * (b - g) * (g - a);
      }
  return k;
}

inline Mat unit(int n, int i, int j) {
  Mat m = Mat::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

// Elementary matrices ordered by band j - i, then row.
inline std::vector<Mat> matrix_basis(int n, bool include_diagonal) {
  std::vector<Mat> out;
  for (int band = include_diagonal ? 0 : 1; band < n; ++band)
    for (int i = 0; i + band < n; ++i) out.push_back(unit(n, i, i + band));
  return out;
}

// Structure constants of a matrix Lie algebra by least-squares decomposition of commutators.
inline Constants from_matrices(const std::vector<Mat>& basis) {
  const int d = static_cast<int>(basis.size());
  const int n = static_cast<int>(basis.front().rows());
  Mat B(n * n, d);
  for (int a = 0; a < d; ++a) B.col(a) = Eigen::Map<const Vec>(basis[a].data(), n * n);
  Constants k(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Mat comm = basis[a] * basis[b] - basis[b] * basis[a];
      const Vec coeff = B.colPivHouseholderQr().solve(Eigen::Map<const Vec>(comm.data(), n * n));
      for (int g = 0; g < d; ++g) k.at(a, b, g) = std::abs(coeff(g)) < 1e-14 ? C{} : coeff(g);
    }
  return k;
}

inline Constants strict_upper(int n) { return from_matrices(matrix_basis(n, false)); }
inline Constants borel(int n) { return from_matrices(matrix_basis(n, true)); }

inline Constants direct_sum(const Constants& x, const Constants& y) {
  Constants k(x.dim + y.dim);
  for (int a = 0; a < x.dim; ++a)
    for (int b = 0; b < x.dim; ++b)
      for (int g = 0; g < x.dim; ++g) k.at(a, b, g) = x.get(a, b, g);
  for (int a = 0; a < y.dim; ++a)
    for (int b = 0; b < y.dim; ++b)
      for (int g = 0; g < y.dim; ++g) k.at(x.dim + a, x.dim + b, x.dim + g) = y.get(a, b, g);
  return k;
}

// (h#k)(a,b) = sum c[e][d][a] conj(c[g][t][b]) h(e,g) k(d,t), six nested loops.
inline Mat naive_sharp(const Constants& k, const Mat& h, const Mat& kk) {
  const int d = k.dim;
  Mat out = Mat::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      C acc{};
      for (int e = 0; e < d; ++e)
        for (int dd = 0; dd < d; ++dd) {
          const C c1 = k.get(e, dd, a);
          if (c1 == C{}) continue;
          for (int g = 0; g < d; ++g)
            for (int t = 0; t < d; ++t) acc += c1 * std::conj(k.get(g, t, b)) * h(e, g) * kk(dd, t);
        }
      out(a, b) = acc;
    }
  return out;
}

inline Mat naive_sharp_square(const Constants& k, const Mat& h) { return 0.5 * naive_sharp(k, h, h); }

inline Mat killing(const Constants& k) {
  const int d = k.dim;
  Mat out = Mat::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      C tr{};
      // tr(ad_a ad_b) = sum_{x,y} c[a][y][x] c[b][x][y]
      for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) tr += k.get(a, y, x) * k.get(b, x, y);
      out(a, b) = tr;
    }
  return out;
}

// Classical RK4 on dh/dt = h^#, fixed step.
inline Mat rk4_flow(const Constants& k, Mat h, double t_end, int steps) {
  const double dt = t_end / steps;
  auto f = [&](const Mat& x) { return naive_sharp_square(k, x); };
  for (int i = 0; i < steps; ++i) {
    const Mat k1 = f(h);
    const Mat k2 = f(h + 0.5 * dt * k1);
    const Mat k3 = f(h + 0.5 * dt * k2);
    const Mat k4 = f(h + dt * k3);
    h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return h;
}

// Affine field s(z) = A z + b.
struct Field {
  Mat A;
  Vec b;
  [[nodiscard]] Vec at(const Vec& z) const { return A * z + b; }
};

inline Field bracket(const Field& x, const Field& y) {
  // [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i for X = A z + b, Y = C z + d.
  return {y.A * x.A - x.A * y.A, y.A * x.b - x.A * y.b};
}

// Theta = 1/2 sum_{a,b,c,d} h(a,c) h(b,d) [s_a,s_b](z) conj([s_c,s_d](z))^T, no frame change.
inline Mat naive_theta(const std::vector<Field>& fields, const Mat& h, const Vec& z) {
  const int d = static_cast<int>(fields.size());
  const int n = static_cast<int>(z.size());
  std::vector<Vec> br(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) br[a * d + b] = bracket(fields[a], fields[b]).at(z);
  Mat out = Mat::Zero(n, n);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) out += 0.5 * h(a, c) * h(b, e) * br[a * d + b] * br[c * d + e].adjoint();
  return out;
}

inline Mat naive_g_upper(const std::vector<Field>& fields, const Mat& h, const Vec& z) {
  const int n = static_cast<int>(z.size());
  Mat g = Mat::Zero(n, n);
  for (std::size_t a = 0; a < fields.size(); ++a)
    for (std::size_t b = 0; b < fields.size(); ++b)
      g += h(static_cast<int>(a), static_cast<int>(b)) * fields[a].at(z) * fields[b].at(z).adjoint();
  return g;
}

inline Mat random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = C(g(rng), g(rng));
  return 0.5 * (m + m.adjoint());
}

inline Mat random_pd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = C(g(rng), g(rng));
  return m * m.adjoint() + 0.1 * Mat::Identity(d, d);
}

inline Vec random_point(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = C(g(rng), g(rng));
  return z;
}

inline double rel(const Mat& x, const Mat& y) {
  const double s = std::max(x.norm(), y.norm());
  return s == 0.0 ? 0.0 : (x - y).norm() / s;
}

}  // namespace oracle
