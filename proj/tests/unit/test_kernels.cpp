#include <cmath>
#include <random>

#include "doctest.h"
#include "isoctl/kernels.hpp"

using namespace isoctl::kernels;

namespace {

std::vector<double> random_symmetric(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a[i * n + j] = a[j * n + i] = g(rng);
  return a;
}

double residual(const std::vector<double>& a, std::size_t n, const SymEig& r) {
  double worst = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * r.vectors[j * n + k];
      worst = std::max(worst, std::abs(s - r.values[j] * r.vectors[j * n + i]));
    }
  return worst;
}

}  // namespace

TEST_CASE("dense eigensolver: residuals, orthogonality, backends agree") {
  for (std::size_t n : {1u, 2u, 3u, 17u, 120u}) {
    auto a = random_symmetric(n, 40 + n);
    auto s = sym_eig(a, n, true, Backend::Serial);
    auto p = sym_eig(a, n, true, Backend::OpenMP);
    CHECK(residual(a, n, s) < 1e-11 * n);
    double worst_ortho = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double d = 0;
        for (std::size_t k = 0; k < n; ++k) d += s.vectors[i * n + k] * s.vectors[j * n + k];
        worst_ortho = std::max(worst_ortho, std::abs(d - (i == j ? 1.0 : 0.0)));
      }
    CHECK(worst_ortho < 1e-12 * n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(s.values[i] - p.values[i]) < 1e-10);
      if (i) CHECK(s.values[i - 1] <= s.values[i]);
    }
    auto values_only = sym_eig(a, n, false);
    auto jac = jacobi_eig(a, n, false);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(values_only.values[i] - s.values[i]) < 1e-10);
      CHECK(std::abs(jac.values[i] - s.values[i]) < 1e-10);
    }
  }
}

TEST_CASE("eigensolver handles an exactly diagonal matrix with repeated values") {
  std::vector<double> a = {2, 0, 0, 0, 1, 0, 0, 0, 2};
  auto r = sym_eig(a, 3, true);
  CHECK(r.values[0] == doctest::Approx(1));
  CHECK(r.values[1] == doctest::Approx(2));
  CHECK(r.values[2] == doctest::Approx(2));
  CHECK(residual(a, 3, r) < 1e-14);
}

TEST_CASE("singular values match eigenvalues of the Gram matrix") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const std::size_t rows = 7, cols = 5;
  std::vector<double> a(rows * cols);
  for (auto& x : a) x = g(rng);
  // Make it rank deficient by one.
  for (std::size_t i = 0; i < rows; ++i) a[i * cols + 4] = a[i * cols + 0] - 2 * a[i * cols + 1];
  std::vector<double> v;
  auto sv = singular_values(a, rows, cols, &v);
  std::vector<double> gram(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t k = 0; k < rows; ++k) gram[i * cols + j] += a[k * cols + i] * a[k * cols + j];
  auto ev = jacobi_eig(gram, cols, false);
  // Squaring loses half the digits, so the rank-deficient direction is compared absolutely.
  for (std::size_t i = 0; i + 1 < cols; ++i)
    CHECK(sv[i] == doctest::Approx(std::sqrt(ev.values[cols - 1 - i])).epsilon(1e-9));
  CHECK(std::abs(ev.values[0]) < 1e-12);
  CHECK(sv.back() < 1e-12);
  // The last right singular vector spans the null space.
  for (std::size_t k = 0; k < rows; ++k) {
    double s = 0;
    for (std::size_t j = 0; j < cols; ++j) s += a[k * cols + j] * v[(cols - 1) * cols + j];
    CHECK(std::abs(s) < 1e-12);
  }
}

TEST_CASE("chain inertia agrees with the dense spectrum") {
  // Two chains between vertices 0 and 1 plus a loop on vertex 1 and a Dirichlet-ended chain.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  ChainSystem sys;
  sys.vertex_diag = {3.0, 4.0};
  sys.vertex_mass = {u(rng), u(rng)};
  sys.vertex_off = {0.0, -0.3, -0.3, 0.0};
  auto chain = [&](long s, long e, std::size_t m) {
    Chain c;
    c.start = s;
    c.end = e;
    c.couple_start = -u(rng);
    c.couple_end = -u(rng);
    for (std::size_t i = 0; i < m; ++i) {
      c.diag.push_back(2.0 + u(rng));
      c.mass.push_back(u(rng));
      if (i + 1 < m) c.off.push_back(-u(rng));
    }
    return c;
  };
  sys.chains = {chain(0, 1, 5), chain(0, 1, 1), chain(1, 1, 4), chain(0, -1, 3)};
  // Dense assembly of M^{-1/2} K M^{-1/2}.
  std::vector<long> index_base;
  std::size_t n = sys.unknowns();
  std::vector<double> k(n * n, 0.0), m(n, 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    k[i * n + i] = sys.vertex_diag[i];
    m[i] = sys.vertex_mass[i];
  }
  k[0 * n + 1] = k[1 * n + 0] = -0.3;
  std::size_t next = 2;
  for (const auto& c : sys.chains) {
    for (std::size_t i = 0; i < c.diag.size(); ++i) {
      k[(next + i) * n + next + i] = c.diag[i];
      m[next + i] = c.mass[i];
      if (i + 1 < c.diag.size()) k[(next + i) * n + next + i + 1] = k[(next + i + 1) * n + next + i] = c.off[i];
    }
    auto add = [&](long v, std::size_t node, double val) {
      if (v < 0) return;
      k[v * n + node] += val;
      k[node * n + v] += val;
    };
    add(c.start, next, c.couple_start);
    add(c.end, next + c.diag.size() - 1, c.couple_end);
    next += c.diag.size();
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i * n + j] /= std::sqrt(m[i] * m[j]);
  auto dense = sym_eig(k, n, false);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double mid = 0.5 * (dense.values[i] + dense.values[i + 1]);
    if (dense.values[i + 1] - dense.values[i] > 1e-9) CHECK(count_below(sys, mid) == i + 1);
  }
  auto low_s = lowest_eigenvalues(sys, 6, 1e-12, Backend::Serial);
  auto low_p = lowest_eigenvalues(sys, 6, 1e-12, Backend::OpenMP);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(low_s[i] == doctest::Approx(dense.values[i]).epsilon(1e-9));
    CHECK(low_p[i] == low_s[i]);
  }
}

TEST_CASE("basis transforms: serial and parallel agree and round trip") {
  const std::size_t n = 64;
  auto a = random_symmetric(n, 77);
  auto e = sym_eig(a, n, true);
  // Columns of the basis matrix are the eigenvectors; unit weights make it orthogonal.
  std::vector<double> basis(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) basis[i * n + k] = e.vectors[k * n + i];
  std::vector<double> w(n, 1.0);
  std::vector<std::complex<double>> psi(n), cs, cp, back;
  for (std::size_t i = 0; i < n; ++i) psi[i] = {std::sin(0.3 * i), std::cos(0.1 * i * i)};
  project(basis, n, n, w, psi, cs, Backend::Serial);
  project(basis, n, n, w, psi, cp, Backend::OpenMP);
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(cs[k] - cp[k]) < 1e-12);
  resum(basis, n, n, cs, back, Backend::OpenMP);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - psi[i]) < 1e-12);
  std::vector<std::complex<double>> back_s;
  resum(basis, n, n, cs, back_s, Backend::Serial);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - back_s[i]) < 1e-13);
}
