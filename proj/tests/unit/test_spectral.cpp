#include <cmath>
#include <numbers>

#include "doctest.h"
#include "isoctl/error.hpp"
#include "isoctl/spectral.hpp"

using namespace isoctl;
constexpr double kPi = std::numbers::pi;

namespace {

std::shared_ptr<const Grid> circle_grid(std::size_t n) {
  return discretize_nodes(MetricDomain::circle(Length::pi_multiple(2)), n);
}

std::vector<double> values(const std::vector<EigenPair>& p) {
  std::vector<double> v;
  for (const auto& e : p) v.push_back(e.lambda);
  return v;
}

}  // namespace

TEST_CASE("circle spectrum with V = 0") {
  auto g = circle_grid(512);
  auto pairs = circle_spectrum(RealFunction(g, 0.0), 5);
  const double expect[] = {0, 1, 1, 4, 4};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(pairs[i].lambda - expect[i]) <= 1e-3);
}

TEST_CASE("constant potential shifts the discrete spectrum exactly") {
  auto g = circle_grid(64);
  auto base = fd_eigenvalues(g, nullptr, 6);
  RealFunction c(g, 2.5);
  auto shifted = fd_eigenvalues(g, &c, 6);
  for (int i = 0; i < 6; ++i) CHECK(shifted[i] - base[i] == doctest::Approx(2.5).epsilon(1e-7));
  auto dense0 = circle_spectrum(RealFunction(g, 0.0), 6);
  auto dense = circle_spectrum(c, 6);
  for (int i = 0; i < 6; ++i) CHECK(dense[i].lambda - dense0[i].lambda == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("assembled operator is exactly symmetric") {
  for (auto d : {eight_graph(), three_branch_graph()}) {
    auto g = discretize_nodes(d, 33);
    RealFunction V = RealFunction::sample(g, [](std::size_t e, double x) { return std::cos(x) + 0.1 * e; });
    auto op = assemble(g, &V);
    auto a = op.symmetric_matrix();
    const std::size_t n = op.dofs();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(a[i * n + j] == a[j * n + i]);
  }
}

TEST_CASE("sturm and dense paths agree") {
  auto g = discretize_nodes(three_branch_graph(), 41);
  auto dense = graph_spectrum_numeric(g, nullptr, 10);
  auto sturm = fd_eigenvalues(g, nullptr, 10);
  auto serial = fd_eigenvalues(g, nullptr, 10, 1e-12, kernels::Backend::Serial);
  for (int i = 0; i < 10; ++i) {
    CHECK(sturm[i] == doctest::Approx(dense[i].lambda).epsilon(1e-7));
    CHECK(sturm[i] == serial[i]);
  }
}

TEST_CASE("eight graph numeric spectrum: values, clusters, orthogonality, vertex conditions") {
  auto g = discretize_nodes(eight_graph(), 257);
  auto pairs = graph_spectrum_numeric(g, nullptr, 13);
  const double expect[] = {0, 0.25, 1, 1, 1, 2.25, 4, 4, 4, 6.25, 9, 9, 9};
  for (int i = 0; i < 13; ++i) CHECK(std::abs(pairs[i].lambda - expect[i]) <= 1e-3 * (1 + expect[i]));
  auto sizes = cluster_sizes(values(pairs));
  CHECK(sizes == std::vector<std::size_t>{1, 1, 3, 1, 3, 1, 3});
  double worst = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = 0; j < pairs.size(); ++j)
      worst = std::max(worst, std::abs(inner_product(pairs[i].phi, pairs[j].phi) - (i == j ? 1.0 : 0.0)));
  CHECK(worst <= 1e-8);
  for (const auto& p : pairs) {
    CHECK(is_conforming(p.phi));
    CHECK(eigen_residual(p.phi, nullptr, p.lambda) <= 1e-3 * (1 + p.lambda));
  }
}

TEST_CASE("dirichlet interval") {
  auto dom = MetricDomain::interval(Length::pi_multiple(2), BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
  auto g = discretize_nodes(dom, 1025);
  auto ev = fd_eigenvalues(g, nullptr, 6);
  for (int k = 1; k <= 6; ++k) CHECK(std::abs(ev[k - 1] - k * k / 4.0) <= 1e-3 * (1 + k * k / 4.0));
  // Brute-force oracle: the sampled sine is an exact discrete eigenvector.
  auto pairs = graph_spectrum_numeric(discretize_nodes(dom, 65), nullptr, 3);
  auto sine = WaveFunction::sample(pairs[1].phi.grid_ptr(), [](std::size_t, double x) { return cplx(std::sin(x), 0); });
  sine = normalized(sine);
  CHECK(std::abs(std::abs(inner_product(sine, pairs[1].phi)) - 1.0) < 1e-12);
}

TEST_CASE("three-branch numeric spectrum") {
  auto g = discretize_nodes(three_branch_graph(), 513);
  auto ev = fd_eigenvalues(g, nullptr, 10);
  const double expect[] = {0, 0.25, 0.25, 0.25, 1, 1, 1, 2.25, 2.25, 2.25};
  for (int i = 0; i < 10; ++i) CHECK(std::abs(ev[i] - expect[i]) <= 1e-3 * (1 + expect[i]));
}

TEST_CASE("eigenvalues converge at second order on the canonical graphs") {
  for (auto d : {eight_graph(), three_branch_graph()}) {
    auto exact = graph_spectrum_analytic(d, 5);
    std::vector<double> want;
    for (const auto& m : exact.modes) want.push_back(m.lambda);
    auto coarse = fd_eigenvalues(discretize_nodes(d, 257), nullptr, want.size());
    auto fine = fd_eigenvalues(discretize_nodes(d, 513), nullptr, want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (want[i] == 0) continue;
      double ratio = (coarse[i] - want[i]) / (fine[i] - want[i]);
      CHECK(ratio >= 3.5);
      CHECK(ratio <= 4.5);
    }
  }
}

TEST_CASE("analytic secular spectra") {
  auto eight = graph_spectrum_analytic(eight_graph(), 12.25);
  std::vector<std::pair<Rational, std::size_t>> want = {{0, 1}, {Rational(1, 2), 1}, {1, 3}, {Rational(3, 2), 1},
                                                       {2, 3}, {Rational(5, 2), 1}, {3, 3}, {Rational(7, 2), 1}};
  REQUIRE(eight.scan.roots.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(eight.scan.roots[i].exact_omega.value() == want[i].first);
    CHECK(eight.scan.roots[i].nullity == want[i].second);
  }
  auto tb = graph_spectrum_analytic(three_branch_graph(), 12.25);
  REQUIRE(tb.scan.roots.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(tb.scan.roots[k].exact_omega.value() == Rational(static_cast<std::int64_t>(k), 2));
    CHECK(tb.scan.roots[k].nullity == (k == 0 ? 1u : 3u));
  }
  auto loop = graph_spectrum_analytic(build_graph({{Length::pi_multiple(2), 0, 0}}, {BoundaryKind::NeumannKirchhoff}), 4);
  std::vector<double> lv;
  for (const auto& m : loop.modes) lv.push_back(m.lambda);
  CHECK(lv == std::vector<double>{0, 1, 1, 4, 4});
  // Agrees with the circle finite-difference oracle.
  auto fd = fd_eigenvalues(circle_grid(1024), nullptr, 5);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(fd[i] - lv[i]) < 1e-4);
}

TEST_CASE("analytic eigenfunctions are orthonormal and satisfy vertex conditions") {
  auto spec = graph_spectrum_analytic(eight_graph(), 9);
  auto g = discretize_nodes(eight_graph(), 2049);
  auto pairs = sample_modes(spec, g);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(eigen_residual(pairs[i].phi, nullptr, pairs[i].lambda) <= 1e-4 * (1 + pairs[i].lambda));
    CHECK(is_conforming(pairs[i].phi));
    for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(inner_product(pairs[i].phi, pairs[j].phi)) < 1e-8);
  }
  for (const auto& m : spec.modes) {
    auto v = vertex_report(m.phi, eight_graph());
    CHECK(v[0].value_spread < 1e-10);
    CHECK(std::abs(v[0].kirchhoff_sum) < 1e-10);
  }
}

TEST_CASE("eigen residual examples") {
  auto g = circle_grid(4096);
  auto one = WaveFunction(g, 1.0);
  CHECK(eigen_residual(one, nullptr, 0.0) == 0.0);
  auto e = WaveFunction::sample(g, [](std::size_t, double x) { return std::polar(1.0, x); });
  CHECK(eigen_residual(e, nullptr, 2.0) == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-5));
  CHECK(eigen_residual(e, nullptr, 1.0) <= 1e-4 * 2);
}

TEST_CASE("too coarse grids are rejected") {
  CHECK_THROWS_AS(circle_spectrum(RealFunction(circle_grid(8), 0.0), 3), Error);
  CHECK_THROWS_AS(graph_spectrum_numeric(discretize_nodes(eight_graph(), 3), nullptr, 10), Error);
}
