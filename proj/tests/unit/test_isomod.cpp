#include <cmath>
#include <numbers>

#include "doctest.h"
#include "isoctl/error.hpp"
#include "isoctl/isomod.hpp"
#include "isoctl/spectral.hpp"

using namespace isoctl;
constexpr double kPi = std::numbers::pi;

namespace {

std::shared_ptr<const Grid> circle(std::size_t n) {
  return discretize_nodes(MetricDomain::circle(Length::pi_multiple(2)), n);
}

WaveFunction plane(std::shared_ptr<const Grid> g, int k) {
  return WaveFunction::sample(g, [k](std::size_t, double x) { return std::polar(1 / std::sqrt(2 * kPi), k * x); });
}

std::size_t count(const std::vector<ModulusReport>& rs, Verdict v) {
  return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [v](const auto& r) { return r.verdict == v; }));
}

}  // namespace

TEST_CASE("shares_modulus examples") {
  auto g = circle(256);
  auto r = shares_modulus(plane(g, 1), plane(g, -1));
  CHECK(r.verdict == Verdict::Shares);
  CHECK(r.deviation <= 1e-14);
  CHECK(!r.witness);
  auto samples = std::make_shared<const SampleSet>(family_samples(Family::Sphere, 2));
  auto y = shares_modulus(sample_entry(sphere_mode(2, 1), samples), sample_entry(sphere_mode(2, -1), samples));
  CHECK(y.verdict == Verdict::Shares);
  auto hs = std::make_shared<const SampleSet>(family_samples(Family::Hermite, 1));
  auto h = shares_modulus(sample_entry(hermite_mode({1}), hs), sample_entry(hermite_mode({2}), hs));
  CHECK(h.verdict == Verdict::Rejects);
  REQUIRE(h.witness);
  CHECK(h.deviation > 10 * h.tol);
  CHECK_THROWS_AS(shares_modulus(plane(g, 1), plane(circle(128), 1)), Error);
}

TEST_CASE("verdict bands") {
  CHECK(classify_deviation(1e-9, 1e-8) == Verdict::Shares);
  CHECK(classify_deviation(5e-8, 1e-8) == Verdict::Inconclusive);
  CHECK(classify_deviation(2e-7, 1e-8) == Verdict::Rejects);
}

TEST_CASE("eigenspace pairs") {
  auto g = circle(256);
  auto c = WaveFunction::sample(g, [](std::size_t, double x) { return cplx(std::cos(x), 0); });
  auto s = WaveFunction::sample(g, [](std::size_t, double x) { return cplx(std::sin(x), 0); });
  auto [p, m] = eigenspace_isomod_pair(c, s);
  CHECK(std::abs(std::abs(inner_product(p, plane(g, 1))) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(inner_product(m, plane(g, -1))) - 1.0) < 1e-12);
  CHECK(shares_modulus(p, m).deviation <= 1e-13);
  CHECK_THROWS_AS(eigenspace_isomod_pair(c, c), Error);
  auto ic = c;
  for (auto& v : ic.data()) v *= cplx(0, 1);
  CHECK_THROWS_AS(eigenspace_isomod_pair(ic, s), Error);

  auto ds = std::make_shared<const SampleSet>(family_samples(Family::Disk, 2));
  auto [u, v] = disk_real_modes(1, 1);
  auto [dp, dm] = eigenspace_isomod_pair(sample_entry(u, ds), sample_entry(v, ds));
  auto plus = sample_entry(disk_mode(1, 1, 1), ds), minus = sample_entry(disk_mode(1, 1, -1), ds);
  double worst = 0.0;
  for (std::size_t i = 0; i < plus.values.size(); ++i)
    worst = std::max({worst, std::abs(dp.values[i] - plus.values[i]), std::abs(dm.values[i] - minus.values[i])});
  // The sample-set quadrature differs from the exact norm at the 1e-4 level.
  CHECK(worst < 1e-3);
  CHECK(shares_modulus(dp, dm).deviation <= 1e-13);
}

TEST_CASE("eight graph modulus claims") {
  auto entries = family_basis(Family::EightGraph, 4);
  ScanOptions opts;
  // Index of an entry by tag.
  auto at = [&](const std::string& tag) {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].tag == tag) return i;
    FAIL("missing " << tag);
    return std::size_t{0};
  };
  const double a = std::sqrt(2 * kPi), b = std::sqrt(kPi);
  opts.extra.push_back({"eta_0", {{at("eight:ground"), 1.0}}});
  for (int k = 1; k <= 4; ++k) {
    auto t = [&](int j) { return at("eight:e:" + std::to_string(k) + ":" + std::to_string(j)); };
    opts.extra.push_back({"eta_" + std::to_string(k), {{t(1), a}, {t(2), cplx(0, b)}, {t(3), cplx(0, b)}}});
    opts.extra.push_back({"eta_-" + std::to_string(k), {{t(1), -a}, {t(2), cplx(0, b)}, {t(3), cplx(0, b)}}});
  }
  auto reports = scan_catalog_pairs(entries, opts);
  for (const auto& r : reports) {
    INFO(r.first << " vs " << r.second << " dev " << r.deviation);
    const bool eta = r.first.rfind("eta_", 0) == 0 && r.second.rfind("eta_", 0) == 0;
    const bool odd_a = r.first.rfind("eight:o:", 0) == 0, odd_b = r.second.rfind("eight:o:", 0) == 0;
    if (eta) CHECK(r.verdict == Verdict::Shares);
    if (odd_a && odd_b) CHECK(r.verdict == Verdict::Rejects);
    if ((odd_a || odd_b) && r.lambda_first != r.lambda_second && r.lambda_first >= 1 && r.lambda_second >= 1)
      CHECK(r.verdict == Verdict::Rejects);
    if (odd_a != odd_b && r.seed) CHECK(r.verdict == Verdict::Rejects);
  }
  CHECK(count(reports, Verdict::Shares) >= 36);
}

TEST_CASE("three-branch levels never share") {
  auto entries = family_basis(Family::ThreeBranch, 4);
  auto reports = scan_catalog_pairs(entries);
  std::size_t cross = 0;
  for (const auto& r : reports)
    if (r.lambda_first != r.lambda_second) {
      ++cross;
      CHECK(r.verdict == Verdict::Rejects);
    }
  CHECK(cross > 4 * 32 * 32);
}

TEST_CASE("circle construction with two isomodulus zero modes") {
  auto g = circle(8192);
  auto rho = TrigExpression::cos_on(1, 0, 1) + TrigExpression::constant(1, 2);
  auto ex = construct_circle_example(rho, 1, g);
  CHECK(std::abs(ex.C - 3 * std::sqrt(3.0) / 2) <= 1e-6);
  CHECK(std::abs(ex.winding - 2 * kPi) <= 1e-8);
  CHECK(eigen_residual(ex.phi_plus, &ex.V, 0.0) <= 1e-4);
  CHECK(eigen_residual(ex.phi_minus, &ex.V, 0.0) <= 1e-4);
  CHECK(shares_modulus(ex.phi_plus, ex.phi_minus).deviation <= 1e-14);
  auto theta = verify_theta_structure(ex.phi_plus);
  CHECK(theta.deviation <= 1e-3 * std::abs(theta.C_est) + 1e-6);

  auto flat = construct_circle_example(TrigExpression::constant(1, 1), 1, circle(512));
  CHECK(flat.C == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : flat.V.data()) CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(inner_product(flat.phi_plus, plane(circle(512), 1))) - 1) < 1e-12);

  auto sampled = construct_circle_example(evaluate(rho, g), 1);
  CHECK(std::abs(sampled.C - ex.C) < 1e-12);
  CHECK(eigen_residual(sampled.phi_plus, &sampled.V, 0.0) <= 1e-4);

  auto bad = TrigExpression::cos_on(1, 0, 1);
  CHECK_THROWS_AS(construct_circle_example(bad, 1, circle(64)), Error);
}

TEST_CASE("constructed potential has a double zero eigenvalue") {
  auto g = circle(1024);
  auto rho = TrigExpression::cos_on(1, 0, 1) + TrigExpression::constant(1, 2);
  auto ex = construct_circle_example(rho, 1, g);
  auto ev = fd_eigenvalues(g, &ex.V, 6);
  std::size_t near_zero = 0;
  for (double l : ev)
    if (std::abs(l) <= 1e-3) ++near_zero;
  CHECK(near_zero >= 2);
}

TEST_CASE("theta structure") {
  auto g = circle(512);
  auto t = verify_theta_structure(plane(g, 3));
  CHECK(t.C_est == doctest::Approx(3 / (2 * kPi)).epsilon(1e-12));
  CHECK(t.deviation <= 1e-6);
  auto c = WaveFunction::sample(g, [](std::size_t, double x) { return cplx(std::cos(x), 0); });
  CHECK_THROWS_AS(verify_theta_structure(c), Error);
  // |theta_k'|^2 - |theta_l'|^2 = lambda_k - lambda_l for constant modulus.
  for (int k = 0; k <= 5; ++k)
    for (int l = 0; l <= 5; ++l) {
      double tk = verify_theta_structure(plane(g, k)).theta_prime[7];
      double tl = verify_theta_structure(plane(g, l)).theta_prime[7];
      CHECK(std::abs(tk * tk - tl * tl - (k * k - l * l)) <= 1e-3);
    }
}

TEST_CASE("interval eigenfunctions never share a modulus across levels") {
  for (auto bc : {BoundaryKind::Dirichlet, BoundaryKind::NeumannKirchhoff}) {
    auto dom = MetricDomain::interval(Length::pi_multiple(2), bc, bc);
    auto pairs = graph_spectrum_numeric(discretize_nodes(dom, 257), nullptr, 8);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t j = i + 1; j < pairs.size(); ++j)
        CHECK(shares_modulus(pairs[i].phi, pairs[j].phi, 1e-4).verdict == Verdict::Rejects);
  }
}
