#include <cmath>
#include <numbers>

#include "doctest.h"
#include "isoctl/error.hpp"
#include "isoctl/propagator.hpp"
#include "isoctl/spectral.hpp"

using namespace isoctl;
constexpr double kPi = std::numbers::pi;

namespace {

std::shared_ptr<const Grid> circle_grid(std::size_t n) {
  return discretize_nodes(MetricDomain::circle(Length::pi_multiple(2)), n);
}

std::shared_ptr<const Grid> eight_grid(std::size_t n) { return discretize_nodes(eight_graph(), n); }

WaveFunction plane(std::shared_ptr<const Grid> g, int k) {
  return WaveFunction::sample(g, [&](std::size_t, double x) { return std::polar(1.0 / std::sqrt(2 * kPi), k * x); });
}

RealFunction sample(std::shared_ptr<const Grid> g, double (*f)(double)) {
  return RealFunction::sample(g, [&](std::size_t, double x) { return f(x); });
}

WaveFunction times_phase(const WaveFunction& psi, const std::function<double(std::size_t, double)>& theta) {
  return apply_phase(psi, RealFunction::sample(psi.grid_ptr(), theta));
}

}  // namespace

TEST_CASE("propagator bases are orthonormal") {
  auto fc = fourier_context(circle_grid(128));
  CHECK(fc.complete());
  CHECK(orthonormality_defect(fc) <= 1e-12);
  CHECK(fc.lambda[1] == doctest::Approx(1.0));
  CHECK(fc.lambda.back() == doctest::Approx(64.0 * 64.0));

  auto g = eight_grid(129);
  auto nc = numeric_context(g, nullptr, 0);
  CHECK(nc.complete());
  CHECK(orthonormality_defect(nc) <= 1e-8);
  auto ac = analytic_context(g, 100.0);
  CHECK_FALSE(ac.complete());
  CHECK(orthonormality_defect(ac) <= 1e-8);
  CHECK(ac.lambda[1] == doctest::Approx(0.25));
}

TEST_CASE("free flow of eigenfunctions and identity at t = 0") {
  auto g = eight_grid(129);
  auto ctx = numeric_context(g, nullptr, 40);
  const std::size_t n = ctx.n_modes();
  for (std::size_t k : {0u, 3u, 17u}) {
    WaveFunction phi(g);
    for (std::size_t i = 0; i < g->size(); ++i) phi[i] = ctx.basis[i * n + k];
    for (double t : {0.3, 2.0}) {
      auto out = evolve_free(ctx, phi, t);
      WaveFunction want = phi;
      for (auto& z : want.data()) z *= std::polar(1.0, -ctx.lambda[k] * t);
      CHECK(l2_distance(out, want) <= 1e-6);
    }
    CHECK(l2_distance(evolve_free(ctx, phi, 0.0), phi) <= 1e-10);
  }
}

TEST_CASE("plane wave on the circle picks up the analytic phase") {
  // lambda = 1, so after t = 2 pi the state is e^{-2 pi i} psi.
  auto g = circle_grid(256);
  auto ctx = fourier_context(g);
  auto psi = plane(g, 1);
  auto out = evolve_free(ctx, psi, 2 * kPi);
  WaveFunction want = psi;
  for (auto& z : want.data()) z *= std::polar(1.0, -2 * kPi);
  CHECK(l2_distance(out, want) <= 1e-8);
  auto out3 = evolve_free(ctx, plane(g, 3), 0.7);
  WaveFunction want3 = plane(g, 3);
  for (auto& z : want3.data()) z *= std::polar(1.0, -9 * 0.7);
  CHECK(l2_distance(out3, want3) <= 1e-10);
}

TEST_CASE("truncation loss is reported") {
  auto g = eight_grid(257);
  auto ctx = analytic_context(g, 16.0);
  auto ground = WaveFunction(g, cplx(1.0 / std::sqrt(4 * kPi)));
  CHECK_NOTHROW(evolve_free(ctx, ground, 1.0));
  auto rough = times_phase(ground, [](std::size_t, double x) { return 20 * std::cos(x); });
  try {
    evolve_free(ctx, rough, 1.0);
    FAIL("expected TruncationLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncationLoss);
  }
}

TEST_CASE("pulse with zero control is free flow") {
  auto g = circle_grid(128);
  auto ctx = fourier_context(g);
  std::vector<RealFunction> Q{RealFunction(g, 1.0), sample(g, [](double x) { return std::cos(x); })};
  auto psi = plane(g, 2);
  auto a = evolve_pulse(ctx, psi, {0.0, 0.0}, Q, 0.05);
  auto b = evolve_free(ctx, psi, 0.05);
  CHECK(l2_distance(a, b) <= 1e-9);
}

TEST_CASE("pulse limit as delta shrinks") {
  auto g = circle_grid(256);
  auto ctx = fourier_context(g);
  std::vector<RealFunction> Q{RealFunction(g, 1.0), sample(g, [](double x) { return std::cos(x); }),
                              sample(g, [](double x) { return std::sin(x); })};
  const std::vector<double> u{0.3, -1.0, 0.5};
  auto psi = plane(g, 1);
  auto target = times_phase(psi, [&](std::size_t, double x) { return -(0.3 - std::cos(x) + 0.5 * std::sin(x)); });
  PropagationLog log;
  double prev = 1e9;
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    auto out = evolve_pulse(ctx, psi, u, Q, delta, {}, &log);
    const double err = l2_distance(out, target);
    CHECK(err < prev);
    CHECK(std::abs(l2_norm(out) - 1.0) <= 1e-8);
    prev = err;
  }
  CHECK(prev <= 1e-2);
  CHECK(log.norm_drift <= 1e-8 * std::max(1.0, log.time));
}

TEST_CASE("Strang splitting is second order") {
  auto g = circle_grid(64);
  auto ctx = fourier_context(g);
  std::vector<RealFunction> Q{sample(g, [](double x) { return std::cos(x); }),
                              sample(g, [](double x) { return std::sin(2 * x); })};
  const std::vector<double> u{0.4, 0.3};
  const double delta = 0.5;
  auto psi = plane(g, 1);
  auto oracle = exact_pulse(ctx, psi, u, Q, delta);
  CHECK(std::abs(l2_norm(oracle) - 1.0) <= 1e-10);
  PulseOptions o;
  o.max_estimate = 1e9;
  std::vector<double> errs;
  for (std::size_t n : {8u, 16u, 32u}) {
    o.substeps = n;
    errs.push_back(l2_distance(evolve_pulse(ctx, psi, u, Q, delta, o), oracle));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    INFO("errors " << errs[i] << " " << errs[i + 1]);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("step monitor") {
  auto g = circle_grid(64);
  auto ctx = fourier_context(g);
  std::vector<RealFunction> Q{sample(g, [](double x) { return std::cos(3 * x); })};
  PulseOptions o;
  o.substeps = 1;
  CHECK_THROWS_AS(evolve_pulse(ctx, plane(g, 0), {50.0}, Q, 1e-2, o), Error);
  PulseOptions a;
  a.policy = StepPolicy::Adaptive;
  const auto strict = pulse_substeps(ctx, {1.0}, Q, 1e-3);
  const auto adaptive = pulse_substeps(ctx, {1.0}, Q, 1e-3, a);
  CHECK(adaptive <= strict);
  CHECK(strict >= 16);
  CHECK_THROWS_AS(evolve_pulse(ctx, plane(g, 0), {1.0}, Q, 0.0), Error);
}

TEST_CASE("conjugated step limit on the circle") {
  auto g = circle_grid(512);
  auto ctx = fourier_context(g);
  auto psi = WaveFunction(g, cplx(1.0 / std::sqrt(2 * kPi)));
  auto phi = sample(g, [](double x) { return std::sin(x); });
  auto target = times_phase(psi, [](std::size_t, double x) { return -std::cos(x) * std::cos(x); });
  CHECK(l2_distance(conjugated_step(ctx, psi, phi, 0.0, 0.01), evolve_free(ctx, psi, 0.01)) == 0.0);
  double prev = 1e9, prev_sym = 1e9;
  for (double gamma : {1e-1, 1e-2, 1e-3}) {
    const double err = l2_distance(conjugated_step(ctx, psi, phi, 1.0, gamma), target);
    const double sym = l2_distance(conjugated_step(ctx, psi, phi, 1.0, gamma, true), target);
    CHECK(err < prev);
    CHECK(sym < prev_sym);
    CHECK(sym <= err);
    prev = err;
    prev_sym = sym;
  }
  CHECK(prev <= 0.1);
}

TEST_CASE("conjugation on the eight graph keeps vertex conditions") {
  auto g = eight_grid(513);
  auto ctx = analytic_context(g, 90.0 * 90.0);
  CHECK(orthonormality_defect(ctx) <= 1e-8);
  auto psi = WaveFunction(g, cplx(1.0 / std::sqrt(4 * kPi)));
  auto q2 = RealFunction::sample(g, [](std::size_t, double x) { return std::cos(x); });
  auto target = times_phase(psi, [](std::size_t, double x) { return -std::sin(x) * std::sin(x); });
  double prev = 1e9;
  for (double gamma : {1e-1, 1e-2, 1e-3}) {
    const double s = 1.0 / std::sqrt(gamma);
    auto mid = apply_phase(psi, RealFunction::sample(g, [&](std::size_t, double x) { return s * std::cos(x); }));
    CHECK(vertex_discontinuity(mid) <= 1e-12);
    auto flown = evolve_free(ctx, mid, gamma);
    CHECK(vertex_discontinuity(flown) <= 1e-6);
    const double err = l2_distance(conjugated_step(ctx, psi, q2, 1.0, gamma), target);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("conjugated pulse tends to the bracket limit") {
  auto g = circle_grid(512);
  auto ctx = fourier_context(g);
  auto psi = plane(g, 1);
  auto S = sample(g, [](double x) { return std::sin(x); });
  std::vector<RealFunction> Q{RealFunction(g, 1.0), sample(g, [](double x) { return std::cos(x); })};
  const std::vector<double> u{0.5, 0.25};
  auto target = times_phase(psi, [](std::size_t, double x) {
    return -(std::cos(x) * std::cos(x) + 0.5 + 0.25 * std::cos(x));
  });
  double prev = 1e9;
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const double err = l2_distance(conjugated_pulse(ctx, psi, S, u, Q, delta), target);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("serial and OpenMP kinetic steps agree") {
  auto g = circle_grid(128);
  auto a = fourier_context(g);
  auto b = a;
  b.backend = kernels::Backend::Serial;
  auto psi = times_phase(plane(g, 1), [](std::size_t, double x) { return std::sin(2 * x); });
  CHECK(l2_distance(evolve_free(a, psi, 0.37), evolve_free(b, psi, 0.37)) <= 1e-13);
}
