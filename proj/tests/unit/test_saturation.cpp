#include <cmath>
#include <numbers>

#include "doctest.h"
#include "isoctl/error.hpp"
#include "isoctl/saturation.hpp"

using namespace isoctl;
constexpr double kPi = std::numbers::pi;

namespace {

std::shared_ptr<const GeneratorSet> eight_gens() { return std::make_shared<const GeneratorSet>(eight_graph_generators()); }

TrigExpression target_expr(const EightTarget& t) {
  TrigExpression e = eight_graph_expression(t.kind, t.k, t.j);
  return t.sign > 0 ? e : -e;
}

std::vector<EightTarget> all_targets(int k_max) {
  std::vector<EightTarget> out;
  for (int s : {1, -1}) {
    out.push_back({EightKind::Ground, 0, 1, s});
    for (int k = 0; k <= k_max; ++k) out.push_back({EightKind::Odd, k, 1, s});
    for (int k = 1; k <= k_max; ++k)
      for (int j = 1; j <= 3; ++j) out.push_back({EightKind::Even, k, j, s});
  }
  return out;
}

}  // namespace

TEST_CASE("generator combos evaluate to their linear combination") {
  auto g = eight_gens();
  SaturationCertificate one(g, make_combo(*g, {{"Q1", Scalar(1)}}));
  CHECK(cert_evaluate(one) == TrigExpression::constant(2, 1));
  CHECK(one.depth() == 0);
  SaturationCertificate zero(g, make_combo(*g, std::vector<Scalar>(6, Scalar(0))));
  CHECK(cert_evaluate(zero).is_zero());
  CHECK_THROWS_AS(make_combo(*g, {{"Q9", Scalar(1)}}), Error);
}

TEST_CASE("a single cone step produces cos 2x") {
  // 2 - ((2 c_1)')^2 = 2 - 4 s_1^2 = 2 c_2 on both loops.
  auto g = eight_gens();
  auto psi = make_combo(*g, {{"Q2", Scalar(2)}});
  auto neg = make_combo(*g, {{"Q2", Scalar(-2)}});
  auto c = make_cone_sum(make_combo(*g, {{"Q1", Scalar(2)}}), {{Scalar(1), psi, neg}});
  SaturationCertificate cert(g, c);
  CHECK(cert.depth() == 1);
  CHECK(cert_evaluate(cert) == TrigExpression::cos_pattern({2, 2}, 2));
  CHECK(cert_validate(cert, *g->domain).ok);
}

TEST_CASE("validation rejects negative weights and non-stabilizing psi") {
  auto g = eight_gens();
  auto psi = make_combo(*g, {{"Q2", Scalar(1)}});
  auto neg = make_combo(*g, {{"Q2", Scalar(-1)}});
  SaturationCertificate bad_alpha(g, make_cone_sum(make_combo(*g, {{"Q1", Scalar(1)}}), {{Scalar(-1), psi, neg}}));
  auto v = cert_validate(bad_alpha, *g->domain);
  CHECK_FALSE(v.ok);
  CHECK(v.node == "root");

  // psi = (sin(x/4), 0) is not continuous at the vertex, so it is not in the cone.
  auto raw = std::make_shared<CertNode>();
  raw->coeffs.assign(6, Scalar(0));
  raw->value = TrigExpression::sin_on(2, 0, Rational(1, 4));
  Cert rawc = raw;
  auto rawn = std::make_shared<CertNode>(*raw);
  rawn->value = -raw->value;
  SaturationCertificate quarter(g, make_cone_sum(make_combo(*g, {{"Q1", Scalar(1)}}), {{Scalar(1), rawc, Cert(rawn)}}));
  auto w = cert_validate(quarter, *g->domain);
  CHECK_FALSE(w.ok);
  CHECK(w.node == "root.terms[0].plus");

  // Q6 is discontinuous at the vertex.
  SaturationCertificate q6(g, make_combo(*g, {{"Q6", Scalar(1)}}));
  CHECK_FALSE(cert_validate(q6, *g->domain).ok);
  CHECK(stabilizes_domain(eight_graph_expression(EightKind::Odd, 0), *g->domain));
}

TEST_CASE("eight-graph derivations replay exactly") {
  for (const auto& t : all_targets(kEightGraphKMax)) {
    auto c = derive_eight_graph(t);
    INFO("kind " << static_cast<int>(t.kind) << " k " << t.k << " j " << t.j << " sign " << t.sign);
    CHECK(c.value().is_exact());
    CHECK(cert_evaluate(c) == target_expr(t));
    CHECK(c.value() == target_expr(t));
    CHECK(cert_validate(c, *c.generators().domain).ok);
  }
}

TEST_CASE("derivation depths") {
  CHECK(derive_eight_graph({EightKind::Ground, 0, 1, 1}).depth() == 0);
  CHECK(derive_eight_graph({EightKind::Even, 2, 1, 1}).depth() <= 3);
  // phi_{1,o} comes from the m = 1 half-integer step.
  auto o1 = derive_eight_graph({EightKind::Odd, 1, 1, 1});
  CHECK(o1.depth() == 1);
  CHECK(o1.root()->kind == CertNode::Kind::ConeSum);
  for (int k = 1; k <= kEightGraphKMax; ++k)
    for (int j = 1; j <= 3; ++j)
      for (int s : {1, -1}) {
        CHECK(derive_eight_graph({EightKind::Even, k, j, s}).depth() == k - 1);
        CHECK(derive_eight_graph({EightKind::Odd, k, 1, s}).depth() == k);
      }
}

TEST_CASE("both signs are certified at the same depth") {
  for (const auto& t : all_targets(4)) {
    if (t.sign < 0) continue;
    auto neg = t;
    neg.sign = -1;
    auto p = derive_eight_graph(t), m = derive_eight_graph(neg);
    CHECK(p.depth() == m.depth());
    CHECK(p.value() == -m.value());
  }
}

TEST_CASE("out-of-range targets") {
  CHECK_THROWS_AS(derive_eight_graph({EightKind::Even, 7, 1, 1}), Error);
  CHECK_THROWS_AS(derive_eight_graph({EightKind::Even, 0, 1, 1}), Error);
  CHECK_THROWS_AS(derive_eight_graph({EightKind::Even, 2, 4, 1}), Error);
  CHECK_NOTHROW(derive_eight_graph({EightKind::Even, 8, 2, 1}, 8));
  try {
    derive_eight_graph({EightKind::Odd, 9, 1, 1});
    FAIL("expected TargetOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TargetOutOfRange);
  }
}

TEST_CASE("target parsing") {
  auto t = parse_eight_target("-phi_e:3:2");
  CHECK(t.kind == EightKind::Even);
  CHECK(t.k == 3);
  CHECK(t.j == 2);
  CHECK(t.sign == -1);
  CHECK(parse_eight_target("phi_o:0").kind == EightKind::Odd);
  CHECK(parse_eight_target("phi0").kind == EightKind::Ground);
  CHECK_THROWS_AS(parse_eight_target("phi_e:3"), Error);
  CHECK_THROWS_AS(parse_eight_target("phi_e:x:1"), Error);
}

TEST_CASE("cone enumeration respects depth") {
  auto c0 = eight_graph_cone(0, 3);
  CHECK(c0.size() == 14);  // +-phi0, +-phi_{0,o}, three level-one even modes, S_1 and D_1
  for (const auto& c : eight_graph_cone(2, 4)) CHECK(c.depth() <= 2);
  CHECK(eight_graph_cone(3, 4).size() > eight_graph_cone(2, 4).size());
}

TEST_CASE("circle harmonics") {
  auto g = std::make_shared<const GeneratorSet>(circle_generators(1));
  for (int k = 1; k <= 8; ++k)
    for (bool sn : {false, true})
      for (int s : {1, -1}) {
        auto c = derive_circle_harmonic(k, sn, s, g);
        auto want = sn ? TrigExpression::sin_on(1, 0, k, s) : TrigExpression::cos_on(1, 0, k, s);
        CHECK(cert_evaluate(c) == want);
        CHECK(c.depth() == k - 1);
      }
  CHECK(circle_harmonic_cone(3, g).size() == 2 + 4 * 3);
}

TEST_CASE("density residual") {
  auto dom = std::make_shared<const MetricDomain>(eight_graph());
  auto grid = discretize_nodes(*dom, 1025);
  auto cone = eight_graph_cone(4);
  auto phi = evaluate(eight_graph_expression(EightKind::Even, 3, 2), grid);
  auto far = evaluate(eight_graph_expression(EightKind::Even, 9, 2), grid);
  auto r = density_residual({phi, far, RealFunction(grid)}, cone, grid);
  CHECK(r[0] <= 1e-10);
  CHECK(r[1] >= 0.99);  // orthogonal to everything up to frequency 6
  CHECK(r[2] == 0.0);

  // Sawtooth x on the circle against harmonics up to 8: only the Fourier tail
  // -2 sum_{k>8} sin(kx)/k remains.
  auto g = std::make_shared<const GeneratorSet>(circle_generators(1));
  auto cgrid = discretize_nodes(*g->domain, 8192);
  auto saw = RealFunction::sample(cgrid, [](std::size_t, double x) { return x; });
  double tail = 0.0;
  for (int k = 9; k < 2000000; ++k) tail += 1.0 / (static_cast<double>(k) * k);
  const double oracle = std::sqrt(4 * kPi * tail / (8 * kPi * kPi * kPi / 3));
  auto rs = density_residual({saw}, circle_harmonic_cone(8, g), cgrid);
  CHECK(std::abs(rs[0] - oracle) <= 1e-3);
}

TEST_CASE("certificate JSON round trip") {
  auto c = derive_eight_graph({EightKind::Odd, 2, 1, -1});
  const std::string text = certificate_to_json(c);
  auto back = certificate_from_json(text);
  CHECK(back.depth() == c.depth());
  CHECK(cert_evaluate(back) == c.value());
  CHECK(certificate_to_json(back) == text);
  CHECK(cert_validate(back, *back.generators().domain).ok);
  CHECK_THROWS_AS(certificate_from_json("{"), Error);
  CHECK_THROWS_AS(certificate_from_json(R"({"domain":"eight","generators":[],"nodes":[{"id":0,"kind":"combo","coeffs":["1"]}],"root":0})"), Error);

  auto circ = derive_circle_harmonic(3, true, 1, std::make_shared<const GeneratorSet>(circle_generators(2)));
  CHECK(cert_evaluate(certificate_from_json(certificate_to_json(circ))) == circ.value());
}
