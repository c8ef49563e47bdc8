#include "isoctl/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "isoctl/error.hpp"
#include "json.hpp"

namespace isoctl {

using nlohmann::ordered_json;

std::size_t GeneratorSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw Error(ErrorCode::UnknownGenerator, "no generator named '" + name + "'");
}

GeneratorSet eight_graph_generators() {
  GeneratorSet g;
  g.domain = std::make_shared<const MetricDomain>(eight_graph());
  g.domain_spec = "eight";
  g.names = {"Q1", "Q2", "Q3", "Q4", "Q5", "Q6"};
  const Rational half(1, 2);
  g.q = {TrigExpression::constant(2, 1),
         TrigExpression::cos_pattern({1, 1}, 1),
         TrigExpression::sin_on(2, 0, 1),
         TrigExpression::sin_on(2, 1, 1),
         TrigExpression::sin_pattern({1, -1}, half),
         TrigExpression::cos_pattern({1, 1}, half)};
  return g;
}

GeneratorSet circle_generators(int max_freq) {
  GeneratorSet g;
  g.domain = std::make_shared<const MetricDomain>(MetricDomain::circle(Length::pi_multiple(2)));
  g.domain_spec = "circle:2pi";
  g.names.push_back("1");
  g.q.push_back(TrigExpression::constant(1, 1));
  for (int k = 1; k <= max_freq; ++k) {
    g.names.push_back("cos" + std::to_string(k));
    g.q.push_back(TrigExpression::cos_on(1, 0, k));
    g.names.push_back("sin" + std::to_string(k));
    g.q.push_back(TrigExpression::sin_on(1, 0, k));
  }
  return g;
}

Cert make_combo(const GeneratorSet& gens, std::vector<Scalar> coeffs) {
  if (coeffs.size() != gens.size()) throw Error(ErrorCode::InvalidCertificate, "coefficient count must match generators");
  auto n = std::make_shared<CertNode>();
  n->kind = CertNode::Kind::GeneratorCombo;
  n->value = TrigExpression(gens.domain->edges().size());
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (!coeffs[i].is_zero()) n->value += coeffs[i] * gens.q[i];
  n->coeffs = std::move(coeffs);
  return n;
}

Cert make_combo(const GeneratorSet& gens, const std::map<std::string, Scalar>& named) {
  std::vector<Scalar> c(gens.size(), Scalar(0));
  for (const auto& [name, v] : named) c[gens.index_of(name)] = v;
  return make_combo(gens, std::move(c));
}

Cert make_cone_sum(Cert base, std::vector<ConeTerm> terms) {
  if (!base) throw Error(ErrorCode::InvalidCertificate, "cone sum needs a base");
  auto n = std::make_shared<CertNode>();
  n->kind = CertNode::Kind::ConeSum;
  n->value = base->value;
  int d = base->depth;
  for (const auto& t : terms) {
    if (!t.plus || !t.minus) throw Error(ErrorCode::InvalidCertificate, "cone term needs both signs of psi");
    n->value = n->value - t.alpha * trig_grad_squared(t.plus->value);
    d = std::max({d, t.plus->depth, t.minus->depth});
  }
  n->depth = d + 1;
  n->base = std::move(base);
  n->terms = std::move(terms);
  return n;
}

namespace {

// Generator coefficients and subtracted terms of a node with nested bases unrolled.
void flatten(const Cert& c, const Scalar& scale, std::vector<Scalar>& coeffs, std::vector<ConeTerm>& terms) {
  if (c->kind == CertNode::Kind::GeneratorCombo) {
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (!c->coeffs[i].is_zero()) coeffs[i] += scale * c->coeffs[i];
    return;
  }
  flatten(c->base, scale, coeffs, terms);
  for (const auto& t : c->terms) terms.push_back({scale * t.alpha, t.plus, t.minus});
}

}  // namespace

Cert combine(const GeneratorSet& gens, const std::vector<std::pair<Scalar, Cert>>& parts) {
  std::vector<Scalar> coeffs(gens.size(), Scalar(0));
  std::vector<ConeTerm> terms;
  for (const auto& [c, node] : parts) {
    if (c.value() < 0) throw Error(ErrorCode::InvalidCertificate, "cone combinations need non-negative weights");
    if (c.is_zero()) continue;
    flatten(node, c, coeffs, terms);
  }
  auto base = make_combo(gens, std::move(coeffs));
  if (terms.empty()) return base;
  return make_cone_sum(base, std::move(terms));
}

TrigExpression cert_evaluate(const SaturationCertificate& c) {
  std::unordered_map<const CertNode*, TrigExpression> memo;
  const GeneratorSet& g = c.generators();
  std::function<TrigExpression(const CertNode&)> eval = [&](const CertNode& n) -> TrigExpression {
    if (auto it = memo.find(&n); it != memo.end()) return it->second;
    TrigExpression v(g.domain->edges().size());
    if (n.kind == CertNode::Kind::GeneratorCombo) {
      for (std::size_t i = 0; i < n.coeffs.size(); ++i)
        if (!n.coeffs[i].is_zero()) v += n.coeffs[i] * g.q[i];
    } else {
      v = eval(*n.base);
      for (const auto& t : n.terms) v = v - t.alpha * trig_grad_squared(eval(*t.plus));
    }
    memo.emplace(&n, v);
    return v;
  };
  return eval(*c.root());
}

CertValidation cert_validate(const SaturationCertificate& c, const MetricDomain& domain) {
  const GeneratorSet& g = c.generators();
  std::set<const CertNode*> done;
  CertValidation bad;
  bad.ok = false;
  auto same = [](const TrigExpression& a, const TrigExpression& b) {
    if (a.is_exact() && b.is_exact()) return a == b;
    return a.distance(b) <= 1e-12 * (1.0 + a.sup_norm_bound());
  };
  std::function<bool(const Cert&, const std::string&)> visit = [&](const Cert& n, const std::string& path) -> bool {
    if (!n) {
      bad.node = path;
      bad.reason = "missing node";
      return false;
    }
    if (done.count(n.get())) return true;
    auto fail = [&](const std::string& why) {
      bad.node = path;
      bad.reason = why;
      return false;
    };
    TrigExpression replay(g.domain->edges().size());
    if (n->kind == CertNode::Kind::GeneratorCombo) {
      if (n->coeffs.size() != g.size()) return fail("coefficient count does not match generators");
      if (n->depth != 0) return fail("generator combination must have depth 0");
      for (std::size_t i = 0; i < n->coeffs.size(); ++i)
        if (!n->coeffs[i].is_zero()) replay += n->coeffs[i] * g.q[i];
    } else {
      if (!visit(n->base, path + ".base")) return false;
      replay = n->base->value;
      int d = n->base->depth;
      for (std::size_t i = 0; i < n->terms.size(); ++i) {
        const auto& t = n->terms[i];
        const std::string tp = path + ".terms[" + std::to_string(i) + "]";
        if (t.alpha.value() < 0 || (t.alpha.is_exact() && t.alpha.exact() < Rational(0)))
          return fail("negative alpha in " + tp);
        if (!visit(t.plus, tp + ".plus") || !visit(t.minus, tp + ".minus")) return false;
        if (!same(t.minus->value, -t.plus->value)) return fail(tp + ".minus does not certify -psi");
        replay = replay - t.alpha * trig_grad_squared(t.plus->value);
        d = std::max({d, t.plus->depth, t.minus->depth});
      }
      if (n->depth != d + 1) return fail("depth must be one more than the deepest child");
    }
    if (!same(replay, n->value)) return fail("cached value does not match replay");
    if (!stabilizes_domain(n->value, domain)) return fail("expression does not stabilize the operator domain");
    done.insert(n.get());
    return true;
  };
  if (!visit(c.root(), "root")) return bad;
  return {};
}

// ---------------------------------------------------------------------------
// Addition-identity recursion. Keys: C (c,c), S (s,s), D (s,-s), E (s,0),
// F (0,s), O (s_{m+1/2}, -s_{m+1/2}); circle uses C and S on its single edge.
// With l = 1 and m >= 1, per edge:
//    c_{m+1} = 1 - 1/2 ((s_m/m - s_1)')^2 - 1/2 ((c_m/m + c_1)')^2
//   -c_{m+1} = 1 - 1/2 ((s_m/m + s_1)')^2 - 1/2 ((-c_m/m + c_1)')^2
//    s_{m+1} = 1 - 1/2 ((-c_m/m - s_1)')^2 - 1/2 ((-c_1 - s_m/m)')^2
//   -s_{m+1} = 1 - 1/2 ((-c_m/m + s_1)')^2 - 1/2 ((-c_1 + s_m/m)')^2
// and for the half-integer family, from s_{m+1/2} = 2 s_m c_{1/2} - s_{m-1/2}:
//   +-2 s_m c_{1/2} = s_m^2 + c_{1/2}^2 - (s_m -+ c_{1/2})^2,
//   s_m^2 + c_{1/2}^2 = 3/2 - 1/2 c_1 ... written as 3/2 Q1 + 1/2 Q2 - ((s_m/m)')^2.
// ---------------------------------------------------------------------------

namespace {

class Deriver {
 public:
  Deriver(std::shared_ptr<const GeneratorSet> g, bool eight, int k_max) : g_(std::move(g)), eight_(eight), k_max_(k_max) {}

  Cert get(char kind, int m, int sign) {
    const std::string key = std::string(1, kind) + std::to_string(m) + (sign > 0 ? "+" : "-");
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Cert c = build(kind, m, sign);
    memo_.emplace(key, c);
    return c;
  }

  const std::map<std::string, Cert>& memo() const { return memo_; }
  const std::shared_ptr<const GeneratorSet>& gens() const { return g_; }

 private:
  struct Part {
    Scalar c;
    char kind;
    int m;
    int sign;
  };

  Cert gen(const std::string& name, int sign) { return make_combo(*g_, {{name, Scalar(sign)}}); }

  Cert sum(const std::vector<Part>& parts) {
    std::vector<std::pair<Scalar, Cert>> xs;
    for (const auto& p : parts) xs.emplace_back(p.c, get(p.kind, p.m, p.sign));
    return combine(*g_, xs);
  }

  std::vector<Part> negate(std::vector<Part> parts) {
    for (auto& p : parts) p.sign = -p.sign;
    return parts;
  }

  // Term alpha (psi')^2 with psi a non-negative combination of certified pieces.
  std::optional<ConeTerm> term(const Scalar& alpha, const std::vector<Part>& psi) {
    Cert plus = sum(psi), minus = sum(negate(psi));
    if (plus->value.is_zero()) return std::nullopt;
    return ConeTerm{alpha, plus, minus};
  }

  Cert addition_step(int m, const std::vector<Part>& psi1, const std::vector<Part>& psi2) {
    std::vector<ConeTerm> terms;
    const Scalar half(Rational(1, 2));
    for (const auto* psi : {&psi1, &psi2})
      if (auto t = term(half, *psi)) terms.push_back(*t);
    (void)m;
    return make_cone_sum(gen(unit_name(), 1), std::move(terms));
  }

  std::string unit_name() const { return eight_ ? "Q1" : "1"; }

  Cert build(char kind, int m, int sign) {
    if (m > k_max_) throw Error(ErrorCode::TargetOutOfRange, "frequency " + std::to_string(m) + " exceeds k_max");
    if (kind == 'G') return gen(unit_name(), sign);
    if (kind == 'O') return odd(m, sign);
    if (m == 1) return level_one(kind, sign);
    if (kind == 'E') return sum({{Rational(1, 2), 'S', m, sign}, {Rational(1, 2), 'D', m, sign}});
    if (kind == 'F') return sum({{Rational(1, 2), 'S', m, sign}, {Rational(1, 2), 'D', m, -sign}});
    const int p = m - 1;
    const Scalar inv(Rational(1, p));
    const Scalar one(1);
    switch (kind) {
      case 'C':
        if (sign > 0) return addition_step(p, {{inv, 'S', p, 1}, {one, 'S', 1, -1}}, {{inv, 'C', p, 1}, {one, 'C', 1, 1}});
        return addition_step(p, {{inv, 'S', p, 1}, {one, 'S', 1, 1}}, {{inv, 'C', p, -1}, {one, 'C', 1, 1}});
      case 'S':
      case 'D': {
        const char s = kind;  // uniform or alternating sine piece
        return addition_step(p, {{inv, 'C', p, -1}, {one, s, 1, -sign}}, {{one, 'C', 1, -1}, {inv, s, p, -sign}});
      }
      default:
        throw Error(ErrorCode::TargetOutOfRange, std::string("unknown piece ") + kind);
    }
  }

  Cert level_one(char kind, int sign) {
    if (!eight_) {
      if (kind == 'C') return gen("cos1", sign);
      if (kind == 'S') return gen("sin1", sign);
      throw Error(ErrorCode::TargetOutOfRange, "the circle has no alternating pieces");
    }
    switch (kind) {
      case 'C': return gen("Q2", sign);
      case 'E': return gen("Q3", sign);
      case 'F': return gen("Q4", sign);
      case 'S': return make_combo(*g_, {{"Q3", Scalar(sign)}, {"Q4", Scalar(sign)}});
      case 'D': return make_combo(*g_, {{"Q3", Scalar(sign)}, {"Q4", Scalar(-sign)}});
      default: throw Error(ErrorCode::TargetOutOfRange, std::string("unknown piece ") + kind);
    }
  }

  Cert odd(int m, int sign) {
    if (!eight_) throw Error(ErrorCode::TargetOutOfRange, "half-integer modes exist on the eight graph only");
    if (m == 0) return gen("Q5", sign);
    const Scalar inv(Rational(1, m));
    auto base = make_combo(*g_, {{"Q1", Scalar(Rational(3, 2))}, {"Q2", Scalar(Rational(1, 2))}});
    std::vector<ConeTerm> terms;
    terms.push_back(*term(Scalar(1), {{inv, 'S', m, 1}}));
    terms.push_back(*term(Scalar(1), {{inv, 'C', m, -1}, {Scalar(2), 'O', 0, -sign}}));
    auto product = make_cone_sum(base, std::move(terms));
    return combine(*g_, {{Scalar(1), product}, {Scalar(1), get('O', m - 1, -sign)}});
  }

  std::shared_ptr<const GeneratorSet> g_;
  bool eight_;
  int k_max_;
  std::map<std::string, Cert> memo_;
};

}  // namespace

EightTarget parse_eight_target(const std::string& text_in) {
  std::string text = text_in;
  EightTarget t;
  if (!text.empty() && text[0] == '-') {
    t.sign = -1;
    text = text.substr(1);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i)
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      int v = std::stoi(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad eight-graph target '" + text_in + "'");
    }
  };
  if (parts[0] == "phi0" && parts.size() == 1) {
    t.kind = EightKind::Ground;
  } else if (parts[0] == "phi_o" && parts.size() == 2) {
    t.kind = EightKind::Odd;
    t.k = num(1);
  } else if (parts[0] == "phi_e" && parts.size() == 3) {
    t.kind = EightKind::Even;
    t.k = num(1);
    t.j = num(2);
  } else {
    throw Error(ErrorCode::ParseError, "eight-graph targets are phi0, phi_o:k or phi_e:k:j, got '" + text_in + "'");
  }
  return t;
}

SaturationCertificate derive_eight_graph(const EightTarget& t, int k_max) {
  const bool bad = (t.kind == EightKind::Odd && (t.k < 0 || t.k > k_max)) ||
                   (t.kind == EightKind::Even && (t.k < 1 || t.k > k_max || t.j < 1 || t.j > 3)) ||
                   (t.sign != 1 && t.sign != -1);
  if (bad) throw Error(ErrorCode::TargetOutOfRange, "eight-graph target outside the derivable range");
  auto gens = std::make_shared<const GeneratorSet>(eight_graph_generators());
  Deriver d(gens, true, k_max);
  Cert root;
  switch (t.kind) {
    case EightKind::Ground: root = d.get('G', 0, t.sign); break;
    case EightKind::Odd: root = d.get('O', t.k, t.sign); break;
    case EightKind::Even: root = d.get(t.j == 1 ? 'C' : t.j == 2 ? 'E' : 'F', t.k, t.sign); break;
  }
  return SaturationCertificate(gens, root);
}

std::vector<SaturationCertificate> eight_graph_cone(int max_depth, int k_max) {
  auto gens = std::make_shared<const GeneratorSet>(eight_graph_generators());
  Deriver d(gens, true, k_max);
  for (int s : {1, -1}) {
    d.get('G', 0, s);
    for (int k = 0; k <= k_max; ++k) d.get('O', k, s);
    for (int k = 1; k <= k_max; ++k)
      for (char c : {'C', 'E', 'F'}) d.get(c, k, s);
  }
  std::vector<SaturationCertificate> out;
  for (const auto& [key, c] : d.memo())
    if (c->depth <= max_depth) out.emplace_back(gens, c);
  return out;
}

SaturationCertificate derive_circle_harmonic(int k, bool is_sin, int sign, std::shared_ptr<const GeneratorSet> gens) {
  if (k < 1) throw Error(ErrorCode::TargetOutOfRange, "harmonics start at k = 1");
  Deriver d(gens, false, std::max(k, 1));
  return SaturationCertificate(gens, d.get(is_sin ? 'S' : 'C', k, sign));
}

std::vector<SaturationCertificate> circle_harmonic_cone(int max_freq, std::shared_ptr<const GeneratorSet> gens) {
  Deriver d(gens, false, max_freq);
  std::vector<SaturationCertificate> out;
  for (int s : {1, -1}) out.emplace_back(gens, d.get('G', 0, s));
  for (int k = 1; k <= max_freq; ++k)
    for (char c : {'C', 'S'})
      for (int s : {1, -1}) out.emplace_back(gens, d.get(c, k, s));
  return out;
}

std::vector<double> density_residual(const std::vector<RealFunction>& targets,
                                     const std::vector<SaturationCertificate>& cone, std::shared_ptr<const Grid> grid) {
  // Orthonormal basis of the span by modified Gram-Schmidt, applied twice.
  std::vector<RealFunction> basis;
  for (const auto& c : cone) {
    RealFunction v = evaluate(cert_evaluate(c), grid);
    const double n0 = l2_norm(v);
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double p = inner_product(b, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
      }
    const double n = l2_norm(v);
    if (n < 1e-10 * n0) continue;
    for (auto& x : v.data()) x /= n;
    basis.push_back(std::move(v));
  }
  std::vector<double> out;
  for (const auto& t : targets) {
    require_same_grid(t.grid(), *grid);
    const double nt = l2_norm(t);
    if (nt == 0.0) {
      out.push_back(0.0);
      continue;
    }
    RealFunction r = t;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double p = inner_product(b, r);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p * b[i];
      }
    out.push_back(l2_norm(r) / nt);
  }
  return out;
}

namespace {

ordered_json scalar_json(const Scalar& s) {
  if (s.is_exact()) return s.exact().to_string();
  return s.value();
}

Scalar scalar_from_json(const ordered_json& j) {
  if (j.is_string()) {
    auto r = Rational::parse(j.get<std::string>());
    if (!r) throw Error(ErrorCode::InvalidCertificate, "bad exact coefficient " + j.dump());
    return *r;
  }
  if (j.is_number()) return Scalar::real(j.get<double>());
  throw Error(ErrorCode::InvalidCertificate, "coefficient must be a string or number");
}

}  // namespace

std::string certificate_to_json(const SaturationCertificate& c) {
  const GeneratorSet& g = c.generators();
  ordered_json doc;
  doc["format"] = "isoctl-certificate/1";
  doc["domain"] = g.domain_spec;
  ordered_json gens = ordered_json::array();
  for (std::size_t i = 0; i < g.size(); ++i) gens.push_back({{"name", g.names[i]}, {"expr", g.q[i].to_string()}});
  doc["generators"] = gens;
  std::unordered_map<const CertNode*, std::size_t> ids;
  ordered_json nodes = ordered_json::array();
  std::function<std::size_t(const Cert&)> emit = [&](const Cert& n) -> std::size_t {
    if (auto it = ids.find(n.get()); it != ids.end()) return it->second;
    ordered_json j;
    if (n->kind == CertNode::Kind::GeneratorCombo) {
      j["kind"] = "combo";
      ordered_json cs = ordered_json::array();
      for (const auto& s : n->coeffs) cs.push_back(scalar_json(s));
      j["coeffs"] = cs;
    } else {
      j["kind"] = "cone_sum";
      j["base"] = emit(n->base);
      ordered_json ts = ordered_json::array();
      for (const auto& t : n->terms) {
        const std::size_t p = emit(t.plus), m = emit(t.minus);
        ts.push_back({{"alpha", scalar_json(t.alpha)}, {"plus", p}, {"minus", m}});
      }
      j["terms"] = ts;
    }
    j["depth"] = n->depth;
    j["value"] = n->value.to_string();
    const std::size_t id = nodes.size();
    ordered_json withid;
    withid["id"] = id;
    for (auto& [k, v] : j.items()) withid[k] = v;
    nodes.push_back(withid);
    ids.emplace(n.get(), id);
    return id;
  };
  const std::size_t root = emit(c.root());
  doc["nodes"] = nodes;
  doc["root"] = root;
  return doc.dump(2) + "\n";
}

SaturationCertificate certificate_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("certificate JSON: ") + e.what());
  }
  try {
    auto gens = std::make_shared<GeneratorSet>();
    gens->domain_spec = doc.at("domain").get<std::string>();
    gens->domain = std::make_shared<const MetricDomain>(parse_domain(gens->domain_spec));
    const std::size_t edges = gens->domain->edges().size();
    for (const auto& g : doc.at("generators")) {
      gens->names.push_back(g.at("name").get<std::string>());
      gens->q.push_back(TrigExpression::parse(g.at("expr").get<std::string>(), edges));
    }
    std::vector<Cert> built;
    for (const auto& n : doc.at("nodes")) {
      if (n.at("id").get<std::size_t>() != built.size()) throw Error(ErrorCode::InvalidCertificate, "node ids must be sequential");
      auto ref = [&](const ordered_json& j) {
        const auto i = j.get<std::size_t>();
        if (i >= built.size()) throw Error(ErrorCode::InvalidCertificate, "node refers forward");
        return built[i];
      };
      Cert c;
      const auto kind = n.at("kind").get<std::string>();
      if (kind == "combo") {
        std::vector<Scalar> coeffs;
        for (const auto& s : n.at("coeffs")) coeffs.push_back(scalar_from_json(s));
        c = make_combo(*gens, std::move(coeffs));
      } else if (kind == "cone_sum") {
        std::vector<ConeTerm> terms;
        for (const auto& t : n.at("terms")) terms.push_back({scalar_from_json(t.at("alpha")), ref(t.at("plus")), ref(t.at("minus"))});
        c = make_cone_sum(ref(n.at("base")), std::move(terms));
      } else {
        throw Error(ErrorCode::InvalidCertificate, "unknown node kind '" + kind + "'");
      }
      if (n.contains("depth") && n.at("depth").get<int>() != c->depth)
        throw Error(ErrorCode::InvalidCertificate, "stored depth disagrees with the tree");
      built.push_back(c);
    }
    const auto root = doc.at("root").get<std::size_t>();
    if (root >= built.size()) throw Error(ErrorCode::InvalidCertificate, "root out of range");
    return SaturationCertificate(gens, built[root]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("certificate JSON: ") + e.what());
  }
}

}  // namespace isoctl
