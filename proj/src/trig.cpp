#include "isoctl/trig.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "isoctl/error.hpp"

namespace isoctl {

namespace {

bool negligible(const Scalar& s) { return s.is_exact() ? s.is_zero() : std::abs(s.value()) < 1e-14; }

Scalar half(const Scalar& s) { return s * Scalar(Rational(1, 2)); }

// cos(q*pi), sin(q*pi) when 2q is an integer.
std::optional<std::pair<int, int>> exact_trig_pi(const Rational& q) {
  Rational t = q * Rational(2);
  if (!t.is_integer()) return std::nullopt;
  std::int64_t n = ((t.num() % 4) + 4) % 4;
  static const int c[4] = {1, 0, -1, 0};
  static const int s[4] = {0, 1, 0, -1};
  return std::make_pair(c[n], s[n]);
}

}  // namespace

TrigExpression TrigExpression::constant(std::size_t edges, const Scalar& c) {
  TrigExpression p(edges);
  for (std::size_t e = 0; e < edges; ++e) p.add_term(e, Rational(0), c, 0);
  return p;
}

TrigExpression TrigExpression::cos_on(std::size_t edges, std::size_t edge, const Rational& w, const Scalar& c) {
  TrigExpression p(edges);
  p.add_term(edge, w, c, 0);
  return p;
}

TrigExpression TrigExpression::sin_on(std::size_t edges, std::size_t edge, const Rational& w, const Scalar& c) {
  TrigExpression p(edges);
  p.add_term(edge, w, 0, c);
  return p;
}

TrigExpression TrigExpression::cos_pattern(const std::vector<Scalar>& per_edge, const Rational& w) {
  TrigExpression p(per_edge.size());
  for (std::size_t e = 0; e < per_edge.size(); ++e) p.add_term(e, w, per_edge[e], 0);
  return p;
}

TrigExpression TrigExpression::sin_pattern(const std::vector<Scalar>& per_edge, const Rational& w) {
  TrigExpression p(per_edge.size());
  for (std::size_t e = 0; e < per_edge.size(); ++e) p.add_term(e, w, 0, per_edge[e]);
  return p;
}

void TrigExpression::add_term(std::size_t edge, const Rational& w, const Scalar& a, const Scalar& b) {
  if (edge >= terms_.size()) throw Error(ErrorCode::InvalidArgument, "edge index out of range");
  if (w < Rational(0)) {
    // cos is even, sin is odd.
    add_term(edge, -w, a, -b);
    return;
  }
  auto& list = terms_[edge];
  auto it = std::lower_bound(list.begin(), list.end(), w, [](const TrigTerm& t, const Rational& v) { return t.w < v; });
  if (it != list.end() && it->w == w) {
    it->a += a;
    it->b += b;
  } else {
    it = list.insert(it, TrigTerm{w, a, b});
  }
  if (it->w.is_zero()) it->b = 0;
  if (negligible(it->a) && negligible(it->b)) list.erase(it);
  else {
    if (negligible(it->a)) it->a = 0;
    if (negligible(it->b)) it->b = 0;
  }
}

bool TrigExpression::is_zero() const {
  for (const auto& l : terms_)
    if (!l.empty()) return false;
  return true;
}

bool TrigExpression::is_exact() const {
  for (const auto& l : terms_)
    for (const auto& t : l)
      if (!t.a.is_exact() || !t.b.is_exact()) return false;
  return true;
}

Rational TrigExpression::max_frequency() const {
  Rational m(0);
  for (const auto& l : terms_)
    if (!l.empty()) m = std::max(m, l.back().w);
  return m;
}

double TrigExpression::eval(std::size_t edge, double x) const {
  double s = 0.0;
  for (const auto& t : terms_[edge]) {
    double wx = t.w.to_double() * x;
    s += t.a.value() * std::cos(wx) + t.b.value() * std::sin(wx);
  }
  return s;
}

double TrigExpression::eval_derivative(std::size_t edge, double x) const {
  double s = 0.0;
  for (const auto& t : terms_[edge]) {
    double w = t.w.to_double();
    s += w * (-t.a.value() * std::sin(w * x) + t.b.value() * std::cos(w * x));
  }
  return s;
}

double TrigExpression::sup_norm_bound() const {
  double m = 0.0;
  for (const auto& l : terms_) {
    double s = 0.0;
    for (const auto& t : l) s += std::abs(t.a.value()) + std::abs(t.b.value());
    m = std::max(m, s);
  }
  return m;
}

TrigExpression TrigExpression::operator-() const { return Scalar(-1) * *this; }

TrigExpression operator+(const TrigExpression& p, const TrigExpression& q) {
  if (p.edge_count() != q.edge_count()) throw Error(ErrorCode::GridMismatch, "edge count mismatch in trig sum");
  TrigExpression r = p;
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    for (const auto& t : q.terms_[e]) r.add_term(e, t.w, t.a, t.b);
  return r;
}

TrigExpression operator-(const TrigExpression& p, const TrigExpression& q) { return p + (-q); }

TrigExpression operator*(const Scalar& c, const TrigExpression& p) {
  TrigExpression r(p.edge_count());
  for (std::size_t e = 0; e < p.edge_count(); ++e)
    for (const auto& t : p.terms_[e]) r.add_term(e, t.w, c * t.a, c * t.b);
  return r;
}

bool operator==(const TrigExpression& p, const TrigExpression& q) {
  if (p.edge_count() != q.edge_count()) return false;
  for (std::size_t e = 0; e < p.edge_count(); ++e) {
    const auto& a = p.terms_[e];
    const auto& b = q.terms_[e];
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].w != b[i].w || a[i].a != b[i].a || a[i].b != b[i].b) return false;
  }
  return true;
}

double TrigExpression::distance(const TrigExpression& q) const {
  TrigExpression d = *this - q;
  double m = 0.0;
  for (const auto& l : d.terms_)
    for (const auto& t : l) m = std::max({m, std::abs(t.a.value()), std::abs(t.b.value())});
  return m;
}

std::string TrigExpression::to_string() const {
  std::ostringstream os;
  for (std::size_t e = 0; e < terms_.size(); ++e) {
    if (e) os << "; ";
    os << "edge " << e << ": ";
    if (terms_[e].empty()) {
      os << "0";
      continue;
    }
    bool first = true;
    for (const auto& t : terms_[e]) {
      auto emit = [&](const Scalar& c, const char* fn) {
        if (c.is_zero()) return;
        if (!first) os << " + ";
        first = false;
        os << c.to_string();
        if (fn) os << "*" << fn << "(" << t.w.to_string() << " x)";
      };
      if (t.w.is_zero()) emit(t.a, nullptr);
      else {
        emit(t.a, "cos");
        emit(t.b, "sin");
      }
    }
  }
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Scalar parse_coef(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty() || s == "+") return 1;
  if (s == "-") return -1;
  if (s[0] == '+' || s[0] == '-') s = s[0] + trim(s.substr(1));  // "- 2" as written in sums
  if (auto r = Rational::parse(s)) return *r;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return Scalar::real(v);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "bad coefficient '" + s + "'");
}

// Splits "a + b + -c" on top-level '+' separators, keeping signs attached.
std::vector<std::string> split_terms(const std::string& body) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    bool sep = depth == 0 && (c == '+' || c == '-') && !trim(cur).empty();
    if (sep) {
      // "1e-3" style exponents are not separators.
      char prev = trim(cur).back();
      if ((prev == 'e' || prev == 'E') && i + 1 < body.size() && std::isdigit(static_cast<unsigned char>(body[i + 1])))
        sep = false;
      if (prev == '*' || prev == '/') sep = false;
    }
    if (sep) {
      out.push_back(cur);
      cur.clear();
      if (c == '-') cur = "-";
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(cur);
  return out;
}

}  // namespace

TrigExpression TrigExpression::parse(const std::string& text, std::size_t edges) {
  TrigExpression p(edges);
  std::vector<std::string> chunks;
  {
    std::string cur;
    for (char c : text) {
      if (c == ';' || c == '\n') {
        chunks.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    chunks.push_back(cur);
  }
  bool any_prefix = false;
  for (const auto& raw : chunks) {
    std::string chunk = trim(raw);
    if (chunk.empty()) continue;
    std::size_t edge = 0;
    if (chunk.rfind("edge", 0) == 0) {
      auto colon = chunk.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "missing ':' in '" + chunk + "'");
      try {
        edge = std::stoul(trim(chunk.substr(4, colon - 4)));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad edge index in '" + chunk + "'");
      }
      chunk = trim(chunk.substr(colon + 1));
      any_prefix = true;
    } else if (edges != 1 && !any_prefix) {
      // Unprefixed text on a multi-edge domain applies to every edge.
      for (std::size_t e = 0; e < edges; ++e) {
        auto one = parse(chunk, 1);
        for (const auto& t : one.terms(0)) p.add_term(e, t.w, t.a, t.b);
      }
      continue;
    }
    if (edge >= edges) throw Error(ErrorCode::ParseError, "edge index " + std::to_string(edge) + " out of range");
    for (const auto& term_raw : split_terms(chunk)) {
      std::string term = trim(term_raw);
      auto fpos = term.find("cos(");
      bool is_sin = false;
      if (fpos == std::string::npos) {
        fpos = term.find("sin(");
        is_sin = fpos != std::string::npos;
      }
      if (fpos == std::string::npos) {
        p.add_term(edge, Rational(0), parse_coef(term), 0);
        continue;
      }
      std::string coef = term.substr(0, fpos);
      coef = trim(coef);
      if (!coef.empty() && coef.back() == '*') coef.pop_back();
      auto close = term.find(')', fpos);
      if (close == std::string::npos) throw Error(ErrorCode::ParseError, "unbalanced '(' in '" + term + "'");
      std::string arg = trim(term.substr(fpos + 4, close - fpos - 4));
      if (arg.empty() || arg.back() != 'x') throw Error(ErrorCode::ParseError, "argument must end in x: '" + arg + "'");
      arg = trim(arg.substr(0, arg.size() - 1));
      if (!arg.empty() && arg.back() == '*') arg.pop_back();
      arg = trim(arg);
      Rational w(1);
      if (!arg.empty()) {
        auto r = Rational::parse(arg);
        if (!r) throw Error(ErrorCode::ParseError, "frequency must be rational: '" + arg + "'");
        w = *r;
      }
      Scalar c = parse_coef(coef);
      if (is_sin) p.add_term(edge, w, 0, c);
      else p.add_term(edge, w, c, 0);
    }
  }
  return p;
}

TrigExpression trig_mul(const TrigExpression& p, const TrigExpression& q) {
  if (p.edge_count() != q.edge_count()) throw Error(ErrorCode::GridMismatch, "edge count mismatch in trig product");
  TrigExpression r(p.edge_count());
  for (std::size_t e = 0; e < p.edge_count(); ++e) {
    for (const auto& s : p.terms(e)) {
      for (const auto& t : q.terms(e)) {
        Rational sum = s.w + t.w;
        Rational diff = s.w - t.w;
        r.add_term(e, sum, half(s.a * t.a - s.b * t.b), half(s.b * t.a + s.a * t.b));
        r.add_term(e, diff, half(s.a * t.a + s.b * t.b), half(s.b * t.a - s.a * t.b));
      }
    }
  }
  return r;
}

TrigExpression trig_derivative(const TrigExpression& p) {
  TrigExpression r(p.edge_count());
  for (std::size_t e = 0; e < p.edge_count(); ++e)
    for (const auto& t : p.terms(e)) {
      if (t.w.is_zero()) continue;
      Scalar w(t.w);
      r.add_term(e, t.w, w * t.b, -(w * t.a));
    }
  return r;
}

TrigExpression trig_grad_squared(const TrigExpression& p) {
  auto d = trig_derivative(p);
  return trig_mul(d, d);
}

namespace {

// Value or derivative at an edge end, exact when possible.
Scalar end_value(const TrigExpression& p, const Edge& edge, EndMarker end, bool derivative) {
  Scalar acc(0);
  for (const auto& t : p.terms(edge.id)) {
    Scalar c, s;
    if (end == EndMarker::Start) {
      c = 1;
      s = 0;
    } else if (edge.length.over_pi) {
      auto ex = exact_trig_pi(t.w * *edge.length.over_pi);
      if (ex) {
        c = ex->first;
        s = ex->second;
      } else {
        double arg = t.w.to_double() * edge.length.value;
        c = Scalar::real(std::cos(arg));
        s = Scalar::real(std::sin(arg));
      }
    } else {
      double arg = t.w.to_double() * edge.length.value;
      c = Scalar::real(std::cos(arg));
      s = Scalar::real(std::sin(arg));
    }
    if (derivative) acc += Scalar(t.w) * (t.b * c - t.a * s);
    else acc += t.a * c + t.b * s;
  }
  return acc;
}

bool scalar_equal(const Scalar& x, const Scalar& y, double scale) {
  if (x.is_exact() && y.is_exact()) return x == y;
  return std::abs(x.value() - y.value()) <= 1e-12 * (1.0 + scale);
}

}  // namespace

std::vector<VertexReport> vertex_report(const TrigExpression& p, const MetricDomain& d) {
  if (p.edge_count() != d.edges().size()) throw Error(ErrorCode::GridMismatch, "expression does not match domain");
  double scale = p.sup_norm_bound() * (1.0 + p.max_frequency().to_double());
  std::vector<VertexReport> out;
  for (const auto& v : d.vertices()) {
    VertexReport rep;
    rep.vertex = v.id;
    std::vector<Scalar> values;
    Scalar flux(0);
    for (const auto& inc : v.incident) {
      const Edge& e = d.edges()[inc.edge];
      values.push_back(end_value(p, e, inc.end, false));
      Scalar der = end_value(p, e, inc.end, true);
      flux += inc.end == EndMarker::Start ? der : -der;
    }
    bool cont = true;
    for (const auto& val : values) {
      rep.value_spread = std::max(rep.value_spread, std::abs(val.value() - values.front().value()));
      cont = cont && scalar_equal(val, values.front(), scale);
    }
    rep.kirchhoff_sum = flux.value();
    bool kirch = v.condition == BoundaryKind::Dirichlet || scalar_equal(flux, Scalar(0), scale);
    rep.ok = cont && kirch;
    out.push_back(rep);
  }
  return out;
}

bool stabilizes_domain(const TrigExpression& p, const MetricDomain& d) {
  for (const auto& r : vertex_report(p, d))
    if (!r.ok) return false;
  return true;
}

}  // namespace isoctl
