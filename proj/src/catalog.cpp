#include "isoctl/catalog.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "isoctl/error.hpp"
#include "isoctl/specfun.hpp"

namespace isoctl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string join_params(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ":" : "") << v[i];
  return os.str();
}

// Integral over [0, L] of one edge of a trig expression.
double integrate_edge(const TrigExpression& p, std::size_t e, double L) {
  double s = 0.0;
  for (const auto& t : p.terms(e)) {
    const double w = t.w.to_double();
    if (w == 0.0) {
      s += t.a.value() * L;
      continue;
    }
    s += t.a.value() * std::sin(w * L) / w + t.b.value() * (1.0 - std::cos(w * L)) / w;
  }
  return s;
}

CatalogEntry graph_entry(Family family, std::vector<int> params, std::string tag, double lambda, TrigExpression expr) {
  CatalogEntry e;
  e.family = family;
  e.params = std::move(params);
  e.tag = std::move(tag);
  e.lambda = lambda;
  e.dim = 2;
  double sq = 0.0;
  auto p2 = trig_mul(expr, expr);
  for (std::size_t k = 0; k < expr.edge_count(); ++k) sq += integrate_edge(p2, k, kTwoPi);
  e.norm_constant = 1.0 / std::sqrt(sq);
  e.expr = expr;
  const double c = e.norm_constant;
  e.eval = [expr = std::move(expr), c](std::span<const double> x) {
    return cplx(c * expr.eval(static_cast<std::size_t>(x[0]), x[1]), 0.0);
  };
  return e;
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Sixth-order stencils; h chosen so truncation and rounding both stay near 1e-9.
constexpr double kH = 5e-3;
constexpr double kD2[] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
constexpr double kD1[] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};

cplx partial(const Evaluator& f, std::vector<double> x, std::size_t axis, const double* stencil, int order) {
  const double x0 = x[axis];
  cplx s = 0.0;
  for (int k = -3; k <= 3; ++k) {
    if (stencil[k + 3] == 0.0) continue;
    x[axis] = x0 + k * kH;
    s += stencil[k + 3] * f(x);
  }
  return s / (order == 2 ? kH * kH : kH);
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Torus: return "torus";
    case Family::Sphere: return "sphere";
    case Family::Disk: return "disk";
    case Family::Hermite: return "hermite";
    case Family::EightGraph: return "eight";
    case Family::ThreeBranch: return "three-branch";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  for (auto f : {Family::Torus, Family::Sphere, Family::Disk, Family::Hermite, Family::EightGraph, Family::ThreeBranch})
    if (family_name(f) == name) return f;
  if (name == "circle") return Family::Torus;
  throw Error(ErrorCode::UnknownDomain, "unknown family '" + name + "'");
}

cplx CatalogEntry::operator()(std::initializer_list<double> x) const {
  return eval(std::span<const double>(x.begin(), x.size()));
}

WaveFunction CatalogEntry::sample(std::shared_ptr<const Grid> grid) const {
  if (family == Family::Torus && dim == 1) {
    if (!grid->periodic()) throw Error(ErrorCode::GridMismatch, "torus entries sample on a circle grid");
    return WaveFunction::sample(grid, [&](std::size_t, double x) { return (*this)({x}); });
  }
  if (family == Family::EightGraph || family == Family::ThreeBranch) {
    if (grid->edge_count() != expr->edge_count())
      throw Error(ErrorCode::GridMismatch, "grid edge count does not match " + tag);
    return WaveFunction::sample(grid, [&](std::size_t e, double x) { return (*this)({static_cast<double>(e), x}); });
  }
  throw Error(ErrorCode::InvalidArgument, tag + " has no one-dimensional grid representation");
}

CatalogEntry torus_mode(const std::vector<int>& n, const std::vector<int>& s_in) {
  if (n.empty()) throw Error(ErrorCode::InvalidArgument, "torus mode needs d >= 1");
  std::vector<int> s = s_in.empty() ? std::vector<int>(n.size(), 1) : s_in;
  if (s.size() != n.size()) throw Error(ErrorCode::InvalidArgument, "torus signs must match n");
  CatalogEntry e;
  e.family = Family::Torus;
  e.dim = n.size();
  std::vector<int> k(n.size());
  double lambda = 0.0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    if (n[j] < 0) throw Error(ErrorCode::InvalidArgument, "torus n must be non-negative");
    if (s[j] != 1 && s[j] != -1) throw Error(ErrorCode::InvalidArgument, "torus signs are +-1");
    k[j] = s[j] * n[j];
    lambda += static_cast<double>(n[j]) * n[j];
  }
  e.params = k;
  e.tag = "torus:" + join_params(k);
  e.lambda = lambda;
  const double c = std::pow(kTwoPi, -0.5 * static_cast<double>(n.size()));
  e.norm_constant = c;
  e.eval = [k, c](std::span<const double> x) {
    double ph = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) ph += k[j] * x[j];
    return std::polar(c, ph);
  };
  return e;
}

CatalogEntry disk_mode(int n, int k, int sign) {
  if (n < 0 || k < 1) throw Error(ErrorCode::InvalidArgument, "disk mode needs n >= 0, k >= 1");
  const double j = bessel_zero(n, k);
  const double c = 1.0 / (std::sqrt(kPi) * std::abs(bessel_j_prime(n, j)));
  const int m = n == 0 ? 0 : (sign < 0 ? -n : n);
  CatalogEntry e;
  e.family = Family::Disk;
  e.dim = 2;
  e.params = {n, k, m < 0 ? -1 : 1};
  e.tag = "disk:" + std::to_string(n) + ":" + std::to_string(k) + (m < 0 ? ":-" : ":+");
  e.lambda = j * j;
  e.norm_constant = c;
  e.eval = [n, m, j, c](std::span<const double> x) { return std::polar(c * bessel_j(n, j * x[0]), m * x[1]); };
  return e;
}

std::pair<CatalogEntry, CatalogEntry> disk_real_modes(int n, int k) {
  if (n < 1 || k < 1) throw Error(ErrorCode::InvalidArgument, "real disk pair needs n, k >= 1");
  const double j = bessel_zero(n, k);
  const double c = std::sqrt(2.0 / kPi) / std::abs(bessel_j_prime(n, j));
  auto make = [&](bool is_sin) {
    CatalogEntry e;
    e.family = Family::Disk;
    e.dim = 2;
    e.params = {n, k, is_sin ? 2 : 1};
    e.tag = "disk:" + std::to_string(n) + ":" + std::to_string(k) + (is_sin ? ":v" : ":u");
    e.lambda = j * j;
    e.norm_constant = c;
    e.eval = [n, j, c, is_sin](std::span<const double> x) {
      const double a = n * x[1];
      return cplx(c * bessel_j(n, j * x[0]) * (is_sin ? std::sin(a) : std::cos(a)), 0.0);
    };
    return e;
  };
  return {make(false), make(true)};
}

CatalogEntry sphere_mode(int l, int m) {
  if (l < 0 || l > 8 || std::abs(m) > l) throw Error(ErrorCode::InvalidArgument, "sphere mode needs |m| <= l <= 8");
  CatalogEntry e;
  e.family = Family::Sphere;
  e.dim = 2;
  e.params = {l, m};
  e.tag = "sphere:" + std::to_string(l) + ":" + std::to_string(m);
  e.lambda = static_cast<double>(l) * (l + 1);
  e.eval = [l, m](std::span<const double> x) { return spherical_harmonic(l, m, x[0], x[1]); };
  return e;
}

CatalogEntry hermite_mode(const std::vector<int>& alpha) {
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw Error(ErrorCode::InvalidArgument, "hermite indices are non-negative");
    total += a;
  }
  if (alpha.empty() || total > 30) throw Error(ErrorCode::InvalidArgument, "hermite mode needs d >= 1, |alpha| <= 30");
  CatalogEntry e;
  e.family = Family::Hermite;
  e.dim = alpha.size();
  e.params = alpha;
  e.tag = "hermite:" + join_params(alpha);
  e.lambda = 2.0 * total + static_cast<double>(alpha.size());
  e.eval = [alpha](std::span<const double> x) {
    double v = 1.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) v *= hermite_fn(alpha[j], x[j]);
    return cplx(v, 0.0);
  };
  return e;
}

TrigExpression eight_graph_expression(EightKind kind, int k, int j) {
  switch (kind) {
    case EightKind::Ground:
      return TrigExpression::constant(2, 1);
    case EightKind::Odd:
      if (k < 0) throw Error(ErrorCode::InvalidArgument, "odd eight-graph modes need k >= 0");
      return TrigExpression::sin_pattern({1, -1}, Rational(2 * k + 1, 2));
    case EightKind::Even:
      if (k < 1 || j < 1 || j > 3) throw Error(ErrorCode::InvalidArgument, "even eight-graph modes need k >= 1, j in 1..3");
      if (j == 1) return TrigExpression::cos_pattern({1, 1}, k);
      return TrigExpression::sin_pattern(j == 2 ? std::vector<Scalar>{1, 0} : std::vector<Scalar>{0, 1}, k);
  }
  return {};
}

CatalogEntry eight_graph_mode(EightKind kind, int k, int j) {
  auto expr = eight_graph_expression(kind, k, j);
  switch (kind) {
    case EightKind::Ground:
      return graph_entry(Family::EightGraph, {0, 0, 0}, "eight:ground", 0.0, expr);
    case EightKind::Odd: {
      const double w = k + 0.5;
      return graph_entry(Family::EightGraph, {1, k, 0}, "eight:o:" + std::to_string(k), w * w, expr);
    }
    case EightKind::Even:
      return graph_entry(Family::EightGraph, {2, k, j}, "eight:e:" + std::to_string(k) + ":" + std::to_string(j),
                         static_cast<double>(k) * k, expr);
  }
  return {};
}

TrigExpression three_branch_expression(int k, int j) {
  if (k == 0) return TrigExpression::constant(3, 1);
  if (k < 0 || j < 1 || j > 3) throw Error(ErrorCode::InvalidArgument, "three-branch modes need k >= 1, j in 1..3");
  const Rational w(k, 2);
  if (j == 1) return TrigExpression::cos_pattern({1, 1, 1}, w);
  if (j == 2) return TrigExpression::sin_pattern({-1, 1, 0}, w);
  return TrigExpression::sin_pattern({-1, 0, 1}, w);
}

CatalogEntry three_branch_mode(int k, int j) {
  auto expr = three_branch_expression(k, j);
  if (k == 0) return graph_entry(Family::ThreeBranch, {0, 0}, "three:ground", 0.0, expr);
  return graph_entry(Family::ThreeBranch, {k, j}, "three:" + std::to_string(k) + ":" + std::to_string(j),
                     k * k / 4.0, expr);
}

std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "parameter '" + item + "' is not key=value");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

namespace {

int int_param(const std::map<std::string, std::string>& p, const std::string& key, int fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "parameter " + key + " must be an integer");
  }
}

std::vector<int> list_param(const std::map<std::string, std::string>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return {};
  std::vector<int> v;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      v.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, "parameter " + key + " must be a ':'-separated integer list");
    }
  }
  return v;
}

}  // namespace

CatalogEntry make_entry(Family family, const std::map<std::string, std::string>& p) {
  switch (family) {
    case Family::Torus: {
      auto n = list_param(p, "n");
      if (n.empty()) n = {int_param(p, "n", 1)};
      return torus_mode(n, list_param(p, "s"));
    }
    case Family::Sphere:
      return sphere_mode(int_param(p, "l", 1), int_param(p, "m", 0));
    case Family::Disk:
      return disk_mode(int_param(p, "n", 1), int_param(p, "k", 1), int_param(p, "sign", 1));
    case Family::Hermite: {
      auto a = list_param(p, "alpha");
      if (a.empty()) a = {int_param(p, "k", 0)};
      return hermite_mode(a);
    }
    case Family::EightGraph: {
      auto it = p.find("kind");
      const std::string kind = it == p.end() ? "even" : it->second;
      if (kind == "ground") return eight_graph_mode(EightKind::Ground, 0);
      if (kind == "odd") return eight_graph_mode(EightKind::Odd, int_param(p, "k", 0));
      if (kind == "even") return eight_graph_mode(EightKind::Even, int_param(p, "k", 1), int_param(p, "j", 1));
      throw Error(ErrorCode::ParseError, "eight-graph kind must be ground, odd or even");
    }
    case Family::ThreeBranch:
      return three_branch_mode(int_param(p, "k", 0), int_param(p, "j", 1));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family");
}

std::vector<CatalogEntry> family_basis(Family family, int level_max, int dim) {
  std::vector<CatalogEntry> out;
  switch (family) {
    case Family::Torus: {
      if (dim != 1) throw Error(ErrorCode::InvalidArgument, "family_basis enumerates the d = 1 torus only");
      out.push_back(torus_mode({0}));
      for (int n = 1; n <= level_max; ++n) {
        out.push_back(torus_mode({n}, {1}));
        out.push_back(torus_mode({n}, {-1}));
      }
      break;
    }
    case Family::Sphere:
      for (int l = 0; l <= std::min(level_max, 8); ++l)
        for (int m = -l; m <= l; ++m) out.push_back(sphere_mode(l, m));
      break;
    case Family::Disk:
      for (int n = 0; n <= level_max; ++n)
        for (int k = 1; k <= level_max; ++k) {
          out.push_back(disk_mode(n, k, 1));
          if (n > 0) out.push_back(disk_mode(n, k, -1));
        }
      break;
    case Family::Hermite:
      if (dim == 1) {
        for (int k = 0; k <= level_max; ++k) out.push_back(hermite_mode({k}));
      } else if (dim == 2) {
        for (int a = 0; a <= level_max; ++a)
          for (int b = 0; a + b <= level_max; ++b) out.push_back(hermite_mode({a, b}));
      } else {
        throw Error(ErrorCode::InvalidArgument, "family_basis enumerates hermite d <= 2");
      }
      break;
    case Family::EightGraph:
      out.push_back(eight_graph_mode(EightKind::Ground, 0));
      for (int k = 0; k < level_max; ++k) out.push_back(eight_graph_mode(EightKind::Odd, k));
      for (int k = 1; k <= level_max; ++k)
        for (int j = 1; j <= 3; ++j) out.push_back(eight_graph_mode(EightKind::Even, k, j));
      break;
    case Family::ThreeBranch:
      out.push_back(three_branch_mode(0));
      for (int k = 1; k <= level_max; ++k)
        for (int j = 1; j <= 3; ++j) out.push_back(three_branch_mode(k, j));
      break;
  }
  return out;
}

double entry_norm(const CatalogEntry& e) {
  switch (e.family) {
    case Family::Torus: {
      // Trapezoid on a periodic grid is exact for these band-limited products.
      int top = 0;
      for (int k : e.params) top = std::max(top, std::abs(k));
      const std::size_t n = static_cast<std::size_t>(2 * top + 8);
      const std::size_t d = e.dim;
      std::size_t total = 1;
      for (std::size_t j = 0; j < d; ++j) total *= n;
      double s = 0.0;
      std::vector<double> x(d);
      for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t r = idx;
        for (std::size_t j = 0; j < d; ++j) {
          x[j] = kTwoPi * static_cast<double>(r % n) / static_cast<double>(n);
          r /= n;
        }
        s += std::norm(e.eval(x));
      }
      return std::sqrt(s * std::pow(kTwoPi / static_cast<double>(n), static_cast<double>(d)));
    }
    case Family::Sphere: {
      const int nb = 16;
      auto ring = [&](double a) {
        double s = 0.0;
        for (int j = 0; j < nb; ++j) s += std::norm(e({a, kTwoPi * j / nb}));
        return s * kTwoPi / nb * std::sin(a);
      };
      return std::sqrt(simpson(ring, 0.0, kPi, 2000));
    }
    case Family::Disk: {
      const int nt = 4 * std::abs(e.params[0]) + 8;
      auto ring = [&](double r) {
        double s = 0.0;
        for (int j = 0; j < nt; ++j) s += std::norm(e({r, kTwoPi * j / nt}));
        return s * kTwoPi / nt * r;
      };
      return std::sqrt(simpson(ring, 0.0, 1.0, 2000));
    }
    case Family::Hermite: {
      // Product of one-dimensional quadratures; the entry is separable.
      double prod = 1.0;
      for (int a : e.params) {
        const double L = std::sqrt(2.0 * a + 1.0) + 12.0;
        prod *= simpson([a](double x) { double v = hermite_fn(a, x); return v * v; }, -L, L, 8000);
      }
      return std::sqrt(prod);
    }
    case Family::EightGraph:
    case Family::ThreeBranch: {
      double s = 0.0;
      for (std::size_t k = 0; k < e.expr->edge_count(); ++k)
        s += simpson([&](double x) { return std::norm(e({static_cast<double>(k), x})); }, 0.0, kTwoPi, 4000);
      return std::sqrt(s);
    }
  }
  return 0.0;
}

double entry_residual(const CatalogEntry& e) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int probes = 200;
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    std::vector<double> x(e.dim);
    cplx lap = 0.0, extra = 0.0;
    switch (e.family) {
      case Family::Torus:
        for (auto& c : x) c = kTwoPi * u(rng);
        for (std::size_t j = 0; j < e.dim; ++j) lap += partial(e.eval, x, j, kD2, 2);
        break;
      case Family::Hermite: {
        double r2 = 0.0;
        for (auto& c : x) {
          c = -6.0 + 12.0 * u(rng);
          r2 += c * c;
        }
        for (std::size_t j = 0; j < e.dim; ++j) lap += partial(e.eval, x, j, kD2, 2);
        extra = r2 * e.eval(x);
        break;
      }
      case Family::Sphere: {
        x[0] = 0.1 + (kPi - 0.2) * u(rng);
        x[1] = kTwoPi * u(rng);
        const double sa = std::sin(x[0]);
        lap = partial(e.eval, x, 0, kD2, 2) + std::cos(x[0]) / sa * partial(e.eval, x, 0, kD1, 1) +
              partial(e.eval, x, 1, kD2, 2) / (sa * sa);
        break;
      }
      case Family::Disk: {
        x[0] = 0.05 + 0.9 * u(rng);
        x[1] = kTwoPi * u(rng);
        lap = partial(e.eval, x, 0, kD2, 2) + partial(e.eval, x, 0, kD1, 1) / x[0] +
              partial(e.eval, x, 1, kD2, 2) / (x[0] * x[0]);
        break;
      }
      case Family::EightGraph:
      case Family::ThreeBranch:
        x[0] = static_cast<double>(p % e.expr->edge_count());
        x[1] = 0.05 + (kTwoPi - 0.1) * u(rng);
        lap = partial(e.eval, x, 1, kD2, 2);
        break;
    }
    const cplx r = -lap + extra - e.lambda * e.eval(x);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

SampleSet family_samples(Family family, std::size_t dim) {
  SampleSet s;
  s.family = family;
  auto tensor = [&](std::size_t n, double lo, double step, bool trapezoid_ends) {
    std::size_t total = 1;
    for (std::size_t j = 0; j < dim; ++j) total *= n;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::vector<double> x(dim);
      double w = 1.0;
      std::size_t r = idx;
      for (std::size_t j = 0; j < dim; ++j) {
        const std::size_t i = r % n;
        x[j] = lo + step * static_cast<double>(i);
        w *= step * (trapezoid_ends && (i == 0 || i + 1 == n) ? 0.5 : 1.0);
        r /= n;
      }
      s.points.push_back(std::move(x));
      s.weights.push_back(w);
    }
  };
  switch (family) {
    case Family::Torus: {
      const std::size_t n = dim == 1 ? 256 : dim == 2 ? 48 : 16;
      tensor(n, 0.0, kTwoPi / static_cast<double>(n), false);
      break;
    }
    case Family::Sphere: {
      const int na = 60, nb = 64;
      for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
          const double a = (i + 0.5) * kPi / na;
          s.points.push_back({a, kTwoPi * j / nb});
          s.weights.push_back(std::sin(a) * (kPi / na) * (kTwoPi / nb));
        }
      break;
    }
    case Family::Disk: {
      const int nr = 48, nt = 64;
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) {
          const double r = (i + 0.5) / nr;
          s.points.push_back({r, kTwoPi * j / nt});
          s.weights.push_back(r * (1.0 / nr) * (kTwoPi / nt));
        }
      break;
    }
    case Family::Hermite:
      if (dim == 1) tensor(801, -8.0, 0.02, true);
      else tensor(dim == 2 ? 81 : 21, -6.0, dim == 2 ? 0.15 : 0.6, true);
      break;
    case Family::EightGraph:
    case Family::ThreeBranch: {
      const int edges = family == Family::EightGraph ? 2 : 3;
      const int n = 512;
      for (int e = 0; e < edges; ++e)
        for (int i = 0; i <= n; ++i) {
          s.points.push_back({static_cast<double>(e), kTwoPi * i / n});
          s.weights.push_back(kTwoPi / n * (i == 0 || i == n ? 0.5 : 1.0));
        }
      break;
    }
  }
  return s;
}

}  // namespace isoctl
