#pragma once

#include <string>
#include <vector>

#include "isoctl/domain.hpp"
#include "isoctl/rational.hpp"

namespace isoctl {

/// a*cos(w x) + b*sin(w x) on one edge.
struct TrigTerm {
  Rational w;
  Scalar a;
  Scalar b;
};

/// Edgewise finite trigonometric sum. Canonical form: per edge, frequencies
/// strictly increasing, no term with both coefficients zero, b = 0 at w = 0.
class TrigExpression {
 public:
  TrigExpression() = default;
  explicit TrigExpression(std::size_t edges) : terms_(edges) {}

  static TrigExpression constant(std::size_t edges, const Scalar& c);
  static TrigExpression cos_on(std::size_t edges, std::size_t edge, const Rational& w, const Scalar& c = 1);
  static TrigExpression sin_on(std::size_t edges, std::size_t edge, const Rational& w, const Scalar& c = 1);
  /// Same single-frequency term with per-edge coefficients.
  static TrigExpression cos_pattern(const std::vector<Scalar>& per_edge, const Rational& w);
  static TrigExpression sin_pattern(const std::vector<Scalar>& per_edge, const Rational& w);

  std::size_t edge_count() const { return terms_.size(); }
  const std::vector<TrigTerm>& terms(std::size_t edge) const { return terms_[edge]; }
  void add_term(std::size_t edge, const Rational& w, const Scalar& a, const Scalar& b);
  bool is_zero() const;
  bool is_exact() const;
  Rational max_frequency() const;

  double eval(std::size_t edge, double x) const;
  double eval_derivative(std::size_t edge, double x) const;
  double sup_norm_bound() const;  // sum of |a|+|b| over the worst edge

  TrigExpression operator-() const;
  friend TrigExpression operator+(const TrigExpression& p, const TrigExpression& q);
  friend TrigExpression operator-(const TrigExpression& p, const TrigExpression& q);
  friend TrigExpression operator*(const Scalar& c, const TrigExpression& p);
  TrigExpression& operator+=(const TrigExpression& q) { return *this = *this + q; }

  /// Exact term-by-term equality of canonical forms.
  friend bool operator==(const TrigExpression& p, const TrigExpression& q);
  /// Max coefficient difference; frequencies must match or count as a full term.
  double distance(const TrigExpression& q) const;

  /// "edge 0: 1/2*cos(1 x) + -1*sin(3/2 x); edge 1: 2"
  std::string to_string() const;
  /// Inverse of to_string. A single-edge expression may omit the "edge 0:" prefix.
  static TrigExpression parse(const std::string& text, std::size_t edges);

 private:
  std::vector<std::vector<TrigTerm>> terms_;
};

TrigExpression trig_mul(const TrigExpression& p, const TrigExpression& q);
TrigExpression trig_derivative(const TrigExpression& p);
TrigExpression trig_grad_squared(const TrigExpression& p);

/// Continuity at every vertex and zero Kirchhoff sum of outgoing derivatives at
/// every Neumann-Kirchhoff vertex. Exact whenever edge lengths are rational
/// multiples of pi and frequencies make the end values algebraic in {0, +-1}.
bool stabilizes_domain(const TrigExpression& p, const MetricDomain& d);

/// Vertex values and outgoing derivative sums, for diagnostics.
struct VertexReport {
  std::size_t vertex = 0;
  double value_spread = 0.0;
  double kirchhoff_sum = 0.0;
  bool ok = true;
};
std::vector<VertexReport> vertex_report(const TrigExpression& p, const MetricDomain& d);

}  // namespace isoctl
