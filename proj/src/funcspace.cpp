#include "isoctl/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "isoctl/error.hpp"

namespace isoctl {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) throw Error(ErrorCode::GridMismatch, "functions live on different grids");
}

cplx inner_product(const WaveFunction& f, const WaveFunction& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& w = f.grid().weights();
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::conj(f[i]) * g[i];
  return s;
}

double inner_product(const RealFunction& f, const RealFunction& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& w = f.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * g[i];
  return s;
}

double l2_norm(const WaveFunction& f) { return std::sqrt(std::max(0.0, inner_product(f, f).real())); }
double l2_norm(const RealFunction& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

double l2_distance(const WaveFunction& f, const WaveFunction& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& w = f.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::norm(f[i] - g[i]);
  return std::sqrt(s);
}

WaveFunction normalized(const WaveFunction& f) {
  WaveFunction g = f;
  double n = l2_norm(f);
  if (n > 0)
    for (auto& v : g.data()) v /= n;
  return g;
}

WaveFunction to_complex(const RealFunction& f) {
  WaveFunction g(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i];
  return g;
}

RealFunction evaluate(const TrigExpression& p, std::shared_ptr<const Grid> grid) {
  if (p.edge_count() != grid->edge_count()) throw Error(ErrorCode::GridMismatch, "expression does not match grid");
  return RealFunction::sample(grid, [&](std::size_t e, double x) { return p.eval(e, x); });
}

RealFunction modulus(const WaveFunction& f) {
  RealFunction m(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) m[i] = std::abs(f[i]);
  return m;
}

WaveFunction apply_phase(const WaveFunction& f, const RealFunction& theta) {
  require_same_grid(f.grid(), theta.grid());
  WaveFunction g = f;
  for (std::size_t i = 0; i < f.size(); ++i) g[i] *= std::polar(1.0, theta[i]);
  return g;
}

double sup_norm(const WaveFunction& f) {
  double m = 0.0;
  for (const auto& v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm(const RealFunction& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

double vertex_discontinuity(const WaveFunction& f) {
  const Grid& g = f.grid();
  double spread = 0.0;
  for (const auto& v : g.domain().vertices()) {
    cplx first = f[g.end_index(v.incident.front().edge, v.incident.front().end)];
    for (const auto& inc : v.incident) spread = std::max(spread, std::abs(f[g.end_index(inc.edge, inc.end)] - first));
  }
  double s = sup_norm(f);
  return s > 0 ? spread / s : spread;
}

bool is_conforming(const WaveFunction& f, double eps) { return vertex_discontinuity(f) <= eps; }

void write_csv(std::ostream& os, const WaveFunction& f) {
  const Grid& g = f.grid();
  os.precision(17);
  os << "edge,x,re,im\n";
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    for (std::size_t i = 0; i < g.edge(e).nodes; ++i) {
      cplx v = f.at(e, i);
      os << e << ',' << g.x(e, i) << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

void write_csv(std::ostream& os, const RealFunction& f) { write_csv(os, to_complex(f)); }

}  // namespace isoctl
