#include "isoctl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "isoctl/error.hpp"

namespace isoctl {

using kernels::Backend;

DiscreteOperator assemble(std::shared_ptr<const Grid> grid, const RealFunction* V) {
  if (V) require_same_grid(*grid, V->grid());
  DiscreteOperator op;
  op.grid = grid;
  const Grid& g = *grid;
  const MetricDomain& dom = g.domain();
  op.dof_of_sample.assign(g.size(), -1);
  std::size_t next = 0;
  std::vector<long> vertex_dof(dom.vertices().size(), -1);
  if (g.periodic()) {
    for (std::size_t i = 0; i < g.size(); ++i) op.dof_of_sample[i] = static_cast<long>(next++);
    vertex_dof[0] = 0;
  } else {
    for (const auto& v : dom.vertices())
      if (v.condition != BoundaryKind::Dirichlet) vertex_dof[v.id] = static_cast<long>(next++);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const auto& eg = g.edge(e);
      const auto& edge = dom.edges()[e];
      op.dof_of_sample[eg.offset] = vertex_dof[edge.from];
      op.dof_of_sample[eg.offset + eg.nodes - 1] = vertex_dof[edge.to];
      for (std::size_t i = 1; i + 1 < eg.nodes; ++i) op.dof_of_sample[eg.offset + i] = static_cast<long>(next++);
    }
  }
  op.mass.assign(next, 0.0);
  op.kdiag.assign(next, 0.0);
  std::map<std::pair<std::size_t, std::size_t>, double> off;
  auto segment = [&](long a, long b, double h) {
    if (a >= 0) {
      op.kdiag[a] += 1.0 / h;
      op.mass[a] += 0.5 * h;
    }
    if (b >= 0) {
      op.kdiag[b] += 1.0 / h;
      op.mass[b] += 0.5 * h;
    }
    if (a >= 0 && b >= 0) {
      if (a == b) throw Error(ErrorCode::GridTooCoarse, "segment joins a vertex to itself");
      off[{std::min(a, b), std::max(a, b)}] -= 1.0 / h;
    }
  };
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& eg = g.edge(e);
    std::size_t segs = g.periodic() ? eg.nodes : eg.nodes - 1;
    for (std::size_t i = 0; i < segs; ++i) {
      std::size_t j = (i + 1) % eg.nodes;
      segment(op.dof_of_sample[eg.offset + i], op.dof_of_sample[eg.offset + j], eg.h);
    }
  }
  if (V) {
    const auto& w = g.weights();
    for (std::size_t s = 0; s < g.size(); ++s)
      if (op.dof_of_sample[s] >= 0) op.kdiag[op.dof_of_sample[s]] += (*V)[s] * w[s];
  }
  for (const auto& [key, val] : off) op.off.emplace_back(key.first, key.second, val);

  // Chain view for inertia counts: vertices first, then one chain per edge.
  auto& cs = op.chains;
  std::size_t nv = g.periodic() ? 1 : 0;
  if (!g.periodic())
    for (long d : vertex_dof)
      if (d >= 0) ++nv;
  cs.vertex_diag.assign(op.kdiag.begin(), op.kdiag.begin() + nv);
  cs.vertex_mass.assign(op.mass.begin(), op.mass.begin() + nv);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& eg = g.edge(e);
    kernels::Chain c;
    std::size_t first = 1, last = g.periodic() ? eg.nodes - 1 : eg.nodes - 2;
    c.start = g.periodic() ? 0 : vertex_dof[dom.edges()[e].from];
    c.end = g.periodic() ? 0 : vertex_dof[dom.edges()[e].to];
    c.couple_start = c.start >= 0 ? -1.0 / eg.h : 0.0;
    c.couple_end = c.end >= 0 ? -1.0 / eg.h : 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      long d = op.dof_of_sample[eg.offset + i];
      c.diag.push_back(op.kdiag[d]);
      c.mass.push_back(op.mass[d]);
      if (i < last) c.off.push_back(-1.0 / eg.h);
    }
    cs.chains.push_back(std::move(c));
  }
  return op;
}

std::vector<double> DiscreteOperator::symmetric_matrix() const {
  const std::size_t n = dofs();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = kdiag[i] / mass[i];
  for (const auto& [i, j, v] : off) {
    double s = v / std::sqrt(mass[i] * mass[j]);
    a[i * n + j] = s;
    a[j * n + i] = s;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (a[i * n + j] != a[j * n + i]) throw Error(ErrorCode::AssemblyAsymmetry, "entry " + std::to_string(i));
  return a;
}

WaveFunction DiscreteOperator::to_samples(const double* y) const {
  WaveFunction f(grid);
  for (std::size_t s = 0; s < f.size(); ++s) {
    long d = dof_of_sample[s];
    f[s] = d >= 0 ? y[d] / std::sqrt(mass[d]) : 0.0;
  }
  return f;
}

std::vector<double> DiscreteOperator::from_samples(const WaveFunction& f) const {
  std::vector<double> y(dofs(), 0.0), cnt(dofs(), 0.0);
  for (std::size_t s = 0; s < f.size(); ++s) {
    long d = dof_of_sample[s];
    if (d < 0) continue;
    y[d] += f[s].real();
    cnt[d] += 1.0;
  }
  for (std::size_t d = 0; d < y.size(); ++d) y[d] = y[d] / cnt[d] * std::sqrt(mass[d]);
  return y;
}

WaveFunction DiscreteOperator::apply(const WaveFunction& f) const {
  std::vector<cplx> u(dofs(), 0.0);
  std::vector<double> cnt(dofs(), 0.0);
  for (std::size_t s = 0; s < f.size(); ++s) {
    long d = dof_of_sample[s];
    if (d < 0) continue;
    u[d] += f[s];
    cnt[d] += 1.0;
  }
  for (std::size_t d = 0; d < u.size(); ++d) u[d] /= cnt[d];
  std::vector<cplx> ku(dofs(), 0.0);
  for (std::size_t d = 0; d < u.size(); ++d) ku[d] = kdiag[d] * u[d];
  for (const auto& [i, j, v] : off) {
    ku[i] += v * u[j];
    ku[j] += v * u[i];
  }
  WaveFunction out(grid);
  for (std::size_t s = 0; s < f.size(); ++s) {
    long d = dof_of_sample[s];
    out[s] = d >= 0 ? ku[d] / mass[d] : 0.0;
  }
  return out;
}

std::vector<std::size_t> cluster_sizes(const std::vector<double>& values, double gap) {
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == 0 || values[i] - values[i - 1] > gap * (1.0 + std::abs(values[i]))) sizes.push_back(0);
    ++sizes.back();
  }
  return sizes;
}

void assign_clusters(std::vector<EigenPair>& pairs, double gap) {
  std::size_t cluster = 0, idx = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0 && pairs[i].lambda - pairs[i - 1].lambda > gap * (1.0 + std::abs(pairs[i].lambda))) {
      ++cluster;
      idx = 0;
    }
    pairs[i].cluster = cluster;
    pairs[i].index_in_cluster = idx++;
  }
}

std::vector<EigenPair> graph_spectrum_numeric(std::shared_ptr<const Grid> grid, const RealFunction* V,
                                              std::size_t n_modes, Backend backend) {
  auto op = assemble(grid, V);
  const std::size_t n = op.dofs();
  if (n < 4 || n_modes > n) throw Error(ErrorCode::GridTooCoarse, "grid has too few unknowns for the requested modes");
  auto eig = kernels::sym_eig(op.symmetric_matrix(), n, true, backend);
  std::vector<EigenPair> out;
  for (std::size_t k = 0; k < n_modes; ++k) out.push_back(EigenPair{eig.values[k], op.to_samples(&eig.vectors[k * n])});
  assign_clusters(out);
  return out;
}

std::vector<double> fd_eigenvalues(std::shared_ptr<const Grid> grid, const RealFunction* V, std::size_t count,
                                   double tol, Backend backend) {
  auto op = assemble(grid, V);
  if (count > op.dofs()) throw Error(ErrorCode::GridTooCoarse, "grid has too few unknowns for the requested modes");
  return kernels::lowest_eigenvalues(op.chains, count, tol, backend);
}

std::vector<EigenPair> circle_spectrum(const RealFunction& V, std::size_t n_modes) {
  if (!V.grid().periodic()) throw Error(ErrorCode::InvalidArgument, "circle_spectrum needs a circle grid");
  if (V.grid().size() < 16) throw Error(ErrorCode::GridTooCoarse, "circle grid needs at least 16 nodes");
  return graph_spectrum_numeric(V.grid_ptr(), &V, n_modes);
}

std::vector<EigenPair> circle_spectrum(const TrigExpression& V, std::size_t n_modes, std::shared_ptr<const Grid> grid) {
  return circle_spectrum(evaluate(V, grid), n_modes);
}

double eigen_residual(const WaveFunction& phi, const RealFunction* V, double lambda) {
  const Grid& g = phi.grid();
  double sum = 0.0;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& eg = g.edge(e);
    const double h = eg.h;
    const std::size_t n = eg.nodes;
    std::size_t lo = g.periodic() ? 0 : 3;
    std::size_t hi = g.periodic() ? n : (n > 4 ? n - 3 : 0);
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
      cplx d2 = (phi.at(e, im) - 2.0 * phi.at(e, i) + phi.at(e, ip)) / (h * h);
      double v = V ? V->at(e, i) : 0.0;
      sum += h * std::norm(-d2 + (v - lambda) * phi.at(e, i));
    }
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Secular equation for V = 0.

namespace {

// Row contributions for f = A c(x) + B s(x) on one edge.
struct EndRow {
  double value_a, value_b, flux_a, flux_b;
};

EndRow end_row(const Edge& e, EndMarker end, double omega) {
  const double L = e.length.value;
  if (omega == 0.0) {
    // Basis (1, x).
    if (end == EndMarker::Start) return {1.0, 0.0, 0.0, 1.0};
    return {1.0, L, 0.0, -1.0};
  }
  if (end == EndMarker::Start) return {1.0, 0.0, 0.0, 1.0};
  double c = std::cos(omega * L), s = std::sin(omega * L);
  // Outgoing derivative at the end is -f'(L); divided by omega.
  return {c, s, s, -c};
}

std::vector<double> build_matrix(const MetricDomain& g, double omega) {
  const std::size_t E = g.edges().size();
  const std::size_t cols = 2 * E;
  std::vector<double> m;
  auto new_row = [&]() -> double* {
    m.resize(m.size() + cols, 0.0);
    return &m[m.size() - cols];
  };
  for (const auto& v : g.vertices()) {
    const auto& inc = v.incident;
    EndRow r0 = end_row(g.edges()[inc[0].edge], inc[0].end, omega);
    for (std::size_t k = 1; k < inc.size(); ++k) {
      EndRow rk = end_row(g.edges()[inc[k].edge], inc[k].end, omega);
      double* row = new_row();
      row[2 * inc[0].edge] += r0.value_a;
      row[2 * inc[0].edge + 1] += r0.value_b;
      row[2 * inc[k].edge] -= rk.value_a;
      row[2 * inc[k].edge + 1] -= rk.value_b;
    }
    double* row = new_row();
    if (v.condition == BoundaryKind::Dirichlet) {
      row[2 * inc[0].edge] += r0.value_a;
      row[2 * inc[0].edge + 1] += r0.value_b;
    } else {
      for (const auto& i : inc) {
        EndRow r = end_row(g.edges()[i.edge], i.end, omega);
        row[2 * i.edge] += r.flux_a;
        row[2 * i.edge + 1] += r.flux_b;
      }
    }
  }
  return m;
}

double determinant(std::vector<double> a, std::size_t n) {
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
    if (a[p * n + k] == 0.0) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      det = -det;
    }
    det *= a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
    }
  }
  return det;
}

struct SvdInfo {
  std::vector<double> sv;
  std::vector<double> v;
  double norm = 0.0;
  double smin() const { return sv.back(); }
};

SvdInfo svd_at(const MetricDomain& g, double omega) {
  const std::size_t n = 2 * g.edges().size();
  auto m = build_matrix(g, omega);
  SvdInfo info;
  info.sv = kernels::singular_values(m, m.size() / n, n, &info.v);
  // A loop at a root can make the whole matrix vanish, so the scale is floored at 1.
  info.norm = std::max(1.0, info.sv.front());
  return info;
}

double golden_min(const MetricDomain& g, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = svd_at(g, c).smin(), fd = svd_at(g, d).smin();
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = svd_at(g, c).smin();
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = svd_at(g, d).smin();
    }
  }
  return fc < fd ? c : d;
}

// L2 inner product on one edge of A c + B s and A' c + B' s at frequency omega.
double edge_inner(double L, double omega, double a1, double b1, double a2, double b2) {
  double cc, ss, cs;
  if (omega == 0.0) {
    cc = L;
    cs = L * L / 2.0;
    ss = L * L * L / 3.0;
  } else {
    double s2 = std::sin(2.0 * omega * L) / (4.0 * omega);
    cc = L / 2.0 + s2;
    ss = L / 2.0 - s2;
    double sl = std::sin(omega * L);
    cs = sl * sl / (2.0 * omega);
  }
  return a1 * a2 * cc + b1 * b2 * ss + (a1 * b2 + a2 * b1) * cs;
}

void add_modes(const MetricDomain& g, const SecularRoot& root, const SvdInfo& info, std::size_t cluster,
               std::vector<AnalyticMode>& out) {
  const std::size_t E = g.edges().size();
  const std::size_t n = 2 * E;
  const double omega = root.exact_omega ? root.exact_omega->to_double() : root.omega;
  std::vector<std::vector<double>> vecs;
  for (std::size_t k = 0; k < root.nullity; ++k) {
    const double* v = &info.v[(n - 1 - k) * n];
    vecs.emplace_back(v, v + n);
  }
  auto inner = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t e = 0; e < E; ++e)
      s += edge_inner(g.edges()[e].length.value, omega, x[2 * e], x[2 * e + 1], y[2 * e], y[2 * e + 1]);
    return s;
  };
  // Modified Gram-Schmidt in the analytic L2 inner product.
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double p = inner(vecs[j], vecs[i]);
      for (std::size_t k = 0; k < n; ++k) vecs[i][k] -= p * vecs[j][k];
    }
    double nn = std::sqrt(inner(vecs[i], vecs[i]));
    for (double& x : vecs[i]) x /= nn;
  }
  Rational w = root.exact_omega ? *root.exact_omega : Rational::approximate(root.omega, 1000000000);
  for (const auto& v : vecs) {
    AnalyticMode mode;
    mode.lambda = omega * omega;
    mode.exact_omega = root.exact_omega;
    mode.cluster = cluster;
    mode.phi = TrigExpression(E);
    // Deterministic sign: first sizeable coefficient positive.
    double sign = 1.0;
    for (double x : v)
      if (std::abs(x) > 1e-8) {
        sign = x < 0 ? -1.0 : 1.0;
        break;
      }
    for (std::size_t e = 0; e < E; ++e) {
      double a = sign * v[2 * e], b = sign * v[2 * e + 1];
      if (omega == 0.0) {
        // Zero modes are edgewise constant; any linear part is numerical noise.
        mode.phi.add_term(e, Rational(0), Scalar::real(std::abs(a) < 1e-13 ? 0.0 : a), 0);
      } else {
        mode.phi.add_term(e, w, Scalar::real(std::abs(a) < 1e-13 ? 0.0 : a), Scalar::real(std::abs(b) < 1e-13 ? 0.0 : b));
      }
    }
    out.push_back(std::move(mode));
  }
}

}  // namespace

std::vector<double> secular_matrix(const MetricDomain& g, double omega) { return build_matrix(g, omega); }

AnalyticSpectrum graph_spectrum_analytic(const MetricDomain& g, double lambda_max, bool keep_scan, double step) {
  AnalyticSpectrum out;
  for (const auto& e : g.edges())
    if (!e.length.over_pi) out.commensurate = false;
  const std::size_t n = 2 * g.edges().size();
  std::size_t cluster = 0;

  {
    auto info = svd_at(g, 0.0);
    std::size_t null = 0;
    for (double s : info.sv)
      if (s < 1e-8 * info.norm) ++null;
    if (null > 0) {
      SecularRoot r{0.0, Rational(0), null};
      out.scan.roots.push_back(r);
      add_modes(g, r, info, cluster++, out.modes);
    }
  }

  const double omega_max = std::sqrt(std::max(0.0, lambda_max));
  const std::size_t steps = static_cast<std::size_t>(std::ceil(omega_max / step)) + 2;
  std::vector<double> om(steps + 1), sm(steps + 1), dt(steps + 1);
  for (std::size_t i = 1; i <= steps; ++i) {
    om[i] = step * static_cast<double>(i);
    auto m = build_matrix(g, om[i]);
    auto sv = kernels::singular_values(m, m.size() / n, n);
    sm[i] = sv.back() / std::max(1.0, sv.front());
    dt[i] = determinant(m, n);
  }
  om[0] = 0.0;
  sm[0] = 1.0;
  dt[0] = dt[1];
  std::vector<std::pair<double, double>> brackets;
  for (std::size_t i = 1; i < steps; ++i) {
    bool local_min = sm[i] <= sm[i - 1] && sm[i] <= sm[i + 1];
    bool sign_change = (dt[i] > 0) != (dt[i + 1] > 0) || dt[i] == 0.0;
    if (local_min) brackets.emplace_back(om[i - 1], om[i + 1]);
    if (sign_change) brackets.emplace_back(om[i - 1], std::min(om[steps], om[i + 1] + step));
  }
  std::vector<double> found;
  for (auto [a, b] : brackets) {
    a = std::max(a, 0.5 * step);
    double w = golden_min(g, a, b);
    auto info = svd_at(g, w);
    if (info.smin() >= 1e-8 * info.norm) continue;
    if (w > omega_max + 1e-9) continue;
    bool dup = false;
    for (double f : found)
      if (std::abs(f - w) < 2.0 * step) dup = true;
    if (dup) continue;
    found.push_back(w);
  }
  std::sort(found.begin(), found.end());
  for (double w : found) {
    SecularRoot r;
    r.omega = w;
    SvdInfo info = svd_at(g, w);
    if (out.commensurate) {
      Rational q = Rational::approximate(w, 64);
      if (std::abs(q.to_double() - w) < 1e-6) {
        auto exact = svd_at(g, q.to_double());
        if (exact.smin() < 1e-11 * exact.norm) {
          r.exact_omega = q;
          r.omega = q.to_double();
          info = exact;
        }
      }
    }
    for (double s : info.sv)
      if (s < 1e-8 * info.norm) ++r.nullity;
    out.scan.roots.push_back(r);
    add_modes(g, r, info, cluster++, out.modes);
  }
  if (keep_scan) {
    out.scan.omega_grid.assign(om.begin() + 1, om.end());
    out.scan.sigma_min.assign(sm.begin() + 1, sm.end());
    out.scan.det.assign(dt.begin() + 1, dt.end());
  }
  return out;
}

std::vector<EigenPair> sample_modes(const AnalyticSpectrum& spec, std::shared_ptr<const Grid> grid) {
  std::vector<EigenPair> out;
  for (const auto& m : spec.modes) {
    auto f = to_complex(evaluate(m.phi, grid));
    out.push_back(EigenPair{m.lambda, normalized(f), m.cluster, 0});
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].cluster == out[i - 1].cluster) out[i].index_in_cluster = out[i - 1].index_in_cluster + 1;
  return out;
}

}  // namespace isoctl
