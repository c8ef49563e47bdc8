#include "isoctl/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isoctl/error.hpp"
#include "isoctl/spectral.hpp"

namespace isoctl {

bool PropagatorContext::complete() const { return n_modes() >= dofs; }

namespace {

void gram_schmidt(std::vector<std::vector<double>>& cols, const std::vector<double>& w) {
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
  };
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        const double p = dot(cols[j], cols[k]);
        for (std::size_t i = 0; i < cols[k].size(); ++i) cols[k][i] -= p * cols[j][i];
      }
    const double n = std::sqrt(dot(cols[k], cols[k]));
    for (auto& x : cols[k]) x /= n;
  }
}

PropagatorContext from_columns(std::shared_ptr<const Grid> grid, std::vector<double> lambda,
                               const std::vector<std::vector<double>>& cols) {
  PropagatorContext ctx;
  ctx.domain = grid->domain_ptr();
  ctx.grid = grid;
  const std::size_t s = grid->size(), n = cols.size();
  ctx.basis.assign(s * n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < s; ++i) ctx.basis[i * n + k] = cols[k][i];
  ctx.lambda = std::move(lambda);
  return ctx;
}

std::vector<cplx> coefficients(const PropagatorContext& ctx, const WaveFunction& psi) {
  std::vector<cplx> c;
  kernels::project(ctx.basis, ctx.grid->size(), ctx.n_modes(), ctx.grid->weights(), psi.data(), c, ctx.backend);
  return c;
}

WaveFunction resummed(const PropagatorContext& ctx, const std::vector<cplx>& c) {
  std::vector<cplx> out;
  kernels::resum(ctx.basis, ctx.grid->size(), ctx.n_modes(), c, out, ctx.backend);
  return WaveFunction(ctx.grid, std::move(out));
}

double sup_abs(const RealFunction& f) {
  double m = 0.0;
  for (double x : f.data()) m = std::max(m, std::abs(x));
  return m;
}

RealFunction scaled(const RealFunction& f, double s) {
  RealFunction g = f;
  for (auto& x : g.data()) x *= s;
  return g;
}

RealFunction pulse_potential(const PropagatorContext& ctx, const std::vector<double>& u,
                             const std::vector<RealFunction>& Q, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "pulse duration must be positive");
  if (u.size() != Q.size()) throw Error(ErrorCode::InvalidArgument, "control and generator counts differ");
  RealFunction P(ctx.grid, 0.0);
  for (std::size_t j = 0; j < Q.size(); ++j) {
    require_same_grid(Q[j].grid(), *ctx.grid);
    if (u[j] == 0.0) continue;
    for (std::size_t i = 0; i < P.size(); ++i) P[i] += u[j] / delta * Q[j][i];
  }
  return P;
}

struct StepPlan {
  std::size_t n = 1;
  double estimate = 0.0;
};

// Leading Strang error over the pulse: delta dt^2 / 12 ||[P,[P,K]]|| with
// [P,[P,-d^2]] = 2 |P'|^2.
StepPlan plan_steps(const PropagatorContext& ctx, const RealFunction& P, const std::vector<double>& u,
                    const std::vector<RealFunction>& Q, double delta, const PulseOptions& opts) {
  const double grad = sup_abs(grid_derivative(P));
  const double c = grad * grad / 6.0;
  double dt = delta / 16.0;
  if (opts.substeps) {
    dt = delta / static_cast<double>(std::max<std::size_t>(1, *opts.substeps));
  } else if (opts.policy == StepPolicy::Strict) {
    double umax = 0.0, qmax = 0.0;
    for (double x : u) umax = std::max(umax, std::abs(x));
    for (const auto& q : Q) qmax = std::max(qmax, sup_abs(q));
    dt = std::min(dt, ctx.dt / (1.0 + umax / delta * qmax));
  } else if (c > 0.0) {
    dt = std::min(dt, std::sqrt(opts.tol / (delta * c)));
  }
  StepPlan p;
  p.n = opts.substeps ? std::max<std::size_t>(1, *opts.substeps)
                      : static_cast<std::size_t>(std::ceil(delta / dt * (1.0 - 1e-12)));
  p.n = std::max<std::size_t>(p.n, 1);
  const double h = delta / static_cast<double>(p.n);
  p.estimate = delta * h * h * c;
  return p;
}

}  // namespace

PropagatorContext fourier_context(std::shared_ptr<const Grid> grid, std::size_t n_modes) {
  if (!grid->periodic()) throw Error(ErrorCode::InvalidArgument, "the Fourier basis needs a circle grid");
  const std::size_t N = grid->size();
  if (n_modes == 0) n_modes = N;
  if (n_modes > N) throw Error(ErrorCode::GridTooCoarse, "more Fourier modes than grid nodes");
  const double h = grid->edge(0).h, L = h * static_cast<double>(N);
  const double w0 = 2.0 * std::numbers::pi / L;
  std::vector<double> lambda;
  std::vector<std::vector<double>> cols;
  auto add = [&](double lam, auto f) {
    if (cols.size() >= n_modes) return;
    std::vector<double> c(N);
    for (std::size_t i = 0; i < N; ++i) c[i] = f(static_cast<double>(i) * h);
    lambda.push_back(lam);
    cols.push_back(std::move(c));
  };
  add(0.0, [&](double) { return 1.0 / std::sqrt(L); });
  for (std::size_t k = 1; 2 * k <= N; ++k) {
    const double w = w0 * static_cast<double>(k);
    if (2 * k == N) {
      add(w * w, [&](double x) { return std::cos(w * x) / std::sqrt(L); });
    } else {
      add(w * w, [&](double x) { return std::sqrt(2.0 / L) * std::cos(w * x); });
      add(w * w, [&](double x) { return std::sqrt(2.0 / L) * std::sin(w * x); });
    }
  }
  auto ctx = from_columns(grid, std::move(lambda), cols);
  ctx.kind = PropagatorContext::BasisKind::Fourier;
  ctx.dofs = N;
  return ctx;
}

PropagatorContext analytic_context(std::shared_ptr<const Grid> grid, double lambda_max) {
  if (grid->periodic()) {
    // Same eigenfunctions; the trig basis is exact on the periodic grid.
    const double L = grid->edge(0).h * static_cast<double>(grid->size());
    const double w0 = 2.0 * std::numbers::pi / L;
    const auto kmax = static_cast<std::size_t>(std::floor(std::sqrt(std::max(lambda_max, 0.0)) / w0 + 1e-9));
    return fourier_context(grid, std::min(grid->size(), 2 * kmax + 1));
  }
  const auto spec = graph_spectrum_analytic(grid->domain(), lambda_max, false);
  const auto modes = sample_modes(spec, grid);
  std::vector<double> lambda;
  std::vector<std::vector<double>> cols;
  for (const auto& m : modes) {
    lambda.push_back(m.lambda);
    std::vector<double> c(m.phi.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = m.phi[i].real();
    cols.push_back(std::move(c));
  }
  gram_schmidt(cols, grid->weights());
  auto ctx = from_columns(grid, std::move(lambda), cols);
  ctx.kind = PropagatorContext::BasisKind::Analytic;
  ctx.dofs = assemble(grid, nullptr).dofs();
  return ctx;
}

PropagatorContext numeric_context(std::shared_ptr<const Grid> grid, const RealFunction* V, std::size_t n_modes) {
  auto op = assemble(grid, V);
  if (n_modes == 0) n_modes = op.dofs();
  auto pairs = graph_spectrum_numeric(grid, V, n_modes);
  std::vector<double> lambda;
  std::vector<std::vector<double>> cols;
  for (const auto& p : pairs) {
    lambda.push_back(p.lambda);
    std::vector<double> c(p.phi.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = p.phi[i].real();
    cols.push_back(std::move(c));
  }
  auto ctx = from_columns(grid, std::move(lambda), cols);
  ctx.kind = PropagatorContext::BasisKind::Numeric;
  ctx.dofs = op.dofs();
  if (V) ctx.V = *V;
  return ctx;
}

PropagatorContext default_context(std::shared_ptr<const Grid> grid, const RealFunction* V, std::size_t n_modes) {
  if (V) return numeric_context(grid, V, n_modes);
  if (grid->periodic()) return fourier_context(grid, n_modes);
  // Eigenvalues the grid can still resolve: about a third of the Nyquist wavenumber.
  double hmax = 0.0;
  for (std::size_t e = 0; e < grid->edge_count(); ++e) hmax = std::max(hmax, grid->edge(e).h);
  const double kmax = std::numbers::pi / hmax / 3.0;
  auto ctx = analytic_context(grid, kmax * kmax);
  if (n_modes > 0 && n_modes < ctx.n_modes()) {
    const std::size_t s = grid->size(), n = ctx.n_modes();
    std::vector<double> b(s * n_modes);
    for (std::size_t i = 0; i < s; ++i)
      std::copy_n(ctx.basis.begin() + static_cast<long>(i * n), n_modes, b.begin() + static_cast<long>(i * n_modes));
    ctx.basis = std::move(b);
    ctx.lambda.resize(n_modes);
  }
  return ctx;
}

double orthonormality_defect(const PropagatorContext& ctx) {
  const std::size_t s = ctx.grid->size(), n = ctx.n_modes();
  const auto& w = ctx.grid->weights();
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < s; ++i) g += w[i] * ctx.basis[i * n + a] * ctx.basis[i * n + b];
      worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

WaveFunction evolve_free(const PropagatorContext& ctx, const WaveFunction& psi, double t, PropagationLog* log) {
  require_same_grid(psi.grid(), *ctx.grid);
  if (t == 0.0) return psi;
  const double n_in = l2_norm(psi);
  if (n_in == 0.0) return psi;
  auto c = coefficients(ctx, psi);
  double cap = 0.0;
  for (const auto& z : c) cap += std::norm(z);
  cap = std::sqrt(cap) / n_in;
  if (cap < 1.0 - kTruncationTol)
    throw Error(ErrorCode::TruncationLoss,
                "eigenbasis captures only " + std::to_string(cap) + " of the state norm; raise n_modes or refine the grid");
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::polar(1.0, -ctx.lambda[k] * t);
  auto out = resummed(ctx, c);
  if (log) {
    log->worst_capture = std::min(log->worst_capture, cap);
    log->norm_drift += std::abs(l2_norm(out) - n_in);
    log->time += t;
    ++log->kinetic_steps;
  }
  return out;
}

std::size_t pulse_substeps(const PropagatorContext& ctx, const std::vector<double>& u,
                           const std::vector<RealFunction>& Q, double delta, const PulseOptions& opts) {
  return plan_steps(ctx, pulse_potential(ctx, u, Q, delta), u, Q, delta, opts).n;
}

WaveFunction evolve_pulse(const PropagatorContext& ctx, const WaveFunction& psi, const std::vector<double>& u,
                          const std::vector<RealFunction>& Q, double delta, const PulseOptions& opts,
                          PropagationLog* log) {
  require_same_grid(psi.grid(), *ctx.grid);
  const RealFunction P = pulse_potential(ctx, u, Q, delta);
  const StepPlan plan = plan_steps(ctx, P, u, Q, delta, opts);
  if (plan.estimate > opts.max_estimate)
    throw Error(ErrorCode::StepTooLarge, "splitting error estimate " + std::to_string(plan.estimate) +
                                             " exceeds " + std::to_string(opts.max_estimate));
  const double dt = delta / static_cast<double>(plan.n);
  const RealFunction half = scaled(P, -0.5 * dt), full = scaled(P, -dt);
  WaveFunction cur = apply_phase(psi, half);
  for (std::size_t s = 0; s < plan.n; ++s) {
    cur = evolve_free(ctx, cur, dt, log);
    cur = apply_phase(cur, s + 1 < plan.n ? full : half);
  }
  if (log) log->splitting_estimate += plan.estimate;
  return cur;
}

WaveFunction exact_pulse(const PropagatorContext& ctx, const WaveFunction& psi, const std::vector<double>& u,
                         const std::vector<RealFunction>& Q, double delta) {
  const RealFunction P = pulse_potential(ctx, u, Q, delta);
  const std::size_t s = ctx.grid->size(), n = ctx.n_modes();
  const auto& w = ctx.grid->weights();
  std::vector<double> H(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < s; ++i) g += w[i] * P[i] * ctx.basis[i * n + a] * ctx.basis[i * n + b];
      H[a * n + b] = H[b * n + a] = g;
    }
  for (std::size_t a = 0; a < n; ++a) H[a * n + a] += ctx.lambda[a];
  auto eig = kernels::sym_eig(H, n, true, ctx.backend);
  auto c = coefficients(ctx, psi);
  std::vector<cplx> d(n, 0.0), out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += eig.vectors[j * n + k] * c[k];
    d[j] = acc * std::polar(1.0, -delta * eig.values[j]);
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) out[k] += eig.vectors[j * n + k] * d[j];
  return resummed(ctx, out);
}

WaveFunction conjugated_step(const PropagatorContext& ctx, const WaveFunction& psi, const RealFunction& phi,
                             double alpha, double gamma, bool symmetric, PropagationLog* log) {
  if (alpha < 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be non-negative");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (alpha == 0.0) return evolve_free(ctx, psi, gamma, log);
  const double s = std::sqrt(alpha / gamma);
  auto once = [&](const WaveFunction& in, double sign, double t) {
    WaveFunction cur = apply_phase(in, scaled(phi, sign * s));
    cur = evolve_free(ctx, cur, t, log);
    return apply_phase(cur, scaled(phi, -sign * s));
  };
  if (!symmetric) return once(psi, 1.0, gamma);
  return once(once(psi, 1.0, 0.5 * gamma), -1.0, 0.5 * gamma);
}

WaveFunction conjugated_pulse(const PropagatorContext& ctx, const WaveFunction& psi, const RealFunction& S,
                              const std::vector<double>& u, const std::vector<RealFunction>& Q, double delta,
                              const PulseOptions& opts, PropagationLog* log) {
  const double s = 1.0 / std::sqrt(delta);
  WaveFunction cur = apply_phase(psi, scaled(S, s));
  cur = evolve_pulse(ctx, cur, u, Q, delta, opts, log);
  return apply_phase(cur, scaled(S, -s));
}

RealFunction grid_derivative(const RealFunction& f) {
  const Grid& g = f.grid();
  RealFunction d(f.grid_ptr(), 0.0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& eg = g.edge(e);
    const std::size_t n = eg.nodes;
    if (n < 3) continue;
    const double h = eg.h;
    for (std::size_t i = 0; i < n; ++i) {
      if (g.periodic()) {
        d.at(e, i) = (f.at(e, (i + 1) % n) - f.at(e, (i + n - 1) % n)) / (2 * h);
      } else if (i == 0) {
        d.at(e, i) = (-3 * f.at(e, 0) + 4 * f.at(e, 1) - f.at(e, 2)) / (2 * h);
      } else if (i + 1 == n) {
        d.at(e, i) = (3 * f.at(e, n - 1) - 4 * f.at(e, n - 2) + f.at(e, n - 3)) / (2 * h);
      } else {
        d.at(e, i) = (f.at(e, i + 1) - f.at(e, i - 1)) / (2 * h);
      }
    }
  }
  return d;
}

}  // namespace isoctl
