#include "isoctl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isoctl/error.hpp"
#include "isoctl/isomod.hpp"
#include "json.hpp"

namespace isoctl {

bool Segment::is_free() const {
  return std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; });
}

double ControlSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments_) t += s.duration;
  return t;
}

void ControlSchedule::push(Segment s) {
  if (!(s.duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "segment durations must be positive");
  if (s.u.size() != m_) throw Error(ErrorCode::InvalidArgument, "segment control length differs from the schedule");
  segments_.push_back(std::move(s));
}

ControlSchedule ControlSchedule::concat(const ControlSchedule& a, const ControlSchedule& b) {
  if (a.m_ != b.m_) throw Error(ErrorCode::InvalidArgument, "cannot concatenate schedules with different control counts");
  ControlSchedule c = a;
  c.segments_.insert(c.segments_.end(), b.segments_.begin(), b.segments_.end());
  return c;
}

namespace {

// Weighted least squares min ||W^{1/2}(A x - b)|| by modified Gram-Schmidt;
// columns that are dependent on earlier ones get x = 0.
std::vector<double> least_squares(const std::vector<std::vector<double>>& cols, const std::vector<double>& w,
                                  const std::vector<double>& b) {
  const std::size_t n = cols.size(), s = b.size();
  std::vector<double> sw(s);
  for (std::size_t i = 0; i < s; ++i) sw[i] = std::sqrt(w[i]);
  std::vector<std::vector<double>> q;
  std::vector<std::size_t> kept;
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(s);
    for (std::size_t i = 0; i < s; ++i) v[i] = sw[i] * cols[k][i];
    double n0 = 0.0;
    for (double x : v) n0 += x * x;
    n0 = std::sqrt(n0);
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < q.size(); ++j) {
        double p = 0.0;
        for (std::size_t i = 0; i < s; ++i) p += q[j][i] * v[i];
        r[j][k] += p;
        for (std::size_t i = 0; i < s; ++i) v[i] -= p * q[j][i];
      }
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (nv < 1e-10 * n0) {
      for (std::size_t j = 0; j < q.size(); ++j) r[j][k] = 0.0;
      continue;
    }
    for (auto& x : v) x /= nv;
    r[q.size()][k] = nv;
    q.push_back(std::move(v));
    kept.push_back(k);
  }
  std::vector<double> qb(q.size(), 0.0);
  for (std::size_t j = 0; j < q.size(); ++j)
    for (std::size_t i = 0; i < s; ++i) qb[j] += q[j][i] * sw[i] * b[i];
  std::vector<double> x(n, 0.0);
  for (std::size_t jj = q.size(); jj-- > 0;) {
    double acc = qb[jj];
    for (std::size_t t = jj + 1; t < q.size(); ++t) acc -= r[jj][kept[t]] * x[kept[t]];
    x[kept[jj]] = acc / r[jj][kept[jj]];
  }
  return x;
}

double max_frequency(const TrigExpression& p) { return p.is_zero() ? 0.0 : p.max_frequency().to_double(); }

std::shared_ptr<const Grid> fitting_grid(const MetricDomain& d, double max_freq) {
  return discretize_nodes(d, static_cast<std::size_t>(8 * std::ceil(max_freq) + 65));
}

TrigExpression combination(const GeneratorSet& gens, const std::vector<Scalar>& c) {
  TrigExpression v(gens.domain->edges().size());
  for (std::size_t j = 0; j < c.size(); ++j)
    if (!c[j].is_zero()) v += c[j] * gens.q[j];
  return v;
}

bool close(const TrigExpression& a, const TrigExpression& b) {
  if (a.is_exact() && b.is_exact()) return a == b;
  return (a - b).sup_norm_bound() <= 1e-9 * (1.0 + a.sup_norm_bound());
}

TrigExpression same_on_edges(std::size_t edges, bool is_sin, const Rational& w, const Scalar& c) {
  std::vector<Scalar> per(edges, c);
  return is_sin ? TrigExpression::sin_pattern(per, w) : TrigExpression::cos_pattern(per, w);
}

bool in_span(const TrigExpression& p, const GeneratorSet& gens) {
  try {
    decompose_in_generators(p, gens);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::vector<Scalar> decompose_in_generators(const TrigExpression& p, const GeneratorSet& gens) {
  double fmax = max_frequency(p);
  for (const auto& q : gens.q) fmax = std::max(fmax, max_frequency(q));
  auto grid = fitting_grid(*gens.domain, fmax);
  std::vector<std::vector<double>> cols;
  for (const auto& q : gens.q) cols.push_back(evaluate(q, grid).data());
  const auto x = least_squares(cols, grid->weights(), evaluate(p, grid).data());
  // Prefer exact small-denominator rationals when they reproduce p exactly.
  if (p.is_exact()) {
    std::vector<Scalar> exact;
    for (double v : x) exact.emplace_back(Rational::approximate(v, 720));
    if (combination(gens, exact) == p) return exact;
  }
  std::vector<Scalar> c;
  for (double v : x) c.push_back(Scalar::real(v));
  if (!close(combination(gens, c), p))
    throw Error(ErrorCode::NotInGeneratorSpan, "phase " + p.to_string() + " is not a combination of the generators");
  return c;
}

ControlSchedule pulse_for_phase(const std::vector<Scalar>& coeffs, double delta) {
  ControlSchedule s(coeffs.size());
  std::vector<double> u;
  for (const auto& c : coeffs) u.push_back(c.is_zero() ? 0.0 : -c.value());
  s.push({delta, u});
  return s;
}

ControlSchedule pulse_for_phase(const TrigExpression& phi0, const GeneratorSet& gens, double delta) {
  return pulse_for_phase(decompose_in_generators(phi0, gens), delta);
}

namespace {

struct Compiler {
  const SynthesisParams& p;
  std::size_t m;

  ControlSchedule node(const CertNode& n, double scale, int level) const {
    const double f = std::pow(p.level_factor, level);
    const double delta = p.delta * f, gamma = p.gamma * f;
    if (n.kind == CertNode::Kind::GeneratorCombo) {
      std::vector<Scalar> c;
      for (const auto& x : n.coeffs) c.push_back(Scalar::real(scale * x.value()));
      return pulse_for_phase(c, delta);
    }
    ControlSchedule base = node(*n.base, scale, level);
    ControlSchedule terms(m);
    for (const auto& t : n.terms) {
      const double a = scale * t.alpha.value();
      if (a == 0.0) continue;
      // e^{-i s psi} e^{-i gamma H0} e^{i s psi} -> e^{-i a (psi')^2}, s = sqrt(a / gamma).
      const double s = std::sqrt(a / gamma);
      auto conj = [&](const Cert& first, const Cert& last, double flight) {
        ControlSchedule c = node(*first, s, level + 1);
        c.push_free(flight);
        return ControlSchedule::concat(c, node(*last, s, level + 1));
      };
      if (p.symmetrize) {
        terms = ControlSchedule::concat(terms, conj(t.plus, t.minus, 0.5 * gamma));
        terms = ControlSchedule::concat(terms, conj(t.minus, t.plus, 0.5 * gamma));
      } else {
        terms = ControlSchedule::concat(terms, conj(t.plus, t.minus, gamma));
      }
    }
    return p.terms_first ? ControlSchedule::concat(terms, base) : ControlSchedule::concat(base, terms);
  }
};

}  // namespace

ControlSchedule compile(const SaturationCertificate& cert, const SynthesisParams& params) {
  if (!(params.delta > 0.0) || !(params.gamma > 0.0) || !(params.level_factor > 0.0))
    throw Error(ErrorCode::InvalidArgument, "delta, gamma and the level factor must be positive");
  if (!cert.root()) throw Error(ErrorCode::InvalidCertificate, "empty certificate");
  const auto v = cert_validate(cert, *cert.generators().domain);
  if (!v.ok) throw Error(ErrorCode::InvalidCertificate, v.node + ": " + v.reason);
  Compiler c{params, cert.generators().size()};
  return c.node(*cert.root(), 1.0, 0);
}

std::vector<RealFunction> sample_generators(const GeneratorSet& gens, std::shared_ptr<const Grid> grid) {
  std::vector<RealFunction> out;
  for (const auto& q : gens.q) out.push_back(evaluate(q, grid));
  return out;
}

WaveFunction run_schedule(const PropagatorContext& ctx, const WaveFunction& psi0, const ControlSchedule& sched,
                          const std::vector<RealFunction>& Q, const PulseOptions& opts, PropagationLog* log) {
  if (sched.controls() != Q.size()) throw Error(ErrorCode::InvalidArgument, "schedule and generator counts differ");
  WaveFunction psi = psi0;
  for (const auto& s : sched.segments())
    psi = s.is_free() ? evolve_free(ctx, psi, s.duration, log) : evolve_pulse(ctx, psi, s.u, Q, s.duration, opts, log);
  return psi;
}

std::string schedule_to_json(const ControlSchedule& sched, const GeneratorSet& gens) {
  if (sched.controls() != gens.size()) throw Error(ErrorCode::InvalidArgument, "schedule and generator counts differ");
  nlohmann::ordered_json doc;
  doc["format"] = "isoctl-schedule/1";
  doc["domain"] = gens.domain_spec;
  auto& g = doc["generators"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < gens.size(); ++i) g.push_back({{"name", gens.names[i]}, {"expr", gens.q[i].to_string()}});
  doc["T"] = sched.total_duration();
  auto& segs = doc["segments"] = nlohmann::ordered_json::array();
  for (const auto& seg : sched.segments()) segs.push_back({{"duration", seg.duration}, {"u", seg.u}});
  return doc.dump(2) + "\n";
}

ScheduleFile schedule_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "isoctl-schedule/1")
      throw Error(ErrorCode::ParseError, "schedule JSON: unknown format");
    auto gens = std::make_shared<GeneratorSet>();
    gens->domain_spec = j.at("domain").get<std::string>();
    gens->domain = std::make_shared<const MetricDomain>(parse_domain(gens->domain_spec));
    const std::size_t edges = gens->domain->edges().size();
    for (const auto& g : j.at("generators")) {
      gens->names.push_back(g.at("name").get<std::string>());
      gens->q.push_back(TrigExpression::parse(g.at("expr").get<std::string>(), edges));
    }
    ControlSchedule sched(gens->size());
    for (const auto& seg : j.at("segments"))
      sched.push({seg.at("duration").get<double>(), seg.at("u").get<std::vector<double>>()});
    return {std::move(gens), std::move(sched)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("schedule JSON: ") + e.what());
  }
}

int harmonic_reach(const GeneratorSet& gens) {
  const std::size_t edges = gens.domain->edges().size();
  if (!in_span(TrigExpression::constant(edges, 1), gens)) return 0;
  int F = 0;
  for (int k = 1; k <= 64; ++k) {
    if (!in_span(same_on_edges(edges, false, k, 1), gens) || !in_span(same_on_edges(edges, true, k, 1), gens)) break;
    F = k;
  }
  return F;
}

namespace {

struct Synthesizer {
  std::shared_ptr<const GeneratorSet> gens;
  int reach;
  std::size_t edges;

  // Terms above the reach must be identical on every edge and at integer frequency.
  SaturationCertificate operator()(const TrigExpression& p) const {
    if (p.edge_count() != edges) throw Error(ErrorCode::InvalidArgument, "phase lives on a different domain");
    TrigExpression low(edges);
    std::vector<TrigTerm> high;
    for (std::size_t e = 0; e < edges; ++e) {
      std::vector<TrigTerm> mine;
      for (const auto& t : p.terms(e)) {
        if (t.w <= Rational(reach)) {
          low.add_term(e, t.w, t.a, t.b);
        } else {
          mine.push_back(t);
        }
      }
      if (e == 0) {
        high = mine;
        continue;
      }
      bool same = mine.size() == high.size();
      for (std::size_t i = 0; same && i < mine.size(); ++i)
        same = mine[i].w == high[i].w && mine[i].a == high[i].a && mine[i].b == high[i].b;
      if (!same) throw Error(ErrorCode::NotInGeneratorSpan, "high frequencies must agree on every edge");
    }
    if (!high.empty() && reach == 0)
      throw Error(ErrorCode::NotInGeneratorSpan, "generators contain no harmonic family to build on");
    Scalar constant(0);
    std::vector<ConeTerm> terms;
    // a cos + b sin goes in as two axis-aligned pieces so exact inputs keep exact phases.
    std::vector<TrigTerm> pieces;
    for (const auto& t : high) {
      if (!t.a.is_zero() && !t.b.is_zero() && t.a.is_exact() && t.b.is_exact()) {
        pieces.push_back({t.w, t.a, Scalar(0)});
        pieces.push_back({t.w, Scalar(0), t.b});
      } else {
        pieces.push_back(t);
      }
    }
    for (const auto& t : pieces) {
      if (!t.w.is_integer()) throw Error(ErrorCode::NotInGeneratorSpan, "only integer frequencies can be synthesized");
      const auto n = t.w.num();
      const std::int64_t m = (n + 1) / 2, l = n - m;
      // a cos + b sin = R cos(nx - f).
      Scalar R, ca, sa;  // R, cos f_1, sin f_1 for the m-piece; the l-piece gets f_2
      Scalar cb, sb;
      const bool a0 = t.a.is_zero(), b0 = t.b.is_zero();
      if (b0 && t.a.value() > 0) {
        R = t.a, ca = 1, sa = 0, cb = 1, sb = 0;
      } else if (b0 || a0) {
        R = b0 ? -t.a : (t.b.value() > 0 ? t.b : -t.b);
        if (b0) {
          // f = pi: f_1 = pi, f_2 = 0.
          ca = -1, sa = 0, cb = 1, sb = 0;
        } else {
          // f = +-pi/2: f_1 = f, f_2 = 0.
          ca = 0, sa = t.b.value() > 0 ? 1 : -1, cb = 1, sb = 0;
        }
      } else {
        const double r = std::hypot(t.a.value(), t.b.value());
        const double f = std::atan2(t.b.value(), t.a.value());
        R = Scalar::real(r);
        ca = Scalar::real(std::cos(f)), sa = Scalar::real(std::sin(f)), cb = 1, sb = 0;
      }
      // Doubling with f_1 = f_2 = f/2 drops psi_a; only worth it when f/2 stays exact
      // (f = pi) or f was inexact anyway. For f = +-pi/2 keep f_1 = f, f_2 = 0.
      if (m == l && sa.is_zero() && ca.value() < 0) {
        ca = cb = 0, sa = sb = 1;
      } else if (m == l && !sa.is_exact()) {
        const double f = std::atan2(sa.value(), ca.value()) / 2;
        ca = cb = Scalar::real(std::cos(f));
        sa = sb = Scalar::real(std::sin(f));
      }
      auto cosine = [&](std::int64_t k, const Scalar& c, const Scalar& s, const Scalar& scale) {
        // scale * cos(kx - f) = scale (c cos kx + s sin kx)
        return same_on_edges(edges, false, k, scale * c) + same_on_edges(edges, true, k, scale * s);
      };
      auto sine = [&](std::int64_t k, const Scalar& c, const Scalar& s, const Scalar& scale) {
        // scale * sin(kx - f) = scale (c sin kx - s cos kx)
        return same_on_edges(edges, true, k, scale * c) + same_on_edges(edges, false, k, -(scale * s));
      };
      const Scalar im(Rational(1, m)), il(Rational(1, l));
      const TrigExpression psi_a = sine(m, ca, sa, im) - sine(l, cb, sb, il);
      const TrigExpression psi_b = -(cosine(m, ca, sa, im) + cosine(l, cb, sb, il));
      const Scalar half_r = Scalar(Rational(1, 2)) * R;
      for (const auto* psi : {&psi_a, &psi_b}) {
        if (psi->is_zero() || (!psi->is_exact() && psi->sup_norm_bound() < 1e-14)) continue;
        terms.push_back({half_r, (*this)(*psi).root(), (*this)(-*psi).root()});
      }
      constant += R;
    }
    TrigExpression base_value = low + TrigExpression::constant(edges, constant);
    Cert base = make_combo(*gens, decompose_in_generators(base_value, *gens));
    Cert root = terms.empty() ? base : make_cone_sum(base, std::move(terms));
    if (!close(root->value, p)) throw Error(ErrorCode::NotInGeneratorSpan, "synthesized certificate misses the target");
    return SaturationCertificate(gens, root);
  }
};

}  // namespace

SaturationCertificate synthesize_certificate(const TrigExpression& p, std::shared_ptr<const GeneratorSet> gens) {
  Synthesizer s{gens, harmonic_reach(*gens), gens->domain->edges().size()};
  return s(p);
}

PhaseApproximation approximate_phase(const RealFunction& theta, const std::vector<char>& mask,
                                     std::shared_ptr<const GeneratorSet> gens, int depth) {
  if (depth < 0) throw Error(ErrorCode::InvalidArgument, "depth must be non-negative");
  auto grid = theta.grid_ptr();
  if (mask.size() != theta.size()) throw Error(ErrorCode::InvalidArgument, "mask length differs from the grid");
  const std::size_t edges = gens->domain->edges().size();
  std::vector<TrigExpression> fns;
  for (const auto& q : gens->q)
    if (stabilizes_domain(q, *gens->domain)) fns.push_back(q);
  const int reach = harmonic_reach(*gens);
  const long top = static_cast<long>(reach) << depth;
  for (long n = reach + 1; reach > 0 && n <= top; ++n)
    for (bool sn : {false, true}) {
      auto h = same_on_edges(edges, sn, static_cast<std::int64_t>(n), 1);
      if (stabilizes_domain(h, *gens->domain)) fns.push_back(h);
    }
  std::vector<double> w = grid->weights();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!mask[i]) w[i] = 0.0;
  std::vector<std::vector<double>> cols;
  for (const auto& f : fns) cols.push_back(evaluate(f, grid).data());
  const auto x = least_squares(cols, w, theta.data());
  TrigExpression p(edges);
  for (std::size_t j = 0; j < fns.size(); ++j)
    if (x[j] != 0.0) p += Scalar::real(x[j]) * fns[j];
  PhaseApproximation out{p, synthesize_certificate(p, gens), 0.0};
  const auto pv = evaluate(p, grid);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * (theta[i] - pv[i]) * (theta[i] - pv[i]);
    den += w[i] * theta[i] * theta[i];
  }
  out.l2_residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return out;
}

PhaseReport run_phase_experiment(const PropagatorContext& ctx, const WaveFunction& psi0, const RealFunction& phi,
                                 const SaturationCertificate& cert, const SynthesisParams& params,
                                 const PulseOptions& opts) {
  PhaseReport r;
  const auto sched = compile(cert, params);
  const auto Q = sample_generators(cert.generators(), ctx.grid);
  const auto out = run_schedule(ctx, psi0, sched, Q, opts);
  r.error = l2_distance(out, apply_phase(psi0, phi));
  r.T = sched.total_duration();
  r.segments = sched.segments().size();
  const auto cv = evaluate(cert.value(), ctx.grid);
  double num = 0.0, den = 0.0;
  const auto& w = ctx.grid->weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * (cv[i] - phi[i]) * (cv[i] - phi[i]);
    den += w[i] * phi[i] * phi[i];
  }
  r.cert_residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return r;
}

TransitionReport run_transition_experiment(const PropagatorContext& ctx, const WaveFunction& source,
                                           const WaveFunction& dest, std::shared_ptr<const GeneratorSet> gens,
                                           int phase_approx_depth, const SynthesisParams& params,
                                           const PulseOptions& opts, double modulus_tol) {
  const auto m = shares_modulus(source, dest, modulus_tol, "source", "dest");
  if (m.verdict != Verdict::Shares)
    throw Error(ErrorCode::ModulusMismatch,
                "source and destination moduli differ by " + std::to_string(m.deviation));
  RealFunction theta(ctx.grid, 0.0);
  std::vector<char> mask(source.size(), 0);
  for (std::size_t i = 0; i < source.size(); ++i)
    if (std::abs(source[i]) > 1e-6) {
      mask[i] = 1;
      theta[i] = std::arg(dest[i] / source[i]);
    }
  const auto approx = approximate_phase(theta, mask, gens, phase_approx_depth);
  const auto ideal = apply_phase(source, evaluate(approx.phase, ctx.grid));

  TransitionReport r;
  r.theta_l2_residual = approx.l2_residual;
  r.phase_fidelity = std::abs(inner_product(ideal, dest));
  r.phase_residual = std::sqrt(std::max(0.0, 2.0 - 2.0 * r.phase_fidelity));
  r.cert_depth = approx.cert.depth();
  r.schedule = compile(approx.cert, params);
  r.T = r.schedule.total_duration();
  r.segments = r.schedule.segments().size();
  PropagationLog log;
  const auto out = run_schedule(ctx, source, r.schedule, sample_generators(*gens, ctx.grid), opts, &log);
  r.fidelity = std::abs(inner_product(out, dest));
  r.dynamical_error = l2_distance(out, ideal);
  r.splitting_estimate = log.splitting_estimate;
  r.norm_drift = log.norm_drift;
  r.final_samples = out.data();
  return r;
}

GeneratorSet eight_graph_harmonic_generators(int max_freq) {
  GeneratorSet g = eight_graph_generators();
  // Q6 does not stabilize the vertex; the harmonic preset leaves it out.
  g.names.pop_back();
  g.q.pop_back();
  const Rational half(1, 2);
  for (int k = 2; k <= max_freq; ++k) {
    g.names.push_back("phi_e:" + std::to_string(k) + ":1");
    g.q.push_back(TrigExpression::cos_pattern({1, 1}, k));
    g.names.push_back("phi_e:" + std::to_string(k) + ":2");
    g.q.push_back(TrigExpression::sin_on(2, 0, k));
    g.names.push_back("phi_e:" + std::to_string(k) + ":3");
    g.q.push_back(TrigExpression::sin_on(2, 1, k));
  }
  for (int k = 1; k < max_freq; ++k) {
    g.names.push_back("phi_o:" + std::to_string(k));
    g.q.push_back(TrigExpression::sin_pattern({1, -1}, Rational(k) + half));
  }
  return g;
}

WaveFunction eight_eta(std::shared_ptr<const Grid> grid, int k) {
  return WaveFunction::sample(grid, [&](std::size_t, double x) {
    return std::polar(1.0 / std::sqrt(4 * std::numbers::pi), k * x);
  });
}

}  // namespace isoctl
