#include "isoctl/isomod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "isoctl/error.hpp"

namespace isoctl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModulusReport make_report(std::string a, std::string b, double la, double lb, double dev, double tol,
                          std::vector<double> where) {
  ModulusReport r;
  r.first = std::move(a);
  r.second = std::move(b);
  r.lambda_first = la;
  r.lambda_second = lb;
  r.deviation = dev;
  r.tol = tol;
  r.verdict = classify_deviation(dev, tol);
  if (r.verdict == Verdict::Rejects) r.witness = std::move(where);
  return r;
}

void require_real(const std::vector<cplx>& v, const std::string& what) {
  double re = 0.0, im = 0.0;
  for (const auto& z : v) {
    re = std::max(re, std::abs(z.real()));
    im = std::max(im, std::abs(z.imag()));
  }
  if (im > 1e-12 * std::max(1.0, re)) throw Error(ErrorCode::NotReal, what + " has a non-zero imaginary part");
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Shares: return "shares";
    case Verdict::Rejects: return "rejects";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict classify_deviation(double deviation, double tol) {
  if (deviation <= tol) return Verdict::Shares;
  if (deviation > 10.0 * tol) return Verdict::Rejects;
  return Verdict::Inconclusive;
}

ModulusReport shares_modulus(const WaveFunction& f, const WaveFunction& g, double tol, const std::string& name_f,
                             const std::string& name_g) {
  require_same_grid(f.grid(), g.grid());
  const Grid& grid = f.grid();
  double dev = 0.0;
  std::vector<double> where{0.0, 0.0};
  for (std::size_t e = 0; e < grid.edge_count(); ++e)
    for (std::size_t i = 0; i < grid.edge(e).nodes; ++i) {
      const double d = std::abs(std::abs(f.at(e, i)) - std::abs(g.at(e, i)));
      if (d > dev) {
        dev = d;
        where = {static_cast<double>(e), grid.x(e, i)};
      }
    }
  return make_report(name_f, name_g, 0.0, 0.0, dev, tol, where);
}

SampledFunction sample_entry(const CatalogEntry& e, std::shared_ptr<const SampleSet> samples) {
  SampledFunction s;
  s.name = e.tag;
  s.lambda = e.lambda;
  s.values.reserve(samples->points.size());
  for (const auto& p : samples->points) s.values.push_back(e.eval(p));
  s.samples = std::move(samples);
  return s;
}

ModulusReport shares_modulus(const SampledFunction& f, const SampledFunction& g, double tol) {
  if (f.samples != g.samples && (f.samples->points != g.samples->points))
    throw Error(ErrorCode::GridMismatch, "sampled functions live on different point sets");
  double dev = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double d = std::abs(std::abs(f.values[i]) - std::abs(g.values[i]));
    if (d > dev) {
      dev = d;
      at = i;
    }
  }
  return make_report(f.name, g.name, f.lambda, g.lambda, dev, tol, f.samples->points[at]);
}

std::pair<WaveFunction, WaveFunction> eigenspace_isomod_pair(const WaveFunction& f1, const WaveFunction& f2) {
  require_same_grid(f1.grid(), f2.grid());
  require_real(f1.data(), "f1");
  require_real(f2.data(), "f2");
  const double n1 = l2_norm(f1), n2 = l2_norm(f2);
  if (std::abs(inner_product(f1, f2)) > 1e-6 * n1 * n2)
    throw Error(ErrorCode::NotOrthogonal, "eigenfunctions are not orthogonal");
  WaveFunction p(f1.grid_ptr()), m(f1.grid_ptr());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    // Equal weights keep |p| = |m| exactly; each part is scaled to unit norm first.
    const double a = f1[i].real() / n1, b = f2[i].real() / n2;
    p[i] = cplx(a, b) / std::sqrt(2.0);
    m[i] = cplx(a, -b) / std::sqrt(2.0);
  }
  return {p, m};
}

std::pair<SampledFunction, SampledFunction> eigenspace_isomod_pair(const SampledFunction& f1,
                                                                   const SampledFunction& f2) {
  if (f1.samples->points != f2.samples->points)
    throw Error(ErrorCode::GridMismatch, "sampled functions live on different point sets");
  require_real(f1.values, f1.name);
  require_real(f2.values, f2.name);
  const auto& w = f1.samples->weights;
  double n1 = 0.0, n2 = 0.0, ip = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    n1 += w[i] * f1.values[i].real() * f1.values[i].real();
    n2 += w[i] * f2.values[i].real() * f2.values[i].real();
    ip += w[i] * f1.values[i].real() * f2.values[i].real();
  }
  n1 = std::sqrt(n1);
  n2 = std::sqrt(n2);
  if (std::abs(ip) > 1e-6 * n1 * n2) throw Error(ErrorCode::NotOrthogonal, f1.name + " and " + f2.name + " are not orthogonal");
  SampledFunction p = f1, m = f1;
  p.name = f1.name + "+i" + f2.name;
  m.name = f1.name + "-i" + f2.name;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = f1.values[i].real() / n1, b = f2.values[i].real() / n2;
    p.values[i] = cplx(a, b) / std::sqrt(2.0);
    m.values[i] = cplx(a, -b) / std::sqrt(2.0);
  }
  return {p, m};
}

std::vector<ModulusReport> scan_catalog_pairs(const std::vector<CatalogEntry>& entries, const ScanOptions& opts) {
  if (entries.empty()) return {};
  for (const auto& e : entries)
    if (e.family != entries[0].family || e.dim != entries[0].dim)
      throw Error(ErrorCode::InvalidArgument, "scan entries must share one family and dimension");
  auto samples = std::make_shared<const SampleSet>(family_samples(entries[0].family, entries[0].dim));
  std::vector<SampledFunction> base;
  base.reserve(entries.size());
  for (const auto& e : entries) base.push_back(sample_entry(e, samples));

  auto combine = [&](const std::string& name, const std::vector<std::pair<std::size_t, cplx>>& terms) {
    // Entries are orthonormal, so the coefficient norm is the L2 norm.
    double n2 = 0.0;
    for (const auto& [idx, c] : terms) n2 += std::norm(c);
    SampledFunction s;
    s.name = name;
    s.samples = samples;
    s.values.assign(samples->points.size(), 0.0);
    s.lambda = terms.empty() ? 0.0 : base.at(terms.front().first).lambda;
    const double scale = n2 > 0 ? 1.0 / std::sqrt(n2) : 0.0;
    for (const auto& [idx, c] : terms)
      for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += scale * c * base.at(idx).values[i];
    return s;
  };

  // Eigenspaces by eigenvalue.
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return entries[a].lambda < entries[b].lambda; });
  std::vector<std::vector<std::size_t>> spaces;
  for (std::size_t idx : order) {
    const double l = entries[idx].lambda;
    if (!spaces.empty()) {
      const double prev = entries[spaces.back().front()].lambda;
      if (std::abs(l - prev) <= opts.level_gap * std::max(1.0, std::abs(l))) {
        spaces.back().push_back(idx);
        continue;
      }
    }
    spaces.push_back({idx});
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<SampledFunction>> probes(spaces.size());
  std::vector<bool> random_space(spaces.size(), false);
  for (std::size_t s = 0; s < spaces.size(); ++s) {
    if (spaces[s].size() == 1) {
      probes[s].push_back(base[spaces[s][0]]);
      continue;
    }
    random_space[s] = true;
    for (std::size_t c = 0; c < kCombinationsPerSpace; ++c) {
      std::vector<std::pair<std::size_t, cplx>> terms;
      for (std::size_t idx : spaces[s]) terms.emplace_back(idx, cplx(gauss(rng), gauss(rng)));
      probes[s].push_back(combine("level" + std::to_string(s) + "#" + std::to_string(c), terms));
    }
  }
  std::vector<SampledFunction> extra;
  for (const auto& c : opts.extra) extra.push_back(combine(c.name, c.terms));

  struct Task {
    const SampledFunction* a;
    const SampledFunction* b;
    bool random;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = i + 1; j < base.size(); ++j) tasks.push_back({&base[i], &base[j], false});
  for (std::size_t i = 0; i < extra.size(); ++i) {
    for (const auto& b : base) tasks.push_back({&extra[i], &b, false});
    for (std::size_t j = i + 1; j < extra.size(); ++j) tasks.push_back({&extra[i], &extra[j], false});
  }
  for (std::size_t s = 0; s < spaces.size(); ++s)
    for (std::size_t t = s + 1; t < spaces.size(); ++t) {
      if (!random_space[s] && !random_space[t]) continue;  // already an entry pair
      for (const auto& a : probes[s])
        for (const auto& b : probes[t]) tasks.push_back({&a, &b, true});
    }

  std::vector<ModulusReport> out(tasks.size());
  const long n = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) {
    out[k] = shares_modulus(*tasks[k].a, *tasks[k].b, opts.tol);
    if (tasks[k].random) out[k].seed = opts.seed;
  }
  return out;
}

namespace {

CircleExample build_circle(const RealFunction& rho, const RealFunction& rho2, int j) {
  const Grid& g = rho.grid();
  if (!g.periodic()) throw Error(ErrorCode::InvalidArgument, "circle example needs a circle grid");
  if (j < 1) throw Error(ErrorCode::InvalidArgument, "winding number j must be positive");
  for (double v : rho.data())
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveRho, "rho must be strictly positive");
  const std::size_t n = g.size();
  const double h = g.edge(0).h;
  std::vector<double> inv2(n);
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inv2[i] = 1.0 / (rho[i] * rho[i]);
    integral += inv2[i] * h;
  }
  CircleExample ex;
  ex.C = kTwoPi / integral;
  const double cj = ex.C * j;
  ex.theta = RealFunction(rho.grid_ptr());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += cj * h * 0.5 * (inv2[i] + inv2[i + 1]);
    ex.theta[i + 1] = acc;
  }
  ex.winding = acc + cj * h * 0.5 * (inv2[n - 1] + inv2[0]);
  ex.V = RealFunction(rho.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) ex.V[i] = rho2[i] / rho[i] - cj * cj * inv2[i] * inv2[i];
  ex.phi_plus = WaveFunction(rho.grid_ptr());
  ex.phi_minus = WaveFunction(rho.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) {
    ex.phi_plus[i] = std::polar(rho[i], ex.theta[i]);
    ex.phi_minus[i] = std::polar(rho[i], -ex.theta[i]);
  }
  ex.phi_plus = normalized(ex.phi_plus);
  ex.phi_minus = normalized(ex.phi_minus);
  return ex;
}

}  // namespace

CircleExample construct_circle_example(const TrigExpression& rho, int j, std::shared_ptr<const Grid> grid) {
  auto r = evaluate(rho, grid);
  auto r2 = evaluate(trig_derivative(trig_derivative(rho)), grid);
  return build_circle(r, r2, j);
}

CircleExample construct_circle_example(const RealFunction& rho, int j) {
  const Grid& g = rho.grid();
  if (!g.periodic()) throw Error(ErrorCode::InvalidArgument, "circle example needs a circle grid");
  const std::size_t n = g.size();
  const double h = g.edge(0).h;
  RealFunction r2(rho.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) {
    auto at = [&](long k) { return rho[static_cast<std::size_t>((static_cast<long>(i) + k + 2 * static_cast<long>(n)) % static_cast<long>(n))]; };
    r2[i] = (-at(-2) + 16 * at(-1) - 30 * at(0) + 16 * at(1) - at(2)) / (12 * h * h);
  }
  return build_circle(rho, r2, j);
}

ThetaStructure verify_theta_structure(const WaveFunction& phi) {
  const Grid& g = phi.grid();
  const double top = sup_norm(phi);
  for (const auto& v : phi.data())
    if (std::abs(v) <= 1e-3 * top) throw Error(ErrorCode::ModulusVanishes, "modulus vanishes on the tested region");
  ThetaStructure out;
  out.theta_prime = RealFunction(phi.grid_ptr());
  std::vector<double> products;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const std::size_t n = g.edge(e).nodes;
    const double h = g.edge(e).h;
    auto step = [&](std::size_t a, std::size_t b) {
      const double s = std::arg(phi.at(e, b) / phi.at(e, a));
      if (std::abs(s) > std::numbers::pi / 2)
        throw Error(ErrorCode::GridTooCoarse, "phase step exceeds pi/2; refine the grid");
      return s;
    };
    const std::size_t lo = g.periodic() ? 0 : 1;
    const std::size_t hi = g.periodic() ? n : n - 1;
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
      const double d = (step(im, i) + step(i, ip)) / (2.0 * h);
      out.theta_prime.at(e, i) = d;
      products.push_back(d * std::norm(phi.at(e, i)));
    }
  }
  if (products.empty()) throw Error(ErrorCode::GridTooCoarse, "no interior nodes to estimate theta'");
  double mean = 0.0;
  for (double p : products) mean += p;
  mean /= static_cast<double>(products.size());
  double dev = 0.0;
  for (double p : products) dev = std::max(dev, std::abs(p - mean));
  out.C_est = mean;
  out.deviation = dev;
  return out;
}

}  // namespace isoctl
