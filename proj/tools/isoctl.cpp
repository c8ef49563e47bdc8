#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "isoctl/catalog.hpp"
#include "isoctl/error.hpp"
#include "isoctl/isomod.hpp"
#include "isoctl/scenario.hpp"
#include "isoctl/specfun.hpp"
#include "isoctl/spectral.hpp"
#include "json.hpp"

using namespace isoctl;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Raised when a run finishes but breaks a monitored invariant.
struct InvariantBreach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g_command_line;

// Flag-driven commands hash their own command line as the scenario.
Scenario flag_scenario() {
  Scenario s;
  s.name = g_command_line;
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Writes to path, or stdout when path is empty or "-".
void write_artifact(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << body;
}

std::string json_artifact(const Scenario& s, ojson body) {
  ojson j;
  j["header"] = artifact_header(s);
  for (auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

std::string csv_header(const Scenario& s) { return "# " + artifact_header(s) + "\n"; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ojson transition_json(const TransitionReport& r) {
  ojson j;
  j["fidelity"] = r.fidelity;
  j["T"] = r.T;
  j["segments"] = r.segments;
  j["cert_depth"] = r.cert_depth;
  j["residuals"] = {{"phase_fidelity", r.phase_fidelity},
                    {"phase_residual", r.phase_residual},
                    {"theta_l2_residual", r.theta_l2_residual},
                    {"dynamical_error", r.dynamical_error},
                    {"splitting_estimate", r.splitting_estimate},
                    {"norm_drift", r.norm_drift}};
  return j;
}

// ---- spectrum

struct SpectrumRow {
  double lambda;
  std::string exact;
  std::size_t cluster;
  std::size_t multiplicity;  // size of the whole cluster, which may extend past the requested modes
};

std::vector<SpectrumRow> analytic_rows(const MetricDomain& d, std::size_t modes) {
  // Grow the window until the requested modes and the cluster of the last one are complete.
  for (double lmax = 4.0;; lmax *= 2.0) {
    auto spec = graph_spectrum_analytic(d, lmax, false);
    const auto& m = spec.modes;
    if (m.size() > modes && m.back().cluster != m[modes - 1].cluster) {
      std::vector<SpectrumRow> rows;
      for (std::size_t i = 0; i < modes; ++i) {
        std::size_t mult = 0;
        for (const auto& o : m) mult += o.cluster == m[i].cluster;
        rows.push_back({m[i].lambda, m[i].exact_omega ? (*m[i].exact_omega * *m[i].exact_omega).to_string() : "",
                        m[i].cluster, mult});
      }
      return rows;
    }
    if (lmax > 1e6) throw Error(ErrorCode::ConvergenceFailure, "analytic spectrum window did not close");
  }
}

int cmd_spectrum(const std::string& domain_spec, const std::string& potential, std::size_t modes, bool numeric,
                 std::size_t nodes, const std::string& out) {
  if (modes == 0) throw Error(ErrorCode::InvalidArgument, "--modes must be positive");
  const auto d = parse_domain(domain_spec);
  std::vector<SpectrumRow> rows;
  const bool zero_potential = TrigExpression::parse(potential, d.edges().size()).is_zero();
  if (!numeric && zero_potential && d.is_graph()) {
    rows = analytic_rows(d, modes);
  } else {
    auto grid = discretize_nodes(d, nodes);
    const auto V = evaluate(TrigExpression::parse(potential, d.edges().size()), grid);
    // One extra mode so the last cluster is judged against its successor.
    std::vector<EigenPair> pairs = d.is_circle() ? circle_spectrum(V, modes + 1)
                                                 : graph_spectrum_numeric(grid, zero_potential ? nullptr : &V, modes + 1);
    assign_clusters(pairs);
    for (std::size_t i = 0; i < modes && i < pairs.size(); ++i) {
      std::size_t mult = 0;
      for (const auto& o : pairs) mult += o.cluster == pairs[i].cluster;
      rows.push_back({pairs[i].lambda, "", pairs[i].cluster, mult});
    }
  }
  std::map<std::size_t, std::size_t> mult;
  for (const auto& r : rows) mult[r.cluster] = r.multiplicity;
  std::string pattern;
  for (const auto& [c, n] : mult) pattern += (pattern.empty() ? "" : ",") + std::to_string(n);
  std::ostringstream os;
  os << csv_header(flag_scenario()) << "# multiplicities " << pattern << "\n";
  os << "index,lambda,exact,cluster,multiplicity\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    os << i << "," << fmt(rows[i].lambda) << "," << rows[i].exact << "," << rows[i].cluster << ","
       << rows[i].multiplicity << "\n";
  write_artifact(out, os.str());
  return 0;
}

// ---- catalog and isomod

int cmd_catalog(const std::string& family, const std::string& params, int list_level, int dim,
                const std::string& out) {
  const Family f = parse_family(family);
  if (list_level >= 0) {
    std::ostringstream os;
    os << csv_header(flag_scenario()) << "tag,lambda\n";
    for (const auto& e : family_basis(f, list_level, dim)) os << e.tag << "," << fmt(e.lambda) << "\n";
    write_artifact(out, os.str());
    return 0;
  }
  const auto e = make_entry(f, parse_params(params));
  ojson j;
  j["family"] = family_name(e.family);
  j["tag"] = e.tag;
  j["lambda"] = e.lambda;
  j["norm"] = entry_norm(e);
  j["residual"] = entry_residual(e);
  if (e.expr) {
    j["expression"] = e.expr->to_string();
    j["norm_constant"] = e.norm_constant;
  }
  write_artifact(out, json_artifact(flag_scenario(), j));
  return 0;
}

int cmd_isomod(const std::string& family, int level, int dim, double tol, std::uint64_t seed, bool circle,
               const std::string& rho, int jw, std::size_t nodes, const std::string& out, const std::string& report) {
  if (circle) {
    auto grid = discretize_nodes(MetricDomain::circle(Length::pi_multiple(2)), nodes);
    const auto ex = construct_circle_example(TrigExpression::parse(rho, 1), jw, grid);
    const auto share = shares_modulus(ex.phi_plus, ex.phi_minus, tol, "phi+", "phi-");
    ojson j;
    j["rho"] = rho;
    j["j"] = jw;
    j["C"] = ex.C;
    j["winding"] = ex.winding;
    j["residual_plus"] = eigen_residual(ex.phi_plus, &ex.V, 0.0);
    j["residual_minus"] = eigen_residual(ex.phi_minus, &ex.V, 0.0);
    j["modulus_deviation"] = share.deviation;
    j["verdict"] = verdict_name(share.verdict);
    Scenario s = flag_scenario();
    write_artifact(out, json_artifact(s, j));
    return 0;
  }
  ScanOptions opts;
  opts.tol = tol;
  opts.seed = seed;
  const auto reports = scan_catalog_pairs(family_basis(parse_family(family), level, dim), opts);
  Scenario s = flag_scenario();
  s.seed = seed;
  std::ostringstream os;
  std::map<std::string, int> counts;
  for (const auto& r : reports) ++counts[verdict_name(r.verdict)];
  os << csv_header(s) << "#";
  for (const auto& [k, v] : counts) os << " " << k << "=" << v;
  os << "\nfirst,second,lambda_first,lambda_second,deviation,verdict\n";
  for (const auto& r : reports)
    os << r.first << "," << r.second << "," << fmt(r.lambda_first) << "," << fmt(r.lambda_second) << ","
       << fmt(r.deviation) << "," << verdict_name(r.verdict) << "\n";
  write_artifact(out, os.str());
  if (!report.empty()) {
    ojson list = ojson::array();
    for (const auto& r : reports) {
      ojson e;
      e["first"] = r.first;
      e["second"] = r.second;
      e["lambda_first"] = r.lambda_first;
      e["lambda_second"] = r.lambda_second;
      e["deviation"] = r.deviation;
      e["tol"] = r.tol;
      e["verdict"] = verdict_name(r.verdict);
      if (r.witness) e["witness"] = *r.witness;
      if (r.seed) e["seed"] = *r.seed;
      list.push_back(std::move(e));
    }
    ojson j;
    j["family"] = family;
    j["level"] = level;
    j["reports"] = std::move(list);
    write_artifact(report, json_artifact(s, j));
  }
  return 0;
}

// ---- saturation

int cmd_saturate(const std::string& target, int k_max, int circle_freq, bool circle_sin, const std::string& validate,
                 const std::string& out) {
  if (!validate.empty()) {
    std::ifstream in(validate, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read " + validate);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto cert = certificate_from_json(buf.str());
    const auto v = cert_validate(cert, cert.generators().domain ? *cert.generators().domain : eight_graph());
    if (!v.ok) {
      std::cerr << "invalid certificate at " << v.node << ": " << v.reason << "\n";
      return kExitValidation;
    }
    std::cout << "valid depth=" << cert.depth() << " value=" << cert.value().to_string() << "\n";
    return 0;
  }
  SaturationCertificate cert;
  if (circle_freq > 0) {
    auto gens = std::make_shared<const GeneratorSet>(circle_generators(1));
    const bool neg = target.size() && target[0] == '-';
    cert = derive_circle_harmonic(circle_freq, circle_sin, neg ? -1 : 1, gens);
  } else {
    cert = derive_eight_graph(parse_eight_target(target), k_max);
  }
  auto j = ojson::parse(certificate_to_json(cert));
  ojson wrapped;
  wrapped["header"] = artifact_header(flag_scenario());
  for (auto& [k, v] : j.items()) wrapped[k] = v;
  write_artifact(out, wrapped.dump(2) + "\n");
  return 0;
}

// ---- evolution and synthesis

int cmd_evolve(const Scenario& s, const std::string& out) {
  auto run = prepare_run(s);
  const auto psi = state_from_spec(s.experiment.state.value_or("const"), run.ctx);
  const double t = s.experiment.time.value_or(1.0);
  PropagationLog log;
  const auto res = evolve_free(run.ctx, psi, t, &log);
  std::ostringstream os;
  os << csv_header(s) << "# norm_drift " << fmt(log.norm_drift) << " worst_capture " << fmt(log.worst_capture)
     << "\n";
  write_csv(os, res);
  write_artifact(out, os.str());
  if (log.norm_drift > 1e-8 * std::max(1.0, t)) throw InvariantBreach("norm drift " + fmt(log.norm_drift));
  return 0;
}

// Replays a schedule segment by segment; one row per segment end.
int cmd_replay(Scenario s, const std::string& schedule_path, const std::vector<std::string>& targets,
               const std::string& out) {
  const auto file = schedule_from_json(read_text(schedule_path));
  s.domain = file.gens->domain_spec;
  auto run = prepare_run(s);
  const auto Q = sample_generators(*file.gens, run.ctx.grid);
  auto psi = state_from_spec(s.experiment.state.value_or("const"), run.ctx);
  std::vector<WaveFunction> dest;
  for (const auto& t : targets) dest.push_back(state_from_spec(t, run.ctx));
  std::ostringstream os;
  os << csv_header(s) << "segment,time,norm";
  for (const auto& t : targets) os << ",fidelity_" << t;
  os << "\n";
  PropagationLog log;
  double t = 0.0;
  auto row = [&](long seg) {
    os << seg << "," << fmt(t) << "," << fmt(l2_norm(psi));
    for (const auto& d : dest) os << "," << fmt(std::abs(inner_product(psi, d)));
    os << "\n";
  };
  row(-1);
  for (std::size_t i = 0; i < file.schedule.segments().size(); ++i) {
    ControlSchedule one(file.schedule.controls());
    one.push(file.schedule.segments()[i]);
    psi = run_schedule(run.ctx, psi, one, Q, run.opts, &log);
    t += one.total_duration();
    row(static_cast<long>(i));
  }
  write_artifact(out, os.str());
  if (log.norm_drift > 1e-8 * std::max(1.0, t)) throw InvariantBreach("norm drift " + fmt(log.norm_drift));
  return 0;
}

int cmd_synthesize(const Scenario& s, const std::string& out, const std::string& schedule_out) {
  auto run = prepare_run(s);
  const auto& x = s.experiment;
  const auto phase = TrigExpression::parse(*x.phase, run.ctx.grid->edge_count());
  const auto psi = state_from_spec(x.state.value_or("const"), run.ctx);
  const auto cert = synthesize_certificate(phase, run.gens);
  const auto rep = run_phase_experiment(run.ctx, psi, evaluate(phase, run.ctx.grid), cert, run.params, run.opts);
  ojson j;
  j["phase"] = phase.to_string();
  j["cert_depth"] = cert.depth();
  j["error"] = rep.error;
  j["T"] = rep.T;
  j["segments"] = rep.segments;
  j["cert_residual"] = rep.cert_residual;
  write_artifact(out, json_artifact(s, j));
  if (!schedule_out.empty()) {
    const auto sched = compile(cert, run.params);
    if (!schedule_out.ends_with(".csv")) {
      write_artifact(schedule_out, json_artifact(s, ojson::parse(schedule_to_json(sched, *run.gens))));
      return 0;
    }
    std::ostringstream os;
    os << csv_header(s) << "start,duration";
    for (const auto& n : run.gens->names) os << ",u_" << n;
    os << "\n";
    double t0 = 0.0;
    for (const auto& seg : sched.segments()) {
      os << fmt(t0) << "," << fmt(seg.duration);
      for (double u : seg.u) os << "," << fmt(u);
      os << "\n";
      t0 += seg.duration;
    }
    write_artifact(schedule_out, os.str());
  }
  return 0;
}

int cmd_demo(const std::string& name, const std::string& scenario_path, const std::string& report_flag,
             const std::string& data_flag) {
  const Scenario s = scenario_path.empty() ? default_demo_scenario(name) : parse_scenario(scenario_path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_transition_scenario(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ojson j;
  j["scenario"] = s.name;
  j["domain"] = s.domain;
  j["generators"] = s.generator_set.empty() ? std::to_string(s.generator_list.size()) + " expressions" : s.generator_set;
  j["source"] = *s.experiment.source;
  j["dest"] = *s.experiment.dest;
  j["delta"] = s.experiment.delta.value_or(SynthesisParams{}.delta);
  j["gamma"] = s.experiment.gamma.value_or(SynthesisParams{}.gamma);
  const ojson base = transition_json(res.base);
  for (const auto& [k, v] : base.items()) j[k] = v;
  if (res.refined) j["refined"] = transition_json(*res.refined);
  const std::string report = !report_flag.empty() ? report_flag : s.report.value_or("-");
  write_artifact(report, json_artifact(s, j));

  const std::string data = !data_flag.empty() ? data_flag : s.data.value_or("");
  if (!data.empty()) {
    auto run = prepare_run(s);
    const auto dest = state_from_spec(*s.experiment.dest, run.ctx);
    const auto& g = *run.ctx.grid;
    std::ostringstream os;
    os << csv_header(s) << "edge,x,abs_final,arg_final,abs_dest,arg_dest\n";
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      for (std::size_t i = 0; i < g.edge(e).nodes; ++i) {
        const std::size_t k = g.edge(e).offset + i;
        const cplx z = res.base.final_samples[k];
        os << e << "," << fmt(g.x(e, i)) << "," << fmt(std::abs(z)) << "," << fmt(std::arg(z)) << ","
           << fmt(std::abs(dest[k])) << "," << fmt(std::arg(dest[k])) << "\n";
      }
    write_artifact(data, os.str());
  }
  std::cerr << name << ": fidelity " << fmt(res.base.fidelity);
  if (res.refined) std::cerr << " refined " << fmt(res.refined->fidelity);
  std::cerr << " T " << fmt(res.base.T) << " (" << fmt(secs) << " s)\n";

  const double drift_cap = 1e-8 * std::max(1.0, res.base.T);
  if (res.base.norm_drift > drift_cap) throw InvariantBreach("norm drift " + fmt(res.base.norm_drift));
  if (s.experiment.min_fidelity && res.base.fidelity < *s.experiment.min_fidelity)
    throw InvariantBreach("fidelity below " + fmt(*s.experiment.min_fidelity));
  if (res.refined && res.refined->fidelity < res.base.fidelity - 1e-6)
    throw InvariantBreach("refinement lowered the fidelity");
  return 0;
}

// ---- special functions

int cmd_specfun(const std::string& fn, const std::vector<double>& a) {
  auto need = [&](std::size_t n) {
    if (a.size() != n) throw Error(ErrorCode::InvalidArgument, fn + " takes " + std::to_string(n) + " arguments");
  };
  auto i = [&](std::size_t k) { return static_cast<int>(std::lround(a[k])); };
  double v = 0.0;
  if (fn == "bessel_j") need(2), v = bessel_j(i(0), a[1]);
  else if (fn == "bessel_j_prime") need(2), v = bessel_j_prime(i(0), a[1]);
  else if (fn == "bessel_zero") need(2), v = bessel_zero(i(0), i(1));
  else if (fn == "legendre") need(3), v = legendre_p(i(0), i(1), a[2]);
  else if (fn == "hermite") need(2), v = hermite_fn(i(0), a[1]);
  else if (fn == "ylm") {
    need(4);
    const auto z = spherical_harmonic(i(0), i(1), a[2], a[3]);
    std::printf("%.17g %.17g\n", z.real(), z.imag());
    return 0;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown function '" + fn + "'");
  }
  std::printf("%.17g\n", v);
  return 0;
}

int cmd_scenario(const std::string& path, bool check, const std::string& builtin) {
  if (!builtin.empty()) {
    std::cout << emit_scenario(default_demo_scenario(builtin));
    return 0;
  }
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "a scenario path or --default is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto s = parse_scenario_text(buf.str());
  const auto emitted = emit_scenario(s);
  if (check) {
    if (emitted != buf.str() || emit_scenario(parse_scenario_text(emitted)) != emitted) {
      std::cerr << path << ": not in canonical form\n";
      return kExitValidation;
    }
    std::cout << path << ": canonical, scenario=" << scenario_hash(s) << "\n";
    return 0;
  }
  std::cout << emitted;
  return 0;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::TruncationLoss:
    case ErrorCode::StepTooLarge:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::AssemblyAsymmetry:
      return kExitNumerical;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) g_command_line += (i > 1 ? " " : "") + std::string(argv[i]);

  CLI::App app{"isomodulus spectra, saturation certificates and bilinear control experiments", "isoctl"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

  // spectrum
  std::string sp_domain = "eight", sp_potential = "0", sp_out;
  std::size_t sp_modes = 12, sp_nodes = 256;
  bool sp_numeric = false;
  auto* sp = app.add_subcommand("spectrum", "Eigenvalues and multiplicities (CSV)");
  sp->add_option("--domain", sp_domain, "eight, three-branch, circle:L, interval:L[:d|n[:d|n]] or a graph JSON path");
  sp->add_option("--potential", sp_potential, "trig expression for V (numeric path)");
  sp->add_option("--modes", sp_modes, "number of eigenvalues");
  sp->add_flag("--numeric", sp_numeric, "finite differences instead of the secular solver");
  sp->add_option("--nodes", sp_nodes, "nodes per edge for the numeric path");
  sp->add_option("--out", sp_out, "output file (stdout by default)");

  // catalog
  std::string ca_family = "eight", ca_params, ca_out;
  int ca_list = -1, ca_dim = 1;
  auto* ca = app.add_subcommand("catalog", "Closed-form eigenfunctions");
  ca->add_option("--family", ca_family, "torus, sphere, disk, hermite, eight or three-branch");
  ca->add_option("--params", ca_params, "e.g. \"kind=even,k=2,j=1\" or \"n=1,k=2,sign=1\"");
  ca->add_option("--list", ca_list, "list the basis up to this level instead");
  ca->add_option("--dim", ca_dim, "dimension for torus and Hermite");
  ca->add_option("--out", ca_out, "output file");

  // isomod
  std::string im_family = "eight", im_rho = "cos(x) + 2", im_out, im_report;
  int im_level = 2, im_dim = 1, im_j = 1;
  double im_tol = 1e-8;
  std::uint64_t im_seed = 0x5eed;
  std::size_t im_nodes = 8192;
  bool im_circle = false;
  auto* im = app.add_subcommand("isomod", "Modulus-sharing scans and the circle construction");
  im->add_option("--family", im_family, "catalog family to scan");
  im->add_option("--level", im_level, "level bound of the scanned basis");
  im->add_option("--dim", im_dim, "dimension for torus and Hermite");
  im->add_option("--tol", im_tol, "sharing tolerance");
  im->add_option("--seed", im_seed, "seed for random eigenspace combinations");
  im->add_flag("--circle-example", im_circle, "build a potential with two isomodulus zero modes instead");
  im->add_option("--rho", im_rho, "positive modulus for --circle-example");
  im->add_option("--j", im_j, "winding number for --circle-example");
  im->add_option("--nodes", im_nodes, "circle nodes for --circle-example");
  im->add_option("--out", im_out, "output file");
  im->add_option("--report", im_report, "also write every ModulusReport as JSON");

  // saturate
  std::string sa_target = "phi_e:2:1", sa_validate, sa_out, sa_domain;
  int sa_kmax = kEightGraphKMax, sa_circle = 0;
  bool sa_sin = false;
  auto* sa = app.add_subcommand("saturate", "Saturation certificates (JSON)");
  sa->add_option("--target", sa_target, "phi0, phi_o:k or phi_e:k:j, optional leading '-'");
  sa->add_option("--k-max", sa_kmax, "largest eight-graph frequency to derive");
  sa->add_option("--domain", sa_domain, "eight (default), or a circle with --circle");
  sa->add_option("--circle", sa_circle, "derive cos(kx) on the circle from {1, cos x, sin x} instead");
  sa->add_flag("--sin", sa_sin, "with --circle: sin(kx)");
  sa->add_option("--validate", sa_validate, "validate a certificate file instead");
  sa->add_option("--out", sa_out, "output file");

  // evolve
  Scenario ev;
  ev.experiment.kind = "evolve";
  ev.domain = "eight";
  ev.generator_list = {"1"};  // free evolution uses no controls; the constant is valid on every domain
  std::string ev_out, ev_state = "const";
  double ev_time = 1.0;
  std::size_t ev_nodes = 257;
  auto* evc = app.add_subcommand("evolve", "Free evolution e^{-itH0} (CSV)");
  evc->add_option("--domain", ev.domain, "domain spec");
  evc->add_option("--potential", ev.potential, "trig expression for V");
  evc->add_option("--state", ev_state, "const, plane:k or mode:i");
  evc->add_option("--time", ev_time, "evolution time");
  evc->add_option("--nodes", ev_nodes, "nodes per edge");
  evc->add_option("--out", ev_out, "output file");
  std::string ev_scenario, ev_schedule;
  std::vector<std::string> ev_targets;
  evc->add_option("--scenario", ev_scenario, "evolve scenario JSON (overrides the other flags)");
  evc->add_option("--schedule", ev_schedule, "replay a schedule JSON instead; writes the trajectory");
  evc->add_option("--psi0", ev_state, "initial state for --schedule (same as --state)");
  evc->add_option("--target", ev_targets, "state specs whose fidelity the trajectory tracks");
  double ev_tol = 1e-6;
  evc->add_option("--step-tol", ev_tol, "adaptive splitting budget per pulse for --schedule (0: strict substeps)");

  // synthesize
  Scenario sy;
  sy.experiment.kind = "phase";
  sy.domain = "circle:2pi";
  sy.generator_set = "circle:1";
  std::string sy_phase = "cos(2x)", sy_state = "const", sy_out, sy_sched;
  double sy_delta = 1e-5, sy_gamma = 1e-3, sy_tol = 1e-6;
  std::size_t sy_nodes = 512;
  bool sy_sym = false;
  auto* syc = app.add_subcommand("synthesize", "Compile a phase into a pulse schedule and replay it");
  syc->add_option("--domain", sy.domain, "domain spec");
  syc->add_option("--generators", sy.generator_set, "eight, eight-harmonic:F or circle:F");
  syc->add_option("--phase", sy_phase, "target phase (trig expression)");
  syc->add_option("--state", sy_state, "initial state");
  syc->add_option("--delta", sy_delta, "pulse duration");
  syc->add_option("--gamma", sy_gamma, "free flight per conjugation");
  syc->add_option("--step-tol", sy_tol, "adaptive splitting tolerance per pulse");
  syc->add_flag("--symmetrize", sy_sym, "split each conjugation into +psi and -psi halves");
  syc->add_option("--nodes", sy_nodes, "nodes per edge");
  syc->add_option("--out", sy_out, "report file");
  syc->add_option("--schedule", sy_sched, "schedule file: JSON, or CSV when the name ends in .csv");
  std::string sy_scenario;
  syc->add_option("--scenario", sy_scenario, "phase scenario JSON (overrides the other flags)");

  // demos
  std::string de_scenario, de_report, de_data, dt_scenario, dt_report, dt_data;
  auto* de = app.add_subcommand("demo-eight", "Steer (eta_1, eta_1) toward (eta_2, eta_2) on the eight graph");
  de->add_option("--scenario", de_scenario, "scenario JSON (built-in defaults otherwise)");
  de->add_option("--report", de_report, "report JSON path ('-' for stdout)");
  de->add_option("--data", de_data, "final-state CSV path");
  auto* dt = app.add_subcommand("demo-torus", "Steer e^{ix} toward e^{-ix} on the circle");
  dt->add_option("--scenario", dt_scenario, "scenario JSON (built-in defaults otherwise)");
  dt->add_option("--report", dt_report, "report JSON path ('-' for stdout)");
  dt->add_option("--data", dt_data, "final-state CSV path");

  // specfun
  std::string sf_fn;
  std::vector<double> sf_args;
  auto* sf = app.add_subcommand("specfun", "Evaluate a special function");
  sf->add_option("function", sf_fn, "bessel_j n x | bessel_j_prime n x | bessel_zero n k | legendre l m t | "
                                    "hermite k x | ylm l m alpha beta")
      ->required();
  sf->add_option("args", sf_args, "arguments")->required();

  // scenario files
  std::string sc_path;
  bool sc_check = false;
  auto* sc = app.add_subcommand("scenario", "Print a scenario in canonical form");
  std::string sc_default;
  sc->add_option("path", sc_path, "scenario JSON");
  sc->add_flag("--check", sc_check, "exit 2 unless the file is already canonical");
  sc->add_option("--default", sc_default, "print a built-in scenario (demo-eight or demo-torus)");

  if (argc == 1) {
    std::cout << app.help();
    return kExitValidation;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  if (jobs > 0) omp_set_num_threads(jobs);

  try {
    if (*sp) return cmd_spectrum(sp_domain, sp_potential, sp_modes, sp_numeric, sp_nodes, sp_out);
    if (*ca) return cmd_catalog(ca_family, ca_params, ca_list, ca_dim, ca_out);
    if (*im)
      return cmd_isomod(im_family, im_level, im_dim, im_tol, im_seed, im_circle, im_rho, im_j, im_nodes, im_out,
                        im_report);
    if (*sa) {
      if (!sa_domain.empty()) {
        // Only the two built-in derivations exist: the eight graph, and circle harmonics.
        const auto d = parse_domain(sa_domain);
        if (sa_circle > 0 ? !d.is_circle() : sa_domain != "eight")
          throw Error(ErrorCode::UnknownDomain, "no saturation derivation for " + sa_domain);
      }
      return cmd_saturate(sa_target, sa_kmax, sa_circle, sa_sin, sa_validate, sa_out);
    }
    if (*evc) {
      ev.experiment.state = ev_state;
      ev.experiment.time = ev_time;
      ev.experiment.nodes = ev_nodes;
      const Scenario s = ev_scenario.empty() ? parse_scenario_text(emit_scenario(ev)) : parse_scenario(ev_scenario);
      if (s.experiment.kind != "evolve") throw Error(ErrorCode::InvalidArgument, "not an evolve scenario");
      if (!ev_schedule.empty()) {
        Scenario r = s;
        if (ev_tol > 0 && !r.experiment.step_tol) r.experiment.step_tol = ev_tol;
        return cmd_replay(r, ev_schedule, ev_targets, ev_out);
      }
      return cmd_evolve(s, ev_out.empty() ? s.data.value_or("") : ev_out);
    }
    if (*syc) {
      auto& x = sy.experiment;
      x.phase = sy_phase;
      x.state = sy_state;
      x.delta = sy_delta;
      x.gamma = sy_gamma;
      x.step_tol = sy_tol;
      x.symmetrize = sy_sym;
      x.nodes = sy_nodes;
      const Scenario s = sy_scenario.empty() ? parse_scenario_text(emit_scenario(sy)) : parse_scenario(sy_scenario);
      if (s.experiment.kind != "phase") throw Error(ErrorCode::InvalidArgument, "not a phase scenario");
      return cmd_synthesize(s, sy_out.empty() ? s.report.value_or("") : sy_out,
                            sy_sched.empty() ? s.data.value_or("") : sy_sched);
    }
    if (*de) return cmd_demo("demo-eight", de_scenario, de_report, de_data);
    if (*dt) return cmd_demo("demo-torus", dt_scenario, dt_report, dt_data);
    if (*sf) return cmd_specfun(sf_fn, sf_args);
    if (*sc) return cmd_scenario(sc_path, sc_check, sc_default);
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kExitValidation;
}
