#include "isoctl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "isoctl/error.hpp"
#include "isoctl/isomod.hpp"
#include "json.hpp"

namespace isoctl {

namespace {

using ojson = nlohmann::ordered_json;

// 1-based line of the first occurrence of "key" in text; 0 when absent.
std::size_t line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

struct Reader {
  const std::string& text;

  [[noreturn]] void fail(const std::string& key, const std::string& msg, ErrorCode code = ErrorCode::ParseError) const {
    const auto line = line_of(text, key);
    throw Error(code, (line ? "line " + std::to_string(line) + ": " : std::string()) + key + ": " + msg);
  }

  void only(const ojson& obj, const std::set<std::string>& allowed, const std::string& where) const {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) fail(k, "unknown key in " + where);
  }

  std::string str(const ojson& obj, const std::string& key) const {
    if (!obj.contains(key)) fail(key, "missing");
    if (!obj[key].is_string()) fail(key, "expected a string");
    return obj[key].get<std::string>();
  }

  template <class T>
  void opt(const ojson& obj, const std::string& key, std::optional<T>& out) const {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>)
        if (v.is_number_integer() && !v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    } else {
      if (!v.is_number()) fail(key, "expected a number");
    }
    out = v.get<T>();
  }
};

template <class T>
void put(ojson& o, const char* key, const std::optional<T>& v) {
  if (v) o[key] = *v;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Reader r{text};
  r.only(j, {"name", "domain", "bc", "potential", "generators", "experiment", "outputs", "seed"}, "scenario");
  Scenario s;
  s.name = r.str(j, "name");
  s.domain = r.str(j, "domain");
  r.opt(j, "bc", s.bc);
  if (j.contains("potential")) s.potential = r.str(j, "potential");
  if (!j.contains("generators")) r.fail("generators", "missing");
  if (j["generators"].is_string()) {
    s.generator_set = j["generators"].get<std::string>();
  } else if (j["generators"].is_array()) {
    for (const auto& g : j["generators"]) {
      if (!g.is_string()) r.fail("generators", "entries must be strings");
      s.generator_list.push_back(g.get<std::string>());
    }
    if (s.generator_list.empty()) r.fail("generators", "empty list");
  } else {
    r.fail("generators", "expected a preset name or a list of expressions");
  }
  if (!j.contains("experiment")) r.fail("experiment", "missing");
  const auto& e = j["experiment"];
  r.only(e,
         {"kind", "nodes", "modes", "delta", "gamma", "time", "depth", "symmetrize", "step_tol", "min_fidelity",
          "refine", "source", "dest", "state", "phase"},
         "experiment");
  auto& x = s.experiment;
  x.kind = r.str(e, "kind");
  if (x.kind != "transition" && x.kind != "phase" && x.kind != "evolve" && x.kind != "spectrum")
    r.fail("kind", "unknown experiment kind '" + x.kind + "'");
  r.opt(e, "nodes", x.nodes);
  r.opt(e, "modes", x.modes);
  r.opt(e, "delta", x.delta);
  r.opt(e, "gamma", x.gamma);
  r.opt(e, "time", x.time);
  r.opt(e, "depth", x.depth);
  r.opt(e, "symmetrize", x.symmetrize);
  r.opt(e, "step_tol", x.step_tol);
  r.opt(e, "min_fidelity", x.min_fidelity);
  r.opt(e, "refine", x.refine);
  r.opt(e, "source", x.source);
  r.opt(e, "dest", x.dest);
  r.opt(e, "state", x.state);
  r.opt(e, "phase", x.phase);
  for (const auto& [key, v] : {std::pair{"delta", x.delta}, {"gamma", x.gamma}, {"step_tol", x.step_tol}})
    if (v && !(*v > 0.0)) r.fail(key, "must be positive");
  if (x.nodes && *x.nodes < 4) r.fail("nodes", "at least 4 nodes per edge");
  if (x.depth && *x.depth < 0) r.fail("depth", "must be non-negative");
  if (x.kind == "transition" && (!x.source || !x.dest)) r.fail("kind", "a transition needs source and dest");
  if (x.kind == "phase" && !x.phase) r.fail("kind", "a phase experiment needs phase");
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    r.only(o, {"report", "data"}, "outputs");
    r.opt(o, "report", s.report);
    r.opt(o, "data", s.data);
  }
  if (j.contains("seed")) {
    std::optional<std::uint64_t> seed;
    r.opt(j, "seed", seed);
    s.seed = *seed;
  }

  // Semantic checks: these throw their own codes with the key's line attached.
  auto relabel = [&](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const Error& err) {
      std::string msg = err.what();
      const std::string prefix = std::string(error_name(err.code())) + ": ";
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      r.fail(key, msg, err.code());
    }
  };
  relabel(s.bc ? "bc" : "domain", [&] { scenario_domain(s); });
  relabel("generators", [&] { resolve_generators(s); });
  relabel("potential", [&] {
    if (s.potential.rfind("isomod-circle:", 0) != 0)
      TrigExpression::parse(s.potential, scenario_domain(s).edges().size());
  });
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string emit_scenario(const Scenario& s) {
  ojson j;
  j["name"] = s.name;
  j["domain"] = s.domain;
  put(j, "bc", s.bc);
  j["potential"] = s.potential;
  if (s.generator_list.empty()) j["generators"] = s.generator_set;
  else j["generators"] = s.generator_list;
  ojson e;
  const auto& x = s.experiment;
  e["kind"] = x.kind;
  put(e, "nodes", x.nodes);
  put(e, "modes", x.modes);
  put(e, "delta", x.delta);
  put(e, "gamma", x.gamma);
  put(e, "time", x.time);
  put(e, "depth", x.depth);
  put(e, "symmetrize", x.symmetrize);
  put(e, "step_tol", x.step_tol);
  put(e, "min_fidelity", x.min_fidelity);
  put(e, "refine", x.refine);
  put(e, "source", x.source);
  put(e, "dest", x.dest);
  put(e, "state", x.state);
  put(e, "phase", x.phase);
  j["experiment"] = e;
  if (s.report || s.data) {
    ojson o = ojson::object();
    put(o, "report", s.report);
    put(o, "data", s.data);
    j["outputs"] = o;
  }
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string scenario_hash(const Scenario& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(emit_scenario(s))));
  return buf;
}

std::string artifact_header(const Scenario& s) {
  return std::string("isoctl ") + kVersion + " scenario=" + scenario_hash(s) + " seed=" + std::to_string(s.seed);
}

MetricDomain scenario_domain(const Scenario& s) {
  if (!s.bc) return parse_domain(s.domain);
  if (s.domain.rfind("interval:", 0) != 0) throw Error(ErrorCode::UnknownDomain, "bc applies to intervals only");
  return parse_domain(s.domain + ":" + *s.bc);
}

GeneratorSet resolve_generators(const Scenario& s) {
  auto domain = std::make_shared<const MetricDomain>(scenario_domain(s));
  if (!s.generator_list.empty()) {
    GeneratorSet g;
    g.domain = domain;
    g.domain_spec = s.domain;
    for (std::size_t i = 0; i < s.generator_list.size(); ++i) {
      g.names.push_back("Q" + std::to_string(i + 1));
      g.q.push_back(TrigExpression::parse(s.generator_list[i], domain->edges().size()));
    }
    return g;
  }
  const auto& name = s.generator_set;
  auto number_after = [&](const std::string& prefix) -> int {
    try {
      std::size_t used = 0;
      const int v = std::stoi(name.substr(prefix.size()), &used);
      if (used == name.size() - prefix.size() && v >= 1 && v <= 64) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::UnknownGenerator, "bad frequency in '" + name + "'");
  };
  GeneratorSet g;
  if (name == "eight") {
    g = eight_graph_generators();
  } else if (name.rfind("eight-harmonic:", 0) == 0) {
    g = eight_graph_harmonic_generators(number_after("eight-harmonic:"));
  } else if (name.rfind("circle:", 0) == 0) {
    g = circle_generators(number_after("circle:"));
  } else {
    throw Error(ErrorCode::UnknownGenerator, "unknown generator preset '" + name + "'");
  }
  if (g.domain->edges().size() != domain->edges().size() ||
      std::abs(g.domain->total_length() - domain->total_length()) > 1e-12)
    throw Error(ErrorCode::UnknownGenerator, "preset '" + name + "' lives on a different domain");
  return g;
}

std::optional<RealFunction> scenario_potential(const Scenario& s, std::shared_ptr<const Grid> grid) {
  const std::string& p = s.potential;
  if (p.rfind("isomod-circle:", 0) == 0) {
    if (!grid->domain().is_circle()) throw Error(ErrorCode::UnknownDomain, "isomod-circle needs a circle");
    int j = 1;
    std::string rho = "cos(x) + 2";
    std::stringstream ss(p.substr(14));
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (item.rfind("j=", 0) == 0) j = std::stoi(item.substr(2));
      else if (item.rfind("rho=", 0) == 0) rho = item.substr(4);
      else throw Error(ErrorCode::ParseError, "unknown potential option '" + item + "'");
    }
    return construct_circle_example(TrigExpression::parse(rho, 1), j, grid).V;
  }
  const auto expr = TrigExpression::parse(p, grid->edge_count());
  if (expr.is_zero()) return std::nullopt;
  return evaluate(expr, grid);
}

WaveFunction state_from_spec(const std::string& spec, const PropagatorContext& ctx) {
  const auto& grid = ctx.grid;
  const double norm = 1.0 / std::sqrt(grid->domain().total_length());
  auto arg = [&](const std::string& prefix) {
    try {
      return std::stoi(spec.substr(prefix.size()));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad state '" + spec + "'");
    }
  };
  if (spec == "const") return WaveFunction(grid, cplx(norm));
  if (spec.rfind("plane:", 0) == 0) {
    const int k = arg("plane:");
    return WaveFunction::sample(grid, [&](std::size_t, double x) { return std::polar(norm, k * x); });
  }
  if (spec.rfind("mode:", 0) == 0) {
    const int i = arg("mode:");
    if (i < 0 || static_cast<std::size_t>(i) >= ctx.n_modes())
      throw Error(ErrorCode::InvalidArgument, "mode index out of range in '" + spec + "'");
    WaveFunction f(grid);
    for (std::size_t s = 0; s < grid->size(); ++s) f[s] = ctx.basis[s * ctx.n_modes() + static_cast<std::size_t>(i)];
    return f;
  }
  throw Error(ErrorCode::ParseError, "unknown state '" + spec + "'");
}

ScenarioRun prepare_run(const Scenario& s) {
  auto domain = scenario_domain(s);
  auto grid = discretize_nodes(domain, s.experiment.nodes.value_or(512));
  const auto V = scenario_potential(s, grid);
  ScenarioRun run{default_context(grid, V ? &*V : nullptr, s.experiment.modes.value_or(0)),
                  std::make_shared<const GeneratorSet>(resolve_generators(s)),
                  {},
                  {}};
  const auto& x = s.experiment;
  if (x.delta) run.params.delta = *x.delta;
  if (x.gamma) run.params.gamma = *x.gamma;
  run.params.symmetrize = x.symmetrize.value_or(false);
  if (x.step_tol) {
    run.opts.policy = StepPolicy::Adaptive;
    run.opts.tol = *x.step_tol;
  }
  return run;
}

TransitionResult run_transition_scenario(const Scenario& s) {
  const auto& x = s.experiment;
  if (x.kind != "transition") throw Error(ErrorCode::InvalidArgument, "scenario is not a transition");
  auto run = prepare_run(s);
  const auto src = state_from_spec(*x.source, run.ctx);
  const auto dst = state_from_spec(*x.dest, run.ctx);
  const int depth = x.depth.value_or(1);
  TransitionResult out{run_transition_experiment(run.ctx, src, dst, run.gens, depth, run.params, run.opts), {}};
  if (x.refine.value_or(false)) {
    auto finer = run.params;
    finer.delta *= 0.5;
    finer.gamma *= 0.5;
    out.refined = run_transition_experiment(run.ctx, src, dst, run.gens, depth, finer, run.opts);
  }
  return out;
}

Scenario default_demo_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  auto& x = s.experiment;
  x.kind = "transition";
  x.nodes = 512;
  // delta well below gamma: a conjugating pulse carries amplitude sqrt(alpha/gamma)
  // and its kinetic error grows like delta * alpha / gamma.
  x.delta = 1e-5;
  x.gamma = 1e-3;
  x.depth = 1;
  x.symmetrize = true;
  x.step_tol = 1e-6;
  x.refine = true;
  x.source = "plane:1";
  if (name == "demo-torus") {
    s.domain = "circle:2pi";
    s.generator_set = "circle:8";
    x.dest = "plane:-1";
    x.min_fidelity = 0.9;
  } else if (name == "demo-eight") {
    s.domain = "eight";
    s.generator_set = "eight-harmonic:4";
    x.dest = "plane:2";
    x.min_fidelity = 0.85;
  } else {
    throw Error(ErrorCode::InvalidArgument, "no built-in scenario '" + name + "'");
  }
  s.report = name + ".json";
  s.data = name + ".csv";
  return s;
}

}  // namespace isoctl
