#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isoctl/synth.hpp"

namespace isoctl {

inline constexpr const char* kVersion = "0.1.0";

struct Experiment {
  std::string kind;  // "transition", "phase", "evolve" or "spectrum"
  std::optional<std::uint64_t> nodes;  // per edge
  std::optional<std::uint64_t> modes;
  std::optional<double> delta, gamma, time;
  std::optional<int> depth;
  std::optional<bool> symmetrize;
  std::optional<double> step_tol;      // Adaptive pulses with this tolerance; Strict when absent
  std::optional<double> min_fidelity;  // exit 3 below this
  std::optional<bool> refine;          // also run at (delta/2, gamma/2)
  std::optional<std::string> source, dest, state, phase;
};

/// Everything an experiment run depends on. Absent optional fields stay absent on
/// emission, so parse -> emit reproduces a canonical file byte for byte.
struct Scenario {
  std::string name;
  std::string domain;
  std::optional<std::string> bc;  // appended to interval domains
  std::string potential = "0";    // trig text, or "isomod-circle:j=J[;rho=TEXT]"
  std::string generator_set;      // named preset, or empty when generator_list is used
  std::vector<std::string> generator_list;
  Experiment experiment;
  std::optional<std::string> report, data;
  std::uint64_t seed = 0;
};

/// Throws ParseError (with the line of the offending key), UnknownDomain or UnknownGenerator.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::string& path);
std::string emit_scenario(const Scenario& s);

std::uint64_t fnv1a(const std::string& bytes);
std::string scenario_hash(const Scenario& s);  // 16 hex digits of fnv1a(emit_scenario(s))
/// "isoctl <version> scenario=<hash> seed=<seed>"
std::string artifact_header(const Scenario& s);

MetricDomain scenario_domain(const Scenario& s);
/// "eight", "eight-harmonic:F", "circle:F"; a generator list is named Q1, Q2, ...
GeneratorSet resolve_generators(const Scenario& s);
/// nullopt when the potential is zero.
std::optional<RealFunction> scenario_potential(const Scenario& s, std::shared_ptr<const Grid> grid);

/// "const", "plane:k" (e^{ikx} on every edge) or "mode:i" (i-th basis function of ctx).
WaveFunction state_from_spec(const std::string& spec, const PropagatorContext& ctx);

struct ScenarioRun {
  PropagatorContext ctx;
  std::shared_ptr<const GeneratorSet> gens;
  SynthesisParams params;
  PulseOptions opts;
};
ScenarioRun prepare_run(const Scenario& s);

struct TransitionResult {
  TransitionReport base;
  std::optional<TransitionReport> refined;  // at (delta/2, gamma/2) when requested
};
TransitionResult run_transition_scenario(const Scenario& s);

/// Built-in defaults for "demo-eight" and "demo-torus"; scenarios/<name>.json holds the same.
Scenario default_demo_scenario(const std::string& name);

}  // namespace isoctl
