#pragma once

#include <memory>
#include <string>
#include <vector>

#include "isoctl/propagator.hpp"
#include "isoctl/saturation.hpp"

namespace isoctl {

/// u holds integrated amplitudes: the segment runs the field u_j / duration.
struct Segment {
  double duration = 0.0;
  std::vector<double> u;

  bool is_free() const;
  friend bool operator==(const Segment& a, const Segment& b) { return a.duration == b.duration && a.u == b.u; }
};

class ControlSchedule {
 public:
  explicit ControlSchedule(std::size_t m = 0) : m_(m) {}

  std::size_t controls() const { return m_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double total_duration() const;
  void push(Segment s);  // throws InvalidArgument on a non-positive duration or wrong length
  void push_free(double duration) { push({duration, std::vector<double>(m_, 0.0)}); }

  /// a then b (b shifted by a's duration).
  static ControlSchedule concat(const ControlSchedule& a, const ControlSchedule& b);
  friend bool operator==(const ControlSchedule& a, const ControlSchedule& b) {
    return a.m_ == b.m_ && a.segments_ == b.segments_;
  }

 private:
  std::size_t m_;
  std::vector<Segment> segments_;
};

struct SynthesisParams {
  double delta = 1e-3;         // pulse duration
  double gamma = 1e-3;         // conjugation free flight
  double level_factor = 0.5;   // delta and gamma scale by this per nesting level
  bool symmetrize = false;     // split each conjugation into +psi and -psi halves
  bool terms_first = false;    // run the subtracted terms before the base pulse
};

/// Coefficients of p in the generators (exact rationals when they are small-denominator
/// and reproduce p exactly). Throws NotInGeneratorSpan.
std::vector<Scalar> decompose_in_generators(const TrigExpression& p, const GeneratorSet& gens);

/// One pulse of length delta with u_j = -coeff_j, which tends to e^{i phi0}.
ControlSchedule pulse_for_phase(const TrigExpression& phi0, const GeneratorSet& gens, double delta);
ControlSchedule pulse_for_phase(const std::vector<Scalar>& coeffs, double delta);

/// Schedule realizing e^{i value(cert)} approximately. Throws InvalidCertificate.
ControlSchedule compile(const SaturationCertificate& cert, const SynthesisParams& params);

/// Sampled generators on the context grid.
std::vector<RealFunction> sample_generators(const GeneratorSet& gens, std::shared_ptr<const Grid> grid);

/// {"format": "isoctl-schedule/1", "domain", "generators": [{name, expr}], "T",
/// "segments": [{"duration", "u"}]}; doubles round-trip exactly.
std::string schedule_to_json(const ControlSchedule& sched, const GeneratorSet& gens);
struct ScheduleFile {
  std::shared_ptr<const GeneratorSet> gens;
  ControlSchedule schedule;
};
/// Throws ParseError; other top-level keys (an artifact header) are ignored.
ScheduleFile schedule_from_json(const std::string& text);

/// Replays the schedule: free segments by the eigenbasis flow, the rest by evolve_pulse.
WaveFunction run_schedule(const PropagatorContext& ctx, const WaveFunction& psi0, const ControlSchedule& sched,
                          const std::vector<RealFunction>& Q, const PulseOptions& opts = {},
                          PropagationLog* log = nullptr);

/// Highest F with 1 and every cos(kx), sin(kx) (same on all edges), k <= F, in the
/// generator span; 0 when none is.
int harmonic_reach(const GeneratorSet& gens);

/// A certificate for p using the product identity
///   R cos(nx - f) = R - R/2 ((S_m/m - S_l/l)')^2 - R/2 ((C_m/m + C_l/l)')^2,  m + l = n,
/// (C_m = cos(mx - f_1), S_m = sin(mx - f_1), f_1 + f_2 = f) for every frequency above
/// the generator reach. Depth ceil(log2(max freq / reach)).
SaturationCertificate synthesize_certificate(const TrigExpression& p, std::shared_ptr<const GeneratorSet> gens);

struct PhaseApproximation {
  TrigExpression phase;
  SaturationCertificate cert;
  double l2_residual = 0.0;  // ||theta - phase|| / ||theta|| on the mask
};
/// L2 projection of theta onto everything certifiable within `depth` (generator span
/// plus same-on-every-edge harmonics up to reach * 2^depth), restricted to mask.
PhaseApproximation approximate_phase(const RealFunction& theta, const std::vector<char>& mask,
                                     std::shared_ptr<const GeneratorSet> gens, int depth);

struct PhaseReport {
  double error = 0.0;  // ||psi(T) - e^{i phi} psi0||
  double T = 0.0;
  double cert_residual = 0.0;  // ||value(cert) - phi|| / ||phi||
  std::size_t segments = 0;
};
PhaseReport run_phase_experiment(const PropagatorContext& ctx, const WaveFunction& psi0, const RealFunction& phi,
                                 const SaturationCertificate& cert, const SynthesisParams& params,
                                 const PulseOptions& opts = {});

struct TransitionReport {
  double fidelity = 0.0;        // |<psi(T), dest>|
  double T = 0.0;
  double phase_fidelity = 0.0;  // |<e^{ip} source, dest>|, the ceiling set by the phase approximation
  double phase_residual = 0.0;  // min_c ||e^{ip} source - e^{ic} dest||
  double dynamical_error = 0.0; // ||psi(T) - e^{ip} source||
  double splitting_estimate = 0.0;
  double theta_l2_residual = 0.0;
  int cert_depth = 0;
  std::size_t segments = 0;
  double norm_drift = 0.0;
  ControlSchedule schedule;
  std::vector<cplx> final_samples;  // psi(T) on the grid
};
/// Steers source toward dest through the relative phase arg(dest/source).
/// Throws ModulusMismatch unless the two share their modulus within modulus_tol.
TransitionReport run_transition_experiment(const PropagatorContext& ctx, const WaveFunction& source,
                                           const WaveFunction& dest, std::shared_ptr<const GeneratorSet> gens,
                                           int phase_approx_depth, const SynthesisParams& params,
                                           const PulseOptions& opts = {}, double modulus_tol = 1e-8);

/// 1, cos kx, sin kx up to max_freq together with the eight-graph eigenfunctions
/// of frequency <= max_freq, on the eight graph: Q1..Q5 first.
GeneratorSet eight_graph_harmonic_generators(int max_freq);
/// (e^{ikx}, e^{ikx}) / sqrt(4 pi) on the eight graph.
WaveFunction eight_eta(std::shared_ptr<const Grid> grid, int k);

}  // namespace isoctl
