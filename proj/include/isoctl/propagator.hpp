#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isoctl/funcspace.hpp"
#include "isoctl/kernels.hpp"
#include "isoctl/trig.hpp"

namespace isoctl {

/// Read-only after construction; every evolution call takes and returns state.
struct PropagatorContext {
  enum class BasisKind { Fourier, Analytic, Numeric };

  std::shared_ptr<const MetricDomain> domain;
  std::shared_ptr<const Grid> grid;
  std::optional<RealFunction> V;
  BasisKind kind = BasisKind::Numeric;
  std::vector<double> lambda;  // ascending
  std::vector<double> basis;   // samples x n_modes row-major, real, orthonormal in the grid inner product
  std::size_t dofs = 0;        // independent grid unknowns
  double dt = 1e-3;            // substep cap for pulses
  kernels::Backend backend = kernels::Backend::OpenMP;

  std::size_t n_modes() const { return lambda.size(); }
  /// True when the basis spans every grid function (no truncation possible).
  bool complete() const;
};

/// Circle with V = 0: 1, sqrt 2 cos kx, sqrt 2 sin kx (normalized), exactly
/// orthonormal under the periodic trapezoid rule. n_modes = 0 takes all.
PropagatorContext fourier_context(std::shared_ptr<const Grid> grid, std::size_t n_modes = 0);
/// V = 0 on a graph: sampled closed-form eigenfunctions with lambda <= lambda_max,
/// reorthonormalized in the grid inner product; eigenvalues stay exact.
PropagatorContext analytic_context(std::shared_ptr<const Grid> grid, double lambda_max);
/// Finite-difference eigenpairs of -d^2/dx^2 + V.
PropagatorContext numeric_context(std::shared_ptr<const Grid> grid, const RealFunction* V, std::size_t n_modes);
/// Fourier on the circle and analytic on graphs when V is absent, numeric otherwise.
PropagatorContext default_context(std::shared_ptr<const Grid> grid, const RealFunction* V = nullptr,
                                  std::size_t n_modes = 0);

/// max |<b_i, b_j> - delta_ij| over the basis.
double orthonormality_defect(const PropagatorContext& ctx);

/// Running monitors filled by the evolution calls when a log is passed.
struct PropagationLog {
  double worst_capture = 1.0;  // smallest projected-norm fraction seen
  double norm_drift = 0.0;     // accumulated | ||out|| - ||in|| |
  double time = 0.0;
  std::size_t kinetic_steps = 0;
  double splitting_estimate = 0.0;
};

/// Captured-norm threshold below which evolve_free throws TruncationLoss.
constexpr double kTruncationTol = 1e-6;

/// Exact flow e^{-it H0} in the eigenbasis.
WaveFunction evolve_free(const PropagatorContext& ctx, const WaveFunction& psi, double t, PropagationLog* log = nullptr);

enum class StepPolicy {
  Strict,    // dt <= min(delta/16, ctx.dt/(1 + ||u||_inf/delta ||Q||_inf))
  Adaptive,  // largest dt <= delta/16 whose splitting estimate stays under PulseOptions::tol
};

struct PulseOptions {
  StepPolicy policy = StepPolicy::Strict;
  double tol = 1e-8;                       // Adaptive target for the whole pulse
  double max_estimate = 1e-3;              // StepTooLarge above this
  std::optional<std::size_t> substeps;     // overrides the policy when set
};

/// exp(-i delta (H0 + sum (u_j/delta) Q_j)) psi by Strang splitting:
/// half phase, kinetic step, half phase per substep.
WaveFunction evolve_pulse(const PropagatorContext& ctx, const WaveFunction& psi, const std::vector<double>& u,
                          const std::vector<RealFunction>& Q, double delta, const PulseOptions& opts = {},
                          PropagationLog* log = nullptr);
/// Number of substeps evolve_pulse would take.
std::size_t pulse_substeps(const PropagatorContext& ctx, const std::vector<double>& u,
                           const std::vector<RealFunction>& Q, double delta, const PulseOptions& opts = {});
/// Same pulse computed exactly in the eigenbasis (Galerkin matrix, dense
/// eigendecomposition); the oracle for the splitting-order test.
WaveFunction exact_pulse(const PropagatorContext& ctx, const WaveFunction& psi, const std::vector<double>& u,
                         const std::vector<RealFunction>& Q, double delta);

/// e^{-i s phi} e^{-i gamma H0} e^{+i s phi} psi with s = sqrt(alpha/gamma); tends to
/// e^{-i alpha (phi')^2} psi as gamma -> 0. The symmetric variant splits gamma
/// between +phi and -phi conjugations, which cancels the transport term.
WaveFunction conjugated_step(const PropagatorContext& ctx, const WaveFunction& psi, const RealFunction& phi,
                             double alpha, double gamma, bool symmetric = false, PropagationLog* log = nullptr);

/// e^{-i S/sqrt(delta)} exp(-i delta (H0 + sum (u_j/delta) Q_j)) e^{i S/sqrt(delta)} psi,
/// which tends to e^{-i ((S')^2 + sum u_j Q_j)} psi.
WaveFunction conjugated_pulse(const PropagatorContext& ctx, const WaveFunction& psi, const RealFunction& S,
                              const std::vector<double>& u, const std::vector<RealFunction>& Q, double delta,
                              const PulseOptions& opts = {}, PropagationLog* log = nullptr);

/// Edgewise centered-difference derivative (one-sided at edge ends, periodic on the circle).
RealFunction grid_derivative(const RealFunction& f);

}  // namespace isoctl
