#pragma once

#include <optional>
#include <tuple>
#include <vector>

#include "isoctl/funcspace.hpp"
#include "isoctl/kernels.hpp"
#include "isoctl/rational.hpp"
#include "isoctl/trig.hpp"

namespace isoctl {

struct EigenPair {
  double lambda = 0.0;
  WaveFunction phi;  // unit norm in the grid's trapezoidal inner product
  std::size_t cluster = 0;
  std::size_t index_in_cluster = 0;
};

/// Finite-volume discretization of -d^2/dx^2 + V: stiffness K, lumped mass M
/// (h at interior nodes, sum of h/2 at vertices), Dirichlet vertices removed.
/// Vertex samples of all incident edge ends map to one unknown.
struct DiscreteOperator {
  std::shared_ptr<const Grid> grid;
  std::vector<long> dof_of_sample;  // -1 at Dirichlet vertices
  std::vector<double> mass;
  std::vector<double> kdiag;
  std::vector<std::tuple<std::size_t, std::size_t, double>> off;  // i < j
  kernels::ChainSystem chains;

  std::size_t dofs() const { return mass.size(); }
  /// M^{-1/2} K M^{-1/2}, row-major, symmetric bit for bit.
  std::vector<double> symmetric_matrix() const;
  /// Samples of u = M^{-1/2} y for a vector y in the symmetric frame.
  WaveFunction to_samples(const double* y) const;
  /// y = M^{1/2} u from samples (vertex values averaged over incident ends).
  std::vector<double> from_samples(const WaveFunction& f) const;
  /// (K u)_d / M_d for samples f, returned as samples (H0 applied discretely).
  WaveFunction apply(const WaveFunction& f) const;
};

DiscreteOperator assemble(std::shared_ptr<const Grid> grid, const RealFunction* V);

/// Clusters: consecutive eigenvalues closer than gap * (1 + |lambda|) share a cluster id.
void assign_clusters(std::vector<EigenPair>& pairs, double gap = 1e-2);
std::vector<std::size_t> cluster_sizes(const std::vector<double>& values, double gap = 1e-2);

/// Dense path: all eigenvectors of the discrete operator, lowest n_modes returned.
std::vector<EigenPair> graph_spectrum_numeric(std::shared_ptr<const Grid> grid, const RealFunction* V,
                                              std::size_t n_modes,
                                              kernels::Backend backend = kernels::Backend::OpenMP);
/// Sturm path: lowest eigenvalues only, by inertia counts on the chain structure.
/// Inside a degenerate cluster whose modes vanish at a vertex the vertex Schur
/// complement is ill-conditioned and accuracy drops to about 1e-8 relative.
std::vector<double> fd_eigenvalues(std::shared_ptr<const Grid> grid, const RealFunction* V, std::size_t count,
                                   double tol = 1e-12, kernels::Backend backend = kernels::Backend::OpenMP);

std::vector<EigenPair> circle_spectrum(const RealFunction& V, std::size_t n_modes);
std::vector<EigenPair> circle_spectrum(const TrigExpression& V, std::size_t n_modes, std::shared_ptr<const Grid> grid);

/// ||-phi'' + V phi - lambda phi||_2 by centered second differences, skipping the
/// two nodes next to every vertex. Periodic on the circle.
double eigen_residual(const WaveFunction& phi, const RealFunction* V, double lambda);

struct SecularRoot {
  double omega = 0.0;
  std::optional<Rational> exact_omega;
  std::size_t nullity = 0;
  double lambda() const { return omega * omega; }
};

struct SecularScan {
  std::vector<double> omega_grid;
  std::vector<double> det;
  std::vector<double> sigma_min;
  std::vector<SecularRoot> roots;  // ascending
};

struct AnalyticMode {
  double lambda = 0.0;
  std::optional<Rational> exact_omega;
  TrigExpression phi;  // unit L2 norm on the graph
  std::size_t cluster = 0;
};

struct AnalyticSpectrum {
  SecularScan scan;
  std::vector<AnalyticMode> modes;
  bool commensurate = true;  // every edge length is a rational multiple of pi
};

/// V = 0 spectrum from the vertex-condition system in edgewise (A_j, B_j).
/// keep_scan=false drops the per-step arrays for long scans.
AnalyticSpectrum graph_spectrum_analytic(const MetricDomain& g, double lambda_max, bool keep_scan = true,
                                         double step = 1e-3);
/// The secular matrix at frequency omega > 0 (rows: continuity, Kirchhoff/omega, Dirichlet).
std::vector<double> secular_matrix(const MetricDomain& g, double omega);

std::vector<EigenPair> sample_modes(const AnalyticSpectrum& spec, std::shared_ptr<const Grid> grid);

}  // namespace isoctl
