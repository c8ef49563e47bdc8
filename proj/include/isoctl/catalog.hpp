#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isoctl/funcspace.hpp"
#include "isoctl/trig.hpp"

namespace isoctl {

enum class Family { Torus, Sphere, Disk, Hermite, EightGraph, ThreeBranch };

std::string family_name(Family f);
Family parse_family(const std::string& name);

/// Point coordinates per family:
///   Torus     (x_1..x_d) in [0, 2pi)^d
///   Sphere    (alpha polar, beta azimuth)
///   Disk      (r, theta), r in [0, 1]
///   Hermite   (x_1..x_d) in R^d
///   graphs    (edge index, arclength x)
using Evaluator = std::function<cplx(std::span<const double>)>;

struct CatalogEntry {
  Family family = Family::Torus;
  std::vector<int> params;
  std::string tag;
  double lambda = 0.0;
  std::size_t dim = 1;  // coordinates taken by eval
  /// Unit-norm evaluator.
  Evaluator eval;
  /// Graph families: the unnormalized real eigenfunction; eval is norm_constant * expr.
  std::optional<TrigExpression> expr;
  double norm_constant = 1.0;

  cplx operator()(std::initializer_list<double> x) const;
  /// Samples on a grid of the matching one-dimensional domain (circle for d = 1
  /// torus, the canonical graph for graph families).
  WaveFunction sample(std::shared_ptr<const Grid> grid) const;
};

/// e^{i sum s_j n_j x_j} / (2pi)^{d/2}; signs may be omitted (all +).
CatalogEntry torus_mode(const std::vector<int>& n, const std::vector<int>& s = {});
/// J_n(j_{n,k} r) e^{+-i n theta} / (sqrt(pi) |J_n'(j_{n,k})|); n = 0 ignores sign.
CatalogEntry disk_mode(int n, int k, int sign);
/// The real pair sqrt(2/pi)/|J_n'| J_n(j r) (cos n theta, sin n theta); n >= 1.
std::pair<CatalogEntry, CatalogEntry> disk_real_modes(int n, int k);
CatalogEntry sphere_mode(int l, int m);
CatalogEntry hermite_mode(const std::vector<int>& alpha);

enum class EightKind { Ground, Odd, Even };
/// Ground: (1,1). Odd k >= 0: (s_{k+1/2}, -s_{k+1/2}). Even k >= 1, j = 1..3:
/// (c_k, c_k), (s_k, 0), (0, s_k).
CatalogEntry eight_graph_mode(EightKind kind, int k, int j = 1);
/// k = 0 ground; k >= 1, j = 1..3: (c_{k/2})^3, (-s, s, 0), (-s, 0, s) with s = s_{k/2}.
CatalogEntry three_branch_mode(int k, int j = 1);

/// Unnormalized eigenfunction expressions of the graph families.
TrigExpression eight_graph_expression(EightKind kind, int k, int j = 1);
TrigExpression three_branch_expression(int k, int j = 1);

/// Builds an entry from "k=2,j=1"-style parameters; eight graph also takes
/// kind=ground|odd|even (default even).
CatalogEntry make_entry(Family family, const std::map<std::string, std::string>& params);
std::map<std::string, std::string> parse_params(const std::string& text);

/// Every eigenfunction of a family up to a level bound, one entry per basis
/// function. Used for bulk checks and scans.
std::vector<CatalogEntry> family_basis(Family family, int level_max, int dim = 1);

/// L2 norm under the family's quadrature.
double entry_norm(const CatalogEntry& e);
/// Max |H0 f - lambda f| over interior probe points, by sixth-order differences.
double entry_residual(const CatalogEntry& e);

/// Deterministic probe points covering a family's domain, with quadrature
/// weights so that sum w |f|^2 approximates the squared L2 norm.
struct SampleSet {
  Family family = Family::Torus;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};
SampleSet family_samples(Family family, std::size_t dim);

}  // namespace isoctl
