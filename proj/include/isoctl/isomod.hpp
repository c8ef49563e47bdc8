#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isoctl/catalog.hpp"
#include "isoctl/funcspace.hpp"

namespace isoctl {

/// Shares: deviation <= tol. Rejects: deviation > 10 tol, with a witness.
/// Inconclusive: the band in between.
enum class Verdict { Shares, Rejects, Inconclusive };
std::string verdict_name(Verdict v);

struct ModulusReport {
  std::string first, second;
  double lambda_first = 0.0, lambda_second = 0.0;
  double deviation = 0.0;
  double tol = 0.0;
  Verdict verdict = Verdict::Shares;
  /// Coordinates of the largest deviation; set only on rejection.
  std::optional<std::vector<double>> witness;
  /// Seed of the random combinations involved, when any.
  std::optional<std::uint64_t> seed;
};

/// Verdict from a deviation, per the rule above.
Verdict classify_deviation(double deviation, double tol);

/// Max over the grid of ||f| - |g||. Witness coordinates are (edge, x).
ModulusReport shares_modulus(const WaveFunction& f, const WaveFunction& g, double tol = 1e-8,
                             const std::string& name_f = "f", const std::string& name_g = "g");

/// Values of a function on a shared SampleSet.
struct SampledFunction {
  std::string name;
  double lambda = 0.0;
  std::shared_ptr<const SampleSet> samples;
  std::vector<cplx> values;
};
SampledFunction sample_entry(const CatalogEntry& e, std::shared_ptr<const SampleSet> samples);
ModulusReport shares_modulus(const SampledFunction& f, const SampledFunction& g, double tol = 1e-8);

/// Normalized f1 + i f2 and f1 - i f2 from two real orthogonal eigenfunctions.
std::pair<WaveFunction, WaveFunction> eigenspace_isomod_pair(const WaveFunction& f1, const WaveFunction& f2);
std::pair<SampledFunction, SampledFunction> eigenspace_isomod_pair(const SampledFunction& f1, const SampledFunction& f2);

/// A named linear combination of scan entries, compared against everything.
struct Combination {
  std::string name;
  std::vector<std::pair<std::size_t, cplx>> terms;  // (entry index, coefficient)
};

constexpr std::uint64_t kScanSeed = 0x15a0d0c5;
constexpr std::size_t kCombinationsPerSpace = 32;

struct ScanOptions {
  double tol = 1e-8;
  std::uint64_t seed = kScanSeed;
  /// Relative gap under which two entries belong to the same eigenspace.
  double level_gap = 1e-9;
  std::vector<Combination> extra;
};

/// Every unordered pair of entries, every extra combination against every
/// entry and every other extra, and for each pair of distinct eigenspaces the
/// cross product of their probes (the entry itself for a simple level,
/// kCombinationsPerSpace random unit combinations otherwise).
std::vector<ModulusReport> scan_catalog_pairs(const std::vector<CatalogEntry>& entries, const ScanOptions& opts = {});

struct CircleExample {
  RealFunction theta, V;
  WaveFunction phi_plus, phi_minus;
  double C = 0.0;
  double winding = 0.0;  // theta(2pi) - theta(0)
};
/// Builds the potential V = rho''/rho - C^2 j^2 / rho^4 for which rho e^{+-i theta}
/// are zero-energy eigenfunctions sharing the modulus rho.
CircleExample construct_circle_example(const TrigExpression& rho, int j, std::shared_ptr<const Grid> grid);
/// Sampled rho on a circle grid; rho'' by fourth-order periodic differences.
CircleExample construct_circle_example(const RealFunction& rho, int j);

struct ThetaStructure {
  double C_est = 0.0;
  double deviation = 0.0;
  RealFunction theta_prime;  // unwrapped phase derivative; zero where not estimated
};
/// Estimates theta' rho^2 from the unwrapped phase by centered differences.
ThetaStructure verify_theta_structure(const WaveFunction& phi);

}  // namespace isoctl
