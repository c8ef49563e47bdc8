#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isoctl/catalog.hpp"
#include "isoctl/funcspace.hpp"
#include "isoctl/trig.hpp"

namespace isoctl {

/// Named interaction potentials Q_1..Q_m on one domain.
struct GeneratorSet {
  std::shared_ptr<const MetricDomain> domain;
  std::string domain_spec;  // parse_domain() input that rebuilds `domain`
  std::vector<std::string> names;
  std::vector<TrigExpression> q;

  std::size_t size() const { return q.size(); }
  std::size_t index_of(const std::string& name) const;  // throws UnknownGenerator
};

/// (1,1), (c_1,c_1), (s_1,0), (0,s_1), (s_1/2,-s_1/2), (c_1/2,c_1/2) on the eight graph.
GeneratorSet eight_graph_generators();
/// 1, cos(kx), sin(kx) for k = 1..max_freq on the 2pi circle.
GeneratorSet circle_generators(int max_freq);

struct CertNode;
using Cert = std::shared_ptr<const CertNode>;

/// One subtracted term alpha * (psi')^2 together with certificates for +psi and -psi.
struct ConeTerm {
  Scalar alpha;
  Cert plus;
  Cert minus;
};

struct CertNode {
  enum class Kind { GeneratorCombo, ConeSum };
  Kind kind = Kind::GeneratorCombo;
  std::vector<Scalar> coeffs;  // GeneratorCombo: one per generator
  Cert base;                   // ConeSum
  std::vector<ConeTerm> terms;
  TrigExpression value;  // cached at construction
  int depth = 0;
};

class SaturationCertificate {
 public:
  SaturationCertificate() = default;
  SaturationCertificate(std::shared_ptr<const GeneratorSet> gens, Cert root) : gens_(std::move(gens)), root_(std::move(root)) {}

  const GeneratorSet& generators() const { return *gens_; }
  const std::shared_ptr<const GeneratorSet>& generators_ptr() const { return gens_; }
  const Cert& root() const { return root_; }
  int depth() const { return root_->depth; }
  const TrigExpression& value() const { return root_->value; }

 private:
  std::shared_ptr<const GeneratorSet> gens_;
  Cert root_;
};

/// Node builders; values and depths are computed here and never re-derived.
Cert make_combo(const GeneratorSet& gens, std::vector<Scalar> coeffs);
Cert make_combo(const GeneratorSet& gens, const std::map<std::string, Scalar>& named);
Cert make_cone_sum(Cert base, std::vector<ConeTerm> terms);
/// Non-negative combination sum c_i x_i, flattened into one node: generator
/// parts add up, subtracted terms concatenate with alpha scaled by c_i.
Cert combine(const GeneratorSet& gens, const std::vector<std::pair<Scalar, Cert>>& parts);

/// Replays the tree from the generators.
TrigExpression cert_evaluate(const SaturationCertificate& c);

struct CertValidation {
  bool ok = true;
  std::string node;  // path of the first failing node, e.g. "root.terms[1].plus"
  std::string reason;
};
CertValidation cert_validate(const SaturationCertificate& c, const MetricDomain& domain);

/// Derivation targets on the eight graph.
struct EightTarget {
  EightKind kind = EightKind::Ground;
  int k = 0;
  int j = 1;
  int sign = 1;
};
EightTarget parse_eight_target(const std::string& text);  // "phi0", "phi_o:k", "phi_e:k:j", optional leading '-'

constexpr int kEightGraphKMax = 6;
SaturationCertificate derive_eight_graph(const EightTarget& target, int k_max = kEightGraphKMax);
/// Every certificate the eight-graph recursion produces with depth <= max_depth.
std::vector<SaturationCertificate> eight_graph_cone(int max_depth, int k_max = kEightGraphKMax);

/// cos(kx) or sin(kx) (times sign) from the generators {1, cos x, sin x} by the
/// same addition identities; depth k - 1.
SaturationCertificate derive_circle_harmonic(int k, bool is_sin, int sign, std::shared_ptr<const GeneratorSet> gens);
/// Every harmonic cos/sin of frequency <= max_freq with both signs.
std::vector<SaturationCertificate> circle_harmonic_cone(int max_freq, std::shared_ptr<const GeneratorSet> gens);

/// Relative L2 residual of each target after least-squares projection onto the
/// linear span of the evaluated cone elements (a span, not the cone).
std::vector<double> density_residual(const std::vector<RealFunction>& targets,
                                     const std::vector<SaturationCertificate>& cone, std::shared_ptr<const Grid> grid);

std::string certificate_to_json(const SaturationCertificate& c);
SaturationCertificate certificate_from_json(const std::string& text);

}  // namespace isoctl
