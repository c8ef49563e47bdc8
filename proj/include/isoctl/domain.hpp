#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "isoctl/rational.hpp"

namespace isoctl {

enum class BoundaryKind { Dirichlet, NeumannKirchhoff };
enum class EndMarker { Start, End };

/// Length in units of pi when the caller gave it that way ("2pi", "3pi/2").
/// Exact symbolic evaluation at edge ends is only possible when this is set.
struct Length {
  double value = 0.0;
  std::optional<Rational> over_pi;

  static Length pi_multiple(const Rational& r);
  static Length real(double v) { return Length{v, std::nullopt}; }
  /// Accepts "6.28", "2pi", "pi", "3pi/2", "3/2pi".
  static std::optional<Length> parse(const std::string& text);
  std::string to_string() const;
};

struct Edge {
  std::size_t id = 0;
  Length length;
  std::size_t from = 0;
  std::size_t to = 0;
  bool is_loop() const { return from == to; }
};

struct Incidence {
  std::size_t edge = 0;
  EndMarker end = EndMarker::Start;
};

struct Vertex {
  std::size_t id = 0;
  std::vector<Incidence> incident;
  BoundaryKind condition = BoundaryKind::NeumannKirchhoff;
};

struct Circle {
  Length length;
};

struct Interval {
  Length length;
  BoundaryKind bc_left = BoundaryKind::Dirichlet;
  BoundaryKind bc_right = BoundaryKind::Dirichlet;
};

struct Graph {
  std::vector<Edge> edges;
  std::vector<Vertex> vertices;
};

struct EdgeSpec {
  Length length;
  std::size_t from = 0;
  std::size_t to = 0;
};

class MetricDomain {
 public:
  static MetricDomain circle(Length length);
  static MetricDomain interval(Length length, BoundaryKind left, BoundaryKind right);
  static MetricDomain graph(Graph g);  // unchecked; use build_graph

  const std::variant<Circle, Interval, Graph>& variant() const { return v_; }
  bool is_circle() const { return std::holds_alternative<Circle>(v_); }
  bool is_interval() const { return std::holds_alternative<Interval>(v_); }
  bool is_graph() const { return std::holds_alternative<Graph>(v_); }

  /// Uniform edge/vertex view. A circle is one loop at vertex 0; an interval
  /// is one edge from vertex 0 to vertex 1.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  double total_length() const;
  std::string describe() const;

 private:
  explicit MetricDomain(std::variant<Circle, Interval, Graph> v);
  std::variant<Circle, Interval, Graph> v_;
  std::vector<Edge> edges_;
  std::vector<Vertex> vertices_;
};

/// Validates incidences and connectivity. Internal vertices (more than one
/// incidence) are forced to Neumann-Kirchhoff unless the caller asked for
/// Dirichlet there, which is an error.
MetricDomain build_graph(const std::vector<EdgeSpec>& edges,
                         const std::vector<BoundaryKind>& vertex_conditions);

MetricDomain eight_graph();
MetricDomain three_branch_graph();

/// "eight", "three-branch", "circle:2pi", "interval:LENGTH[:d|n[:d|n]]",
/// or a path to a graph JSON file.
MetricDomain parse_domain(const std::string& spec);
MetricDomain graph_from_json(const std::string& text);

struct EdgeGrid {
  std::size_t nodes = 0;
  double h = 0.0;
  std::size_t offset = 0;  // into the flat sample vector
};

/// Uniform grid per edge. Non-periodic edges store both endpoints, so each
/// vertex value is held once per incident edge end. The circle stores n
/// nodes at x = i*L/n with the node at L identified with node 0.
class Grid {
 public:
  Grid(std::shared_ptr<const MetricDomain> domain, std::vector<std::size_t> nodes_per_edge);

  const MetricDomain& domain() const { return *domain_; }
  std::shared_ptr<const MetricDomain> domain_ptr() const { return domain_; }
  bool periodic() const { return domain_->is_circle(); }
  std::size_t edge_count() const { return edges_.size(); }
  const EdgeGrid& edge(std::size_t e) const { return edges_[e]; }
  std::size_t size() const { return size_; }
  double x(std::size_t e, std::size_t i) const { return static_cast<double>(i) * edges_[e].h; }
  /// Flat index of the sample at an edge end; the circle end wraps to node 0.
  std::size_t end_index(std::size_t e, EndMarker end) const;
  /// Trapezoidal weights, edge by edge.
  const std::vector<double>& weights() const { return weights_; }

  bool same_as(const Grid& o) const;

 private:
  std::shared_ptr<const MetricDomain> domain_;
  std::vector<EdgeGrid> edges_;
  std::vector<double> weights_;
  std::size_t size_ = 0;
};

/// Roughly n_per_unit_length intervals per unit length on every edge.
std::shared_ptr<const Grid> discretize(const MetricDomain& domain, double n_per_unit_length);
/// Exactly `nodes` samples per edge (periodic count on the circle).
std::shared_ptr<const Grid> discretize_nodes(const MetricDomain& domain, std::size_t nodes);

}  // namespace isoctl
