#include "isoctl/domain.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "isoctl/error.hpp"
#include "json.hpp"

namespace isoctl {

Length Length::pi_multiple(const Rational& r) { return Length{r.to_double() * std::numbers::pi, r}; }

std::optional<Length> Length::parse(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (c != ' ') text += c;
  auto p = text.find("pi");
  if (p == std::string::npos) {
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) return std::nullopt;
      return Length::real(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  // "<a>pi<rest>" where rest is empty or "/q".
  std::string head = text.substr(0, p);
  std::string tail = text.substr(p + 2);
  if (head.empty()) head = "1";
  if (head.back() == '*') head.pop_back();
  auto a = Rational::parse(head);
  if (!a) return std::nullopt;
  if (!tail.empty()) {
    if (tail[0] != '/') return std::nullopt;
    auto q = Rational::parse(tail.substr(1));
    if (!q || q->is_zero()) return std::nullopt;
    *a /= *q;
  }
  return Length::pi_multiple(*a);
}

std::string Length::to_string() const {
  if (over_pi) {
    if (over_pi->den() == 1) return std::to_string(over_pi->num()) + "pi";
    return std::to_string(over_pi->num()) + "pi/" + std::to_string(over_pi->den());
  }
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

MetricDomain::MetricDomain(std::variant<Circle, Interval, Graph> v) : v_(std::move(v)) {
  if (auto* c = std::get_if<Circle>(&v_)) {
    edges_.push_back(Edge{0, c->length, 0, 0});
    vertices_.push_back(Vertex{0, {{0, EndMarker::Start}, {0, EndMarker::End}}, BoundaryKind::NeumannKirchhoff});
  } else if (auto* iv = std::get_if<Interval>(&v_)) {
    edges_.push_back(Edge{0, iv->length, 0, 1});
    vertices_.push_back(Vertex{0, {{0, EndMarker::Start}}, iv->bc_left});
    vertices_.push_back(Vertex{1, {{0, EndMarker::End}}, iv->bc_right});
  } else {
    const auto& g = std::get<Graph>(v_);
    edges_ = g.edges;
    vertices_ = g.vertices;
  }
  for (const auto& e : edges_)
    if (!(e.length.value > 0.0) || !std::isfinite(e.length.value))
      throw Error(ErrorCode::InvalidLength, "edge " + std::to_string(e.id) + " has non-positive length");
}

MetricDomain MetricDomain::circle(Length length) { return MetricDomain(Circle{length}); }

MetricDomain MetricDomain::interval(Length length, BoundaryKind left, BoundaryKind right) {
  return MetricDomain(Interval{length, left, right});
}

MetricDomain MetricDomain::graph(Graph g) { return MetricDomain(std::move(g)); }

double MetricDomain::total_length() const {
  double s = 0.0;
  for (const auto& e : edges_) s += e.length.value;
  return s;
}

std::string MetricDomain::describe() const {
  if (auto* c = std::get_if<Circle>(&v_)) return "circle:" + c->length.to_string();
  if (auto* iv = std::get_if<Interval>(&v_)) {
    auto bc = [](BoundaryKind k) { return k == BoundaryKind::Dirichlet ? "d" : "n"; };
    return "interval:" + iv->length.to_string() + ":" + bc(iv->bc_left) + ":" + bc(iv->bc_right);
  }
  return "graph(" + std::to_string(edges_.size()) + " edges, " + std::to_string(vertices_.size()) + " vertices)";
}

MetricDomain build_graph(const std::vector<EdgeSpec>& specs, const std::vector<BoundaryKind>& conditions) {
  if (specs.empty()) throw Error(ErrorCode::DanglingIncidence, "graph without edges");
  const std::size_t nv = conditions.size();
  Graph g;
  g.vertices.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    g.vertices[v].id = v;
    g.vertices[v].condition = conditions[v];
  }
  for (std::size_t e = 0; e < specs.size(); ++e) {
    const auto& s = specs[e];
    if (s.from >= nv || s.to >= nv)
      throw Error(ErrorCode::DanglingIncidence, "edge " + std::to_string(e) + " references a missing vertex");
    g.edges.push_back(Edge{e, s.length, s.from, s.to});
    g.vertices[s.from].incident.push_back({e, EndMarker::Start});
    g.vertices[s.to].incident.push_back({e, EndMarker::End});
  }
  for (auto& v : g.vertices) {
    if (v.incident.empty())
      throw Error(ErrorCode::DanglingIncidence, "vertex " + std::to_string(v.id) + " has no incident edge");
    if (v.incident.size() > 1 && v.condition == BoundaryKind::Dirichlet)
      throw Error(ErrorCode::DirichletAtInternalVertex, "vertex " + std::to_string(v.id));
  }
  std::vector<std::size_t> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges) parent[find(e.from)] = find(e.to);
  for (std::size_t v = 1; v < nv; ++v)
    if (find(v) != find(0)) throw Error(ErrorCode::DisconnectedGraph, "vertex " + std::to_string(v) + " unreachable");
  return MetricDomain::graph(std::move(g));
}

MetricDomain eight_graph() {
  auto L = Length::pi_multiple(2);
  return build_graph({{L, 0, 0}, {L, 0, 0}}, {BoundaryKind::NeumannKirchhoff});
}

MetricDomain three_branch_graph() {
  auto L = Length::pi_multiple(2);
  return build_graph({{L, 0, 1}, {L, 0, 1}, {L, 0, 1}},
                     {BoundaryKind::NeumannKirchhoff, BoundaryKind::NeumannKirchhoff});
}

namespace {

Length json_length(const nlohmann::json& j) {
  if (j.is_number()) return Length::real(j.get<double>());
  if (j.is_string()) {
    if (auto l = Length::parse(j.get<std::string>())) return *l;
  }
  throw Error(ErrorCode::ParseError, "bad edge length " + j.dump());
}

BoundaryKind parse_bc(const std::string& s) {
  if (s == "dirichlet" || s == "d") return BoundaryKind::Dirichlet;
  if (s == "kirchhoff" || s == "neumann" || s == "n") return BoundaryKind::NeumannKirchhoff;
  throw Error(ErrorCode::UnknownDomain, "unknown boundary condition '" + s + "'");
}

}  // namespace

MetricDomain graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.contains("edges") || !j.contains("vertices"))
    throw Error(ErrorCode::ParseError, "graph needs 'edges' and 'vertices'");
  // Vertex ids may be arbitrary integers; map them to dense indices in file order.
  std::vector<long long> ids;
  std::vector<BoundaryKind> bcs;
  for (const auto& v : j["vertices"]) {
    ids.push_back(v.at("id").get<long long>());
    bcs.push_back(parse_bc(v.value("bc", std::string("kirchhoff"))));
  }
  auto index_of = [&](long long id) -> std::size_t {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return i;
    throw Error(ErrorCode::DanglingIncidence, "edge references unknown vertex " + std::to_string(id));
  };
  std::vector<EdgeSpec> edges;
  for (const auto& e : j["edges"])
    edges.push_back({json_length(e.at("length")), index_of(e.at("from").get<long long>()),
                     index_of(e.at("to").get<long long>())});
  return build_graph(edges, bcs);
}

MetricDomain parse_domain(const std::string& spec) {
  if (spec == "eight") return eight_graph();
  if (spec == "three-branch") return three_branch_graph();
  auto parts = std::vector<std::string>{};
  {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
  }
  if (!parts.empty() && (parts[0] == "circle" || parts[0] == "interval")) {
    if (parts.size() < 2) throw Error(ErrorCode::UnknownDomain, "missing length in '" + spec + "'");
    auto len = Length::parse(parts[1]);
    if (!len) throw Error(ErrorCode::UnknownDomain, "bad length in '" + spec + "'");
    if (parts[0] == "circle") {
      if (parts.size() != 2) throw Error(ErrorCode::UnknownDomain, spec);
      return MetricDomain::circle(*len);
    }
    BoundaryKind l = parts.size() > 2 ? parse_bc(parts[2]) : BoundaryKind::Dirichlet;
    BoundaryKind r = parts.size() > 3 ? parse_bc(parts[3]) : l;
    return MetricDomain::interval(*len, l, r);
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorCode::UnknownDomain, "unknown domain '" + spec + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return graph_from_json(buf.str());
}

Grid::Grid(std::shared_ptr<const MetricDomain> domain, std::vector<std::size_t> nodes)
    : domain_(std::move(domain)) {
  const auto& edges = domain_->edges();
  if (nodes.size() != edges.size()) throw Error(ErrorCode::GridMismatch, "node counts do not match edges");
  const bool per = periodic();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::size_t n = nodes[e];
    if (n < (per ? 4u : 3u)) throw Error(ErrorCode::GridTooCoarse, "edge " + std::to_string(e));
    double L = edges[e].length.value;
    double h = per ? L / static_cast<double>(n) : L / static_cast<double>(n - 1);
    edges_.push_back(EdgeGrid{n, h, size_});
    size_ += n;
  }
  weights_.assign(size_, 0.0);
  for (const auto& eg : edges_) {
    for (std::size_t i = 0; i < eg.nodes; ++i) weights_[eg.offset + i] = eg.h;
    if (!per) {
      weights_[eg.offset] *= 0.5;
      weights_[eg.offset + eg.nodes - 1] *= 0.5;
    }
  }
}

std::size_t Grid::end_index(std::size_t e, EndMarker end) const {
  const auto& eg = edges_[e];
  if (end == EndMarker::Start || periodic()) return eg.offset;
  return eg.offset + eg.nodes - 1;
}

bool Grid::same_as(const Grid& o) const {
  if (this == &o) return true;
  if (edges_.size() != o.edges_.size() || periodic() != o.periodic()) return false;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].nodes != o.edges_[e].nodes || edges_[e].h != o.edges_[e].h) return false;
  return true;
}

std::shared_ptr<const Grid> discretize(const MetricDomain& domain, double n_per_unit_length) {
  if (!(n_per_unit_length >= 8.0))
    throw Error(ErrorCode::GridTooCoarse, "need at least 8 nodes per unit length");
  std::vector<std::size_t> nodes;
  for (const auto& e : domain.edges()) {
    auto intervals = static_cast<std::size_t>(std::llround(e.length.value * n_per_unit_length));
    intervals = std::max<std::size_t>(intervals, 4);
    nodes.push_back(domain.is_circle() ? intervals : intervals + 1);
  }
  return std::make_shared<const Grid>(std::make_shared<const MetricDomain>(domain), nodes);
}

std::shared_ptr<const Grid> discretize_nodes(const MetricDomain& domain, std::size_t n) {
  std::vector<std::size_t> nodes(domain.edges().size(), n);
  return std::make_shared<const Grid>(std::make_shared<const MetricDomain>(domain), nodes);
}

}  // namespace isoctl
