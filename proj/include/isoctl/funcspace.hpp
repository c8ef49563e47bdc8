#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "isoctl/domain.hpp"
#include "isoctl/trig.hpp"

namespace isoctl {

using cplx = std::complex<double>;

/// Samples aligned to a Grid, stored flat edge after edge.
template <class T>
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::shared_ptr<const Grid> grid, T fill = T{})
      : grid_(std::move(grid)), data_(grid_->size(), fill) {}
  GridFunction(std::shared_ptr<const Grid> grid, std::vector<T> data) : grid_(std::move(grid)), data_(std::move(data)) {}

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t edge, std::size_t i) { return data_[grid_->edge(edge).offset + i]; }
  const T& at(std::size_t edge, std::size_t i) const { return data_[grid_->edge(edge).offset + i]; }

  /// Samples f(edge, x) on every node.
  static GridFunction sample(std::shared_ptr<const Grid> grid, const std::function<T(std::size_t, double)>& f) {
    GridFunction g(grid);
    for (std::size_t e = 0; e < grid->edge_count(); ++e)
      for (std::size_t i = 0; i < grid->edge(e).nodes; ++i) g.at(e, i) = f(e, grid->x(e, i));
    return g;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<T> data_;
};

using WaveFunction = GridFunction<cplx>;
using RealFunction = GridFunction<double>;

void require_same_grid(const Grid& a, const Grid& b);

cplx inner_product(const WaveFunction& f, const WaveFunction& g);
double inner_product(const RealFunction& f, const RealFunction& g);
double l2_norm(const WaveFunction& f);
double l2_norm(const RealFunction& f);
double l2_distance(const WaveFunction& f, const WaveFunction& g);
WaveFunction normalized(const WaveFunction& f);
WaveFunction to_complex(const RealFunction& f);

RealFunction evaluate(const TrigExpression& p, std::shared_ptr<const Grid> grid);
RealFunction modulus(const WaveFunction& f);
WaveFunction apply_phase(const WaveFunction& f, const RealFunction& theta);
double sup_norm(const WaveFunction& f);
double sup_norm(const RealFunction& f);

/// Largest spread of stored vertex values, relative to the sup norm.
double vertex_discontinuity(const WaveFunction& f);
bool is_conforming(const WaveFunction& f, double eps = 1e-8);

/// CSV rows "edge,x,re,im".
void write_csv(std::ostream& os, const WaveFunction& f);
void write_csv(std::ostream& os, const RealFunction& f);

}  // namespace isoctl
