#include <algorithm>
#include <cmath>
#include <limits>

#include "isoctl/kernels.hpp"

namespace isoctl::kernels {

std::size_t ChainSystem::unknowns() const {
  std::size_t n = vertex_diag.size();
  for (const auto& c : chains) n += c.diag.size();
  return n;
}

std::size_t count_below(const ChainSystem& sys, double sigma) {
  const std::size_t nv = sys.vertex_diag.size();
  // Schur complement on the vertices after eliminating every chain interior.
  std::vector<double> s(nv * nv, 0.0);
  for (std::size_t i = 0; i < nv; ++i) {
    s[i * nv + i] = sys.vertex_diag[i] - sigma * sys.vertex_mass[i];
    for (std::size_t j = 0; j < nv; ++j)
      if (j != i && !sys.vertex_off.empty()) s[i * nv + j] = sys.vertex_off[i * nv + j];
  }
  std::size_t negative = 0;
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  for (const auto& c : sys.chains) {
    const std::size_t m = c.diag.size();
    if (m == 0) continue;
    // cs: coupling of the current node to the start vertex; carried along the chain.
    double cs = c.start >= 0 ? c.couple_start : 0.0;
    double pivot = c.diag[0] - sigma * c.mass[0];
    for (std::size_t i = 0;; ++i) {
      if (pivot == 0.0) pivot = tiny;
      if (pivot < 0) ++negative;
      const bool last = i + 1 == m;
      double ct = last && c.end >= 0 ? c.couple_end : 0.0;
      if (last) {
        if (c.start >= 0 && c.start == c.end) {
          double t = cs + ct;
          s[c.start * nv + c.start] -= t * t / pivot;
        } else {
          if (c.start >= 0) s[c.start * nv + c.start] -= cs * cs / pivot;
          if (c.end >= 0) s[c.end * nv + c.end] -= ct * ct / pivot;
          if (c.start >= 0 && c.end >= 0) {
            s[c.start * nv + c.end] -= cs * ct / pivot;
            s[c.end * nv + c.start] -= cs * ct / pivot;
          }
        }
        break;
      }
      if (c.start >= 0) s[c.start * nv + c.start] -= cs * cs / pivot;
      double off = c.off[i];
      double next_cs = -off * cs / pivot;
      pivot = c.diag[i + 1] - sigma * c.mass[i + 1] - off * off / pivot;
      cs = next_cs;
    }
  }
  if (nv > 0) {
    auto eig = jacobi_eig(s, nv, false);
    for (double v : eig.values)
      if (v < 0) ++negative;
  }
  return negative;
}

namespace {

double gershgorin_upper(const ChainSystem& sys) {
  double hi = 0.0;
  const std::size_t nv = sys.vertex_diag.size();
  for (std::size_t i = 0; i < nv; ++i) {
    double r = std::abs(sys.vertex_diag[i]);
    for (std::size_t j = 0; j < nv && !sys.vertex_off.empty(); ++j)
      if (j != i) r += std::abs(sys.vertex_off[i * nv + j]);
    for (const auto& c : sys.chains) {
      if (c.start == static_cast<long>(i)) r += std::abs(c.couple_start);
      if (c.end == static_cast<long>(i)) r += std::abs(c.couple_end);
    }
    hi = std::max(hi, r / sys.vertex_mass[i]);
  }
  for (const auto& c : sys.chains)
    for (std::size_t i = 0; i < c.diag.size(); ++i) {
      double r = std::abs(c.diag[i]);
      if (i > 0) r += std::abs(c.off[i - 1]);
      if (i + 1 < c.diag.size()) r += std::abs(c.off[i]);
      if (i == 0) r += std::abs(c.couple_start);
      if (i + 1 == c.diag.size()) r += std::abs(c.couple_end);
      hi = std::max(hi, r / c.mass[i]);
    }
  return hi;
}

double bisect_index(const ChainSystem& sys, std::size_t k, double lo, double hi, double tol) {
  // Invariant: count_below(lo) <= k < count_below(hi).
  while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi)) * 0.5) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (count_below(sys, mid) > k) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> lowest_eigenvalues(const ChainSystem& sys, std::size_t count, double tol, Backend backend) {
  count = std::min(count, sys.unknowns());
  double hi = gershgorin_upper(sys) * 1.01 + 1.0;
  double lo = -hi;
  std::vector<double> out(count);
  const long nc = static_cast<long>(count);
  if (backend == Backend::OpenMP) {
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < nc; ++k) out[k] = bisect_index(sys, static_cast<std::size_t>(k), lo, hi, tol);
  } else {
    for (long k = 0; k < nc; ++k) out[k] = bisect_index(sys, static_cast<std::size_t>(k), lo, hi, tol);
  }
  return out;
}

}  // namespace isoctl::kernels
