#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace isoctl::kernels {

/// Every kernel has a serial reference and an OpenMP variant computing the
/// same thing; tests compare the two.
enum class Backend { Serial, OpenMP };

struct SymEig {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // row j is the unit eigenvector of values[j]; empty if not requested
  std::size_t n = 0;
};

/// Dense symmetric eigensolver: Householder tridiagonalization followed by
/// implicit QL. `a` is row-major n x n and must be symmetric.
SymEig sym_eig(const std::vector<double>& a, std::size_t n, bool want_vectors, Backend backend = Backend::OpenMP);

/// Reduces `a` in place; returns diagonal/off-diagonal of T and, if requested,
/// Q^T stored row-major so that T = Q^T A Q.
void tridiagonalize(std::vector<double>& a, std::size_t n, std::vector<double>& d, std::vector<double>& e,
                    std::vector<double>* qt, Backend backend);
/// Implicit QL on (d, e) with e[i] = T(i, i+1). Rotations are applied to the
/// rows of zt when given. Returns false if an eigenvalue failed to converge.
bool tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>* zt, std::size_t n);

/// Small dense symmetric eigenproblem by cyclic Jacobi (ascending values).
SymEig jacobi_eig(std::vector<double> a, std::size_t n, bool want_vectors);
/// Singular values of a small row-major rows x cols matrix (one-sided Jacobi),
/// descending; right singular vectors as rows of v when requested.
std::vector<double> singular_values(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                                    std::vector<double>* v = nullptr);

/// Real basis B (row-major, samples x modes), quadrature weights w.
/// project: c_k = sum_i B[i,k] w_i psi_i.  resum: psi_i = sum_k B[i,k] c_k.
void project(const std::vector<double>& basis, std::size_t samples, std::size_t modes, const std::vector<double>& w,
             const std::vector<std::complex<double>>& psi, std::vector<std::complex<double>>& coeffs, Backend backend);
void resum(const std::vector<double>& basis, std::size_t samples, std::size_t modes,
           const std::vector<std::complex<double>>& coeffs, std::vector<std::complex<double>>& psi, Backend backend);

/// Sparse structure of K - sigma M where M is diagonal: vertex unknowns joined
/// by chains of interior unknowns (tridiagonal along the chain).
struct Chain {
  long start = -1;  // vertex index, -1 when eliminated (Dirichlet)
  long end = -1;
  double couple_start = 0.0;      // K entry between first interior node and start vertex
  double couple_end = 0.0;        // K entry between last interior node and end vertex
  std::vector<double> diag;       // K diagonal of interior nodes
  std::vector<double> off;        // K entries between consecutive interior nodes
  std::vector<double> mass;       // M diagonal of interior nodes
};

struct ChainSystem {
  std::vector<double> vertex_diag;  // K diagonal at vertices
  std::vector<double> vertex_mass;
  std::vector<double> vertex_off;   // nv x nv row-major, direct vertex-vertex K entries
  std::vector<Chain> chains;
  std::size_t unknowns() const;
};

/// Number of generalized eigenvalues below sigma (Sylvester inertia of K - sigma M).
std::size_t count_below(const ChainSystem& sys, double sigma);
/// Lowest `count` generalized eigenvalues by bisection on count_below, each to
/// absolute tolerance tol. The OpenMP backend runs the shifts in parallel.
std::vector<double> lowest_eigenvalues(const ChainSystem& sys, std::size_t count, double tol, Backend backend);

}  // namespace isoctl::kernels
