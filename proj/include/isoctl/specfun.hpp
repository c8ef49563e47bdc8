#pragma once

#include <complex>
#include <vector>

namespace isoctl {

/// J_n(x) for n >= 0, x >= 0.
double bessel_j(int n, double x);
/// d/dx J_n(x) = (J_{n-1} - J_{n+1}) / 2, with J_{-1} = -J_1.
double bessel_j_prime(int n, double x);

/// k-th positive zero of J_n (k >= 1); n <= 20, k <= 50.
double bessel_zero(int n, int k);

/// Zeros j_{n,k} for n <= n_max, k <= k_max, computed once on construction.
class BesselZeroTable {
 public:
  BesselZeroTable(int n_max, int k_max);
  double operator()(int n, int k) const;
  int n_max() const { return n_max_; }
  int k_max() const { return k_max_; }

 private:
  int n_max_, k_max_;
  std::vector<std::vector<double>> zeros_;  // zeros_[n][k-1]
};

/// Associated Legendre function with the Condon-Shortley phase, |m| <= l.
double legendre_p(int l, int m, double t);
/// Y_l^m(alpha, beta) with alpha the polar angle and beta the azimuth.
std::complex<double> spherical_harmonic(int l, int m, double alpha, double beta);

/// Orthonormal Hermite function Phi_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi)).
double hermite_fn(int k, double x);

}  // namespace isoctl
