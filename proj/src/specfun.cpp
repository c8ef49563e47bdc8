#include "isoctl/specfun.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "isoctl/error.hpp"

namespace isoctl {

namespace {

constexpr double kPi = std::numbers::pi;

double bessel_series(int n, double x) {
  double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;
  double sum = term;
  double q = half * half;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Miller's backward recurrence normalized by J_0 + 2 sum J_{2k} = 1.
double bessel_miller(int n, double x) {
  int top = static_cast<int>(std::max<double>(n, x)) + 30 + static_cast<int>(std::sqrt(40.0 * std::max<double>(n, x)));
  top += top % 2;
  double jp1 = 0.0, j = 1e-300, result = 0.0, norm = 0.0;
  for (int k = top; k >= 1; --k) {
    double jm1 = 2.0 * k / x * j - jp1;
    jp1 = j;
    j = jm1;
    if (k - 1 == n) result = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      result *= 1e-250;
      norm *= 1e-250;
    }
  }
  norm += j;  // J_0 term
  return result / norm;
}

}  // namespace

double bessel_j(int n, double x) {
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_j(-n, x);
  if (x < 0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_j(n, -x);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x <= 12.0) return bessel_series(n, x);
  return bessel_miller(n, x);
}

double bessel_j_prime(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

namespace {

double bisect_zero(int n, double lo, double hi) {
  double flo = bessel_j(n, lo);
  double fhi = bessel_j(n, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw Error(ErrorCode::ConvergenceFailure, "bracket without sign change for J_" + std::to_string(n));
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = bessel_j(n, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::vector<double>> build_zeros(int n_max, int k_max) {
  // Order n needs order n-1 zeros up to index k+1 for interlacing brackets.
  std::vector<std::vector<double>> z(n_max + 1);
  int count0 = k_max + n_max + 1;
  for (int k = 1; k <= count0; ++k) {
    double beta = (k - 0.25) * kPi;
    double guess = beta + 1.0 / (8.0 * beta);
    z[0].push_back(bisect_zero(0, std::max(1e-3, guess - 1.0), guess + 1.0));
  }
  for (int n = 1; n <= n_max; ++n) {
    int count = k_max + n_max + 1 - n;
    // The first zero lies in (j_{n-1,1}, j_{n-1,2}); the rest interlace likewise.
    for (int k = 1; k <= count; ++k) z[n].push_back(bisect_zero(n, z[n - 1][k - 1], z[n - 1][k]));
  }
  return z;
}

}  // namespace

BesselZeroTable::BesselZeroTable(int n_max, int k_max) : n_max_(n_max), k_max_(k_max) {
  zeros_ = build_zeros(n_max, k_max);
}

double BesselZeroTable::operator()(int n, int k) const {
  if (n < 0 || n > n_max_ || k < 1 || k > k_max_)
    throw Error(ErrorCode::InvalidArgument, "Bessel zero index out of table range");
  return zeros_[n][k - 1];
}

double bessel_zero(int n, int k) {
  if (n < 0 || n > 20 || k < 1 || k > 50) throw Error(ErrorCode::InvalidArgument, "bessel_zero needs n <= 20, k <= 50");
  static std::once_flag once;
  static const BesselZeroTable* table = nullptr;
  std::call_once(once, [] { table = new BesselZeroTable(20, 50); });
  return (*table)(n, k);
}

double legendre_p(int l, int m, double t) {
  if (l < 0 || std::abs(m) > l) throw Error(ErrorCode::InvalidArgument, "legendre_p needs |m| <= l");
  if (m < 0) {
    int am = -m;
    double ratio = 1.0;  // (l-am)!/(l+am)!
    for (int i = l - am + 1; i <= l + am; ++i) ratio /= i;
    return (am % 2 == 0 ? 1.0 : -1.0) * ratio * legendre_p(l, am, t);
  }
  double pmm = 1.0;
  double s = std::sqrt(std::max(0.0, (1.0 - t) * (1.0 + t)));
  double fact = 1.0;
  for (int i = 1; i <= m; ++i) {
    pmm *= -fact * s;
    fact += 2.0;
  }
  if (l == m) return pmm;
  double pm1 = t * (2 * m + 1) * pmm;
  if (l == m + 1) return pm1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (t * (2 * ll - 1) * pm1 - (ll + m - 1) * pmm) / (ll - m);
    pmm = pm1;
    pm1 = pll;
  }
  return pll;
}

std::complex<double> spherical_harmonic(int l, int m, double alpha, double beta) {
  double ratio = 1.0;  // (l-m)!/(l+m)!, any sign of m
  if (m >= 0)
    for (int i = l - m + 1; i <= l + m; ++i) ratio /= i;
  else
    for (int i = l + m + 1; i <= l - m; ++i) ratio *= i;
  double norm = std::sqrt((2 * l + 1) / (4 * kPi) * ratio);
  return norm * legendre_p(l, m, std::cos(alpha)) * std::polar(1.0, m * beta);
}

double hermite_fn(int k, double x) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "hermite_fn needs k >= 0");
  double p0 = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (k == 0) return p0;
  double p1 = std::sqrt(2.0) * x * p0;
  for (int j = 1; j < k; ++j) {
    double p2 = std::sqrt(2.0 / (j + 1)) * x * p1 - std::sqrt(static_cast<double>(j) / (j + 1)) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace isoctl
