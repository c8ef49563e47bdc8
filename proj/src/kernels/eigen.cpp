#include <algorithm>
#include <cmath>
#include <numeric>

#include "isoctl/error.hpp"
#include "isoctl/kernels.hpp"

namespace isoctl::kernels {

namespace {

// Householder vector for column k below the diagonal. Returns alpha, the new
// subdiagonal entry; v is unit length or all zero when no reflection is needed.
double householder(const std::vector<double>& a, std::size_t n, std::size_t k, std::vector<double>& v) {
  const std::size_t m = n - k - 1;
  v.assign(m, 0.0);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    v[i] = a[(k + 1 + i) * n + k];
    norm2 += v[i] * v[i];
  }
  double norm = std::sqrt(norm2);
  if (norm == 0.0) return 0.0;
  double alpha = v[0] > 0 ? -norm : norm;
  v[0] -= alpha;
  double vn = 0.0;
  for (double x : v) vn += x * x;
  vn = std::sqrt(vn);
  if (vn == 0.0) {
    v.assign(m, 0.0);
    return alpha;
  }
  for (double& x : v) x /= vn;
  return alpha;
}

void tridiagonalize_serial(std::vector<double>& a, std::size_t n, std::vector<std::vector<double>>& reflectors) {
  std::vector<double> v, p;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = householder(a, n, k, v);
    const std::size_t m = v.size();
    const std::size_t o = k + 1;
    p.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &a[(o + i) * n + o];
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += row[j] * v[j];
      p[i] = 2.0 * s;
    }
    double kv = 0.0;
    for (std::size_t i = 0; i < m; ++i) kv += v[i] * p[i];
    for (std::size_t i = 0; i < m; ++i) p[i] -= kv * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      double* row = &a[(o + i) * n + o];
      for (std::size_t j = 0; j < m; ++j) row[j] -= v[i] * p[j] + p[i] * v[j];
    }
    for (std::size_t i = 0; i < m; ++i) a[(o + i) * n + k] = a[k * n + o + i] = 0.0;
    a[o * n + k] = a[k * n + o] = alpha;
    reflectors[k] = v;
  }
}

void tridiagonalize_omp(std::vector<double>& a, std::size_t n, std::vector<std::vector<double>>& reflectors) {
  std::vector<double> v, p;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = householder(a, n, k, v);
    const long m = static_cast<long>(v.size());
    const std::size_t o = k + 1;
    p.assign(m, 0.0);
    double* ap = a.data();
    const double* vp = v.data();
    double* pp = p.data();
#pragma omp parallel for schedule(static) if (m > 64)
    for (long i = 0; i < m; ++i) {
      const double* row = ap + (o + i) * n + o;
      double s = 0.0;
      for (long j = 0; j < m; ++j) s += row[j] * vp[j];
      pp[i] = 2.0 * s;
    }
    double kv = 0.0;
    for (long i = 0; i < m; ++i) kv += vp[i] * pp[i];
    for (long i = 0; i < m; ++i) pp[i] -= kv * vp[i];
#pragma omp parallel for schedule(static) if (m > 64)
    for (long i = 0; i < m; ++i) {
      double* row = ap + (o + i) * n + o;
      const double vi = vp[i], pi = pp[i];
      for (long j = 0; j < m; ++j) row[j] -= vi * pp[j] + pi * vp[j];
    }
    for (long i = 0; i < m; ++i) a[(o + i) * n + k] = a[k * n + o + i] = 0.0;
    a[o * n + k] = a[k * n + o] = alpha;
    reflectors[k] = v;
  }
}

// Q = H_0 H_1 ... accumulated backwards so each step touches a shrinking block.
std::vector<double> accumulate_serial(const std::vector<std::vector<double>>& refl, std::size_t n) {
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  std::vector<double> w(n);
  for (std::size_t kk = refl.size(); kk-- > 0;) {
    const auto& v = refl[kk];
    const std::size_t o = kk + 1;
    const std::size_t m = v.size();
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &q[(o + i) * n];
      for (std::size_t j = o; j < n; ++j) w[j] += v[i] * row[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
      double* row = &q[(o + i) * n];
      for (std::size_t j = o; j < n; ++j) row[j] -= 2.0 * v[i] * w[j];
    }
  }
  return q;
}

std::vector<double> accumulate_omp(const std::vector<std::vector<double>>& refl, std::size_t n) {
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  std::vector<double> w(n);
  for (std::size_t kk = refl.size(); kk-- > 0;) {
    const auto& v = refl[kk];
    const long o = static_cast<long>(kk + 1);
    const long m = static_cast<long>(v.size());
    const long nn = static_cast<long>(n);
    double* qp = q.data();
    double* wp = w.data();
    const double* vp = v.data();
#pragma omp parallel for schedule(static) if (m > 64)
    for (long j = o; j < nn; ++j) {
      double s = 0.0;
      for (long i = 0; i < m; ++i) s += vp[i] * qp[(o + i) * nn + j];
      wp[j] = s;
    }
#pragma omp parallel for schedule(static) if (m > 64)
    for (long i = 0; i < m; ++i) {
      double* row = qp + (o + i) * nn;
      const double vi = 2.0 * vp[i];
      for (long j = o; j < nn; ++j) row[j] -= vi * wp[j];
    }
  }
  return q;
}

void sort_pairs(SymEig& r) {
  const std::size_t n = r.values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.values[a] < r.values[b]; });
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = r.values[idx[i]];
  if (!r.vectors.empty()) {
    const std::size_t len = r.vectors.size() / n;
    std::vector<double> vecs(r.vectors.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double* src = &r.vectors[idx[i] * len];
      double* dst = &vecs[i * len];
      // Deterministic sign: the largest-magnitude component is positive.
      std::size_t arg = 0;
      for (std::size_t k = 1; k < len; ++k)
        if (std::abs(src[k]) > std::abs(src[arg]) + 1e-12) arg = k;
      double s = src[arg] < 0 ? -1.0 : 1.0;
      for (std::size_t k = 0; k < len; ++k) dst[k] = s * src[k];
    }
    r.vectors = std::move(vecs);
  }
  r.values = std::move(vals);
}

}  // namespace

void tridiagonalize(std::vector<double>& a, std::size_t n, std::vector<double>& d, std::vector<double>& e,
                    std::vector<double>* qt, Backend backend) {
  std::vector<std::vector<double>> refl(n > 2 ? n - 2 : 0);
  if (backend == Backend::OpenMP) tridiagonalize_omp(a, n, refl);
  else tridiagonalize_serial(a, n, refl);
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i];
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = a[(i + 1) * n + i];
  if (qt) {
    auto q = backend == Backend::OpenMP ? accumulate_omp(refl, n) : accumulate_serial(refl, n);
    qt->assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (*qt)[j * n + i] = q[i * n + j];
  }
}

bool tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>* zt, std::size_t n) {
  if (n == 0) return true;
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 80) return false;
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool early = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (zt) {
            double* zi = &(*zt)[i * n];
            double* zi1 = &(*zt)[(i + 1) * n];
            for (std::size_t k = 0; k < n; ++k) {
              double t = zi1[k];
              zi1[k] = s * zi[k] + c * t;
              zi[k] = c * zi[k] - s * t;
            }
          }
        }
        if (early) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  return true;
}

SymEig sym_eig(const std::vector<double>& a_in, std::size_t n, bool want_vectors, Backend backend) {
  if (a_in.size() != n * n) throw Error(ErrorCode::InvalidArgument, "sym_eig: matrix size mismatch");
  std::vector<double> a = a_in;
  SymEig r;
  r.n = n;
  std::vector<double> e;
  tridiagonalize(a, n, r.values, e, want_vectors ? &r.vectors : nullptr, backend);
  if (!tridiagonal_ql(r.values, e, want_vectors ? &r.vectors : nullptr, n))
    throw Error(ErrorCode::ConvergenceFailure, "implicit QL did not converge");
  sort_pairs(r);
  return r;
}

SymEig jacobi_eig(std::vector<double> a, std::size_t n, bool want_vectors) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (i == j ? scale : off) += a[i * n + j] * a[i * n + j];
    if (off <= 1e-30 * (scale + off) || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (apq == 0.0) continue;
        double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
  }
  SymEig r;
  r.n = n;
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.values[i] = a[i * n + i];
  if (want_vectors) {
    r.vectors.resize(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) r.vectors[j * n + k] = v[k * n + j];
  }
  sort_pairs(r);
  return r;
}

std::vector<double> singular_values(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                                    std::vector<double>* vout) {
  // Columns of u are rotated until mutually orthogonal; their norms are the singular values.
  std::vector<double> u(a);
  std::vector<double> v(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) v[i * cols + i] = 1.0;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < cols; ++p)
      for (std::size_t q = p + 1; q < cols; ++q) {
        double al = 0, be = 0, ga = 0;
        for (std::size_t i = 0; i < rows; ++i) {
          double up = u[i * cols + p], uq = u[i * cols + q];
          al += up * up;
          be += uq * uq;
          ga += up * uq;
        }
        if (ga == 0.0 || std::abs(ga) <= 1e-15 * std::sqrt(al * be)) continue;
        rotated = true;
        double zeta = (be - al) / (2.0 * ga);
        double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          double up = u[i * cols + p], uq = u[i * cols + q];
          u[i * cols + p] = c * up - s * uq;
          u[i * cols + q] = s * up + c * uq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          double vp = v[i * cols + p], vq = v[i * cols + q];
          v[i * cols + p] = c * vp - s * vq;
          v[i * cols + q] = s * vp + c * vq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += u[i * cols + j] * u[i * cols + j];
    sv[j] = std::sqrt(s);
  }
  std::vector<std::size_t> idx(cols);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });
  std::vector<double> sorted(cols);
  for (std::size_t j = 0; j < cols; ++j) sorted[j] = sv[idx[j]];
  if (vout) {
    vout->assign(cols * cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t k = 0; k < cols; ++k) (*vout)[j * cols + k] = v[k * cols + idx[j]];
  }
  return sorted;
}

}  // namespace isoctl::kernels
