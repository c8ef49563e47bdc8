#include "isoctl/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace isoctl {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();

}  // namespace

Rational Rational::from_wide(__int128 num, __int128 den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax || num < -kMax || den > kMax) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  if (r.num_ == 0) r.den_ = 1;
  return r;
}

Rational::Rational(std::int64_t num) : num_(num), den_(1) {}

Rational::Rational(std::int64_t num, std::int64_t den) { *this = from_wide(num, den); }

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational& Rational::operator+=(const Rational& o) {
  *this = from_wide(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                    static_cast<__int128>(den_) * o.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
  *this = from_wide(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw std::domain_error("rational division by zero");
  *this = from_wide(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
  return *this;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Rational> Rational::parse(const std::string& text) {
  try {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      std::size_t p1 = 0, p2 = 0;
      long long n = std::stoll(text.substr(0, slash), &p1);
      long long d = std::stoll(text.substr(slash + 1), &p2);
      if (p1 != slash || p2 != text.size() - slash - 1 || d == 0) return std::nullopt;
      return Rational(n, d);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
      std::size_t p = 0;
      long long n = std::stoll(text, &p);
      if (p != text.size()) return std::nullopt;
      return Rational(n);
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac = text.size() - dot - 1;
    if (frac > 17) return std::nullopt;
    std::size_t p = 0;
    long long n = std::stoll(digits, &p);
    if (p != digits.size()) return std::nullopt;
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac; ++i) den *= 10;
    return Rational(n, den);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Rational Rational::approximate(double value, std::int64_t max_den) {
  // Convergents of the continued fraction expansion.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = value;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(x);
    if (std::abs(a) > 1e15) break;
    auto ai = static_cast<std::int64_t>(a);
    std::int64_t p2 = ai * p1 + p0;
    std::int64_t q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double frac = x - a;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  if (q1 == 0) return Rational(static_cast<std::int64_t>(std::llround(value)));
  return Rational(p1, q1);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

Scalar Scalar::operator-() const {
  if (exact_) return Scalar(-q_);
  return real(-v_);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) {
    try {
      return Scalar(a.q_ + b.q_);
    } catch (const std::overflow_error&) {
    }
  }
  return Scalar::real(a.v_ + b.v_);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) {
    try {
      return Scalar(a.q_ * b.q_);
    } catch (const std::overflow_error&) {
    }
  }
  // Exact zero annihilates even inexact factors.
  if ((a.exact_ && a.q_.is_zero()) || (b.exact_ && b.q_.is_zero())) return Scalar(0);
  return Scalar::real(a.v_ * b.v_);
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) {
    try {
      return Scalar(a.q_ / b.q_);
    } catch (const std::overflow_error&) {
    }
  }
  return Scalar::real(a.v_ / b.v_);
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) return a.q_ == b.q_;
  return a.v_ == b.v_;
}

std::string Scalar::to_string() const {
  if (exact_) return q_.to_string();
  std::ostringstream os;
  os.precision(17);
  os << v_;
  return os.str();
}

}  // namespace isoctl
