#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace isoctl {

/// Exact rational number with 64-bit numerator/denominator.
///
/// Always normalized: den > 0 and gcd(|num|, den) == 1. Arithmetic throws
/// std::overflow_error when an intermediate result does not fit.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num);  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  std::string to_string() const;

  /// Parses "p", "p/q" or a plain decimal literal such as "0.25".
  static std::optional<Rational> parse(const std::string& text);

  /// Best approximation with denominator <= max_den (continued fractions).
  static Rational approximate(double value, std::int64_t max_den);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Coefficient that stays an exact rational as long as every input is exact
/// and no operation overflows; otherwise it degrades to a double.
class Scalar {
 public:
  Scalar() = default;
  Scalar(const Rational& r) : exact_(true), q_(r), v_(r.to_double()) {}  // NOLINT
  Scalar(std::int64_t n) : Scalar(Rational(n)) {}                        // NOLINT
  Scalar(int n) : Scalar(Rational(n)) {}                                 // NOLINT
  static Scalar real(double v) {
    Scalar s;
    s.exact_ = false;
    s.v_ = v;
    return s;
  }

  bool is_exact() const { return exact_; }
  const Rational& exact() const { return q_; }
  double value() const { return v_; }
  bool is_zero() const { return exact_ ? q_.is_zero() : v_ == 0.0; }

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  /// Exact equality when both sides are exact, bitwise double equality otherwise.
  friend bool operator==(const Scalar& a, const Scalar& b);
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  std::string to_string() const;

 private:
  bool exact_ = true;
  Rational q_{};
  double v_ = 0.0;
};

}  // namespace isoctl
