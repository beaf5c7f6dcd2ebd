#pragma once

// Exact field scalars: arbitrary-precision rationals (Q) or prime fields F_p.
// Every scalar carries its field tag; mixing tags in one operation is a hard
// error, as is reducing a rational with p in the denominator into F_p.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace opcalc {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct FieldMismatch : std::runtime_error {
  FieldMismatch() : std::runtime_error("scalar field tags do not match") {}
};

struct BadScalar : std::runtime_error {
  explicit BadScalar(const std::string& what) : std::runtime_error(what) {}
};

// p == 0 means Q; otherwise the prime p of F_p.
struct Field {
  std::int64_t p = 0;

  bool is_rational() const { return p == 0; }
  bool operator==(const Field& o) const { return p == o.p; }
  bool operator!=(const Field& o) const { return p != o.p; }

  std::string name() const { return p == 0 ? std::string("Q") : "F" + std::to_string(p); }

  static Field rationals() { return Field{0}; }
  static Field prime(std::int64_t p) {
    if (p < 2) throw BadScalar("field characteristic must be a prime >= 2");
    for (std::int64_t d = 2; d * d <= p; ++d)
      if (p % d == 0) throw BadScalar("field characteristic must be prime");
    return Field{p};
  }
};

namespace detail {

inline std::int64_t mod_pos(std::int64_t a, std::int64_t p) {
  std::int64_t r = a % p;
  return r < 0 ? r + p : r;
}

inline std::int64_t mod_inverse(std::int64_t a, std::int64_t p) {
  // extended Euclid; a is nonzero mod p
  std::int64_t t = 0, nt = 1, r = p, nr = mod_pos(a, p);
  while (nr != 0) {
    std::int64_t q = r / nr;
    std::int64_t tmp = t - q * nt; t = nt; nt = tmp;
    tmp = r - q * nr; r = nr; nr = tmp;
  }
  if (r != 1) throw BadScalar("element not invertible mod p");
  return mod_pos(t, p);
}

inline std::int64_t big_mod(const BigInt& a, std::int64_t p) {
  BigInt r = a % p;
  auto v = static_cast<std::int64_t>(r);
  return v < 0 ? v + p : v;
}

} // namespace detail

class Scalar {
  Field f_;
  BigRational v_; // over F_p: an integer representative in [0, p)

  void reduce_fp() {
    if (f_.is_rational()) return;
    BigInt num = boost::multiprecision::numerator(v_);
    BigInt den = boost::multiprecision::denominator(v_);
    std::int64_t dm = detail::big_mod(den, f_.p);
    if (dm == 0) throw BadScalar("denominator divisible by p in F_" + std::to_string(f_.p));
    std::int64_t nm = detail::big_mod(num, f_.p);
    v_ = BigRational(detail::mod_pos(nm * detail::mod_inverse(dm, f_.p), f_.p));
  }

public:
  Scalar() : f_{Field::rationals()}, v_(0) {}
  Scalar(Field f, BigRational v) : f_(f), v_(std::move(v)) { reduce_fp(); }
  Scalar(Field f, long long v) : f_(f), v_(v) { reduce_fp(); }

  static Scalar zero(Field f) { return Scalar(f, 0); }
  static Scalar one(Field f) { return Scalar(f, 1); }
  static Scalar integer(Field f, long long n) { return Scalar(f, n); }
  // (-1)^k
  static Scalar sign(Field f, long long k) { return Scalar(f, (k % 2 == 0) ? 1 : -1); }

  const Field& field() const { return f_; }
  const BigRational& value() const { return v_; }
  bool is_zero() const { return v_ == 0; }
  bool is_one() const { return v_ == 1; }

  void expect_field(const Field& f) const {
    if (f_ != f) throw FieldMismatch();
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    a.expect_field(b.f_);
    return Scalar(a.f_, a.v_ + b.v_);
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    a.expect_field(b.f_);
    return Scalar(a.f_, a.v_ - b.v_);
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    a.expect_field(b.f_);
    return Scalar(a.f_, a.v_ * b.v_);
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    a.expect_field(b.f_);
    if (b.is_zero()) throw BadScalar("division by zero");
    if (a.f_.is_rational()) return Scalar(a.f_, a.v_ / b.v_);
    std::int64_t inv = detail::mod_inverse(static_cast<std::int64_t>(boost::multiprecision::numerator(b.v_)), a.f_.p);
    return Scalar(a.f_, a.v_ * inv);
  }
  Scalar operator-() const { return Scalar(f_, -v_); }
  Scalar inverse() const { return one(f_) / *this; }

  Scalar& operator+=(const Scalar& b) { *this = *this + b; return *this; }
  Scalar& operator-=(const Scalar& b) { *this = *this - b; return *this; }
  Scalar& operator*=(const Scalar& b) { *this = *this * b; return *this; }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.f_ == b.f_ && a.v_ == b.v_;
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  // Canonical rendering: Q as "num/den" (den >= 1, reduced), F_p as the
  // representative in [0, p).
  std::string str() const {
    if (f_.is_rational()) {
      BigInt num = boost::multiprecision::numerator(v_);
      BigInt den = boost::multiprecision::denominator(v_);
      return num.str() + "/" + den.str();
    }
    return boost::multiprecision::numerator(v_).str();
  }

  static Scalar parse(Field f, const std::string& s) {
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Scalar(f, BigRational(BigInt(s)));
      BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
      if (den == 0) throw BadScalar("zero denominator in scalar literal");
      return Scalar(f, BigRational(num, den));
    } catch (const std::exception& e) {
      throw BadScalar("cannot parse scalar '" + s + "': " + e.what());
    }
  }
};

} // namespace opcalc
