#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <string>
#include <variant>

#include <gmpxx.h>

#include "qism/errors.hpp"

namespace qism {

using Rational = mpq_class;
using Complex = std::complex<double>;

enum class Mode { Exact, Float };

/// Magnitudes below this are treated as a literal pole when dividing in Float
/// mode. Identity checks never use it; they compare against a Tolerance.
inline constexpr double kPoleThreshold = 1e-300;

struct Tolerance {
  double absolute = 1e-11;
  double relative = 1e-11;

  Tolerance() = default;
  Tolerance(double abs_tol, double rel_tol) : absolute(abs_tol), relative(rel_tol) {
    if (!std::isfinite(abs_tol) || !std::isfinite(rel_tol) || abs_tol < 0 || rel_tol < 0)
      throw Error(ErrorCode::InvalidArgument, "tolerances must be finite and non-negative");
  }
};

template <class F>
struct FieldTraits;

/// Exact rationals. Magnitudes stay exact so that "residual == 0" is literal.
template <>
struct FieldTraits<Rational> {
  using Magnitude = Rational;
  static constexpr Mode mode = Mode::Exact;

  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static Rational from_int(long v) { return Rational(v); }
  static bool is_zero(const Rational& x) { return sgn(x) == 0; }
  static Magnitude magnitude(const Rational& x) { return abs(x); }
  static Magnitude zero_magnitude() { return Rational(0); }
  static double to_double(const Magnitude& m) { return m.get_d(); }
  static Rational div(const Rational& a, const Rational& b) {
    if (sgn(b) == 0) throw Error(ErrorCode::DivisionByZero, "exact division by zero");
    Rational q = a / b;
    q.canonicalize();
    return q;
  }
  static Rational conj(const Rational& x) { return x; }
};

template <>
struct FieldTraits<Complex> {
  using Magnitude = double;
  static constexpr Mode mode = Mode::Float;

  static Complex zero() { return {0.0, 0.0}; }
  static Complex one() { return {1.0, 0.0}; }
  static Complex from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static bool is_zero(const Complex& x) { return x == Complex{}; }
  static Magnitude magnitude(const Complex& x) { return std::abs(x); }
  static Magnitude zero_magnitude() { return 0.0; }
  static double to_double(Magnitude m) { return m; }
  static Complex div(const Complex& a, const Complex& b) {
    if (!(std::abs(b) >= kPoleThreshold))
      throw Error(ErrorCode::NearPole, "float division by a value below the pole threshold");
    return a / b;
  }
  static Complex conj(const Complex& x) { return std::conj(x); }
};

template <class F>
concept Field = requires { typename FieldTraits<F>::Magnitude; };

template <Field F>
using Magnitude = typename FieldTraits<F>::Magnitude;

template <Field F>
constexpr bool is_exact_v = FieldTraits<F>::mode == Mode::Exact;

template <Field F>
F field_div(const F& a, const F& b) {
  return FieldTraits<F>::div(a, b);
}

template <Field F>
Magnitude<F> magnitude(const F& x) {
  return FieldTraits<F>::magnitude(x);
}

template <Field F>
bool is_zero(const F& x) {
  return FieldTraits<F>::is_zero(x);
}

/// Exact zero in Exact mode; below the pole threshold in Float mode.
template <Field F>
bool is_negligible(const F& x) {
  if constexpr (is_exact_v<F>) return FieldTraits<F>::is_zero(x);
  else return !(FieldTraits<F>::magnitude(x) >= kPoleThreshold);
}

inline Complex to_complex(const Rational& q) { return {q.get_d(), 0.0}; }
inline Complex to_complex(const Complex& z) { return z; }

/// "p/q" form, always with an explicit denominator.
inline std::string rational_to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

/// Accepts "p", "p/q", with optional sign. Throws InvalidArgument otherwise.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "empty rational literal");
  Rational q;
  if (q.set_str(text, 10) != 0)
    throw Error(ErrorCode::InvalidArgument, "malformed rational literal '" + text + "'");
  if (sgn(q.get_den()) == 0)
    throw Error(ErrorCode::DivisionByZero, "zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

/// Runtime-tagged field element, used where the arithmetic mode is only known
/// at run time (configuration parsing, reports). The numerical core is
/// templated on Rational / Complex directly.
class Scalar {
 public:
  Scalar() : value_(Rational(0)) {}
  explicit Scalar(Rational q) : value_(std::move(q)) {}
  explicit Scalar(Complex z) : value_(z) {}
  static Scalar exact(long num, long den = 1) {
    if (den == 0) throw Error(ErrorCode::DivisionByZero, "zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return Scalar(q);
  }
  static Scalar real(double re, double im = 0.0) { return Scalar(Complex{re, im}); }

  Mode mode() const { return std::holds_alternative<Rational>(value_) ? Mode::Exact : Mode::Float; }
  bool is_exact() const { return mode() == Mode::Exact; }
  const Rational& rational() const {
    if (!is_exact()) throw Error(ErrorCode::ModeMismatch, "scalar is not exact");
    return std::get<Rational>(value_);
  }
  const Complex& complex() const {
    if (is_exact()) throw Error(ErrorCode::ModeMismatch, "scalar is not floating");
    return std::get<Complex>(value_);
  }
  bool is_zero() const {
    return is_exact() ? sgn(rational()) == 0 : complex() == Complex{};
  }

  /// Float value of either mode; exact values are rounded.
  Complex to_complex() const { return is_exact() ? qism::to_complex(rational()) : complex(); }

  template <Field F>
  F as() const {
    if constexpr (is_exact_v<F>) return rational();
    else return complex();
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    return binary(a, b, [](const auto& x, const auto& y) { return x + y; });
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    return binary(a, b, [](const auto& x, const auto& y) { return x - y; });
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    return binary(a, b, [](const auto& x, const auto& y) { return x * y; });
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    check_mode(a, b);
    if (a.is_exact()) return Scalar(FieldTraits<Rational>::div(a.rational(), b.rational()));
    return Scalar(FieldTraits<Complex>::div(a.complex(), b.complex()));
  }
  Scalar operator-() const {
    if (is_exact()) return Scalar(Rational(-rational()));
    return Scalar(-complex());
  }
  friend bool operator==(const Scalar& a, const Scalar& b) {
    check_mode(a, b);
    if (a.is_exact()) return a.rational() == b.rational();
    return a.complex() == b.complex();
  }

  std::string to_string() const;

 private:
  static void check_mode(const Scalar& a, const Scalar& b) {
    if (a.mode() != b.mode())
      throw Error(ErrorCode::ModeMismatch, "operands have different arithmetic modes");
  }
  template <class Op>
  static Scalar binary(const Scalar& a, const Scalar& b, Op op) {
    check_mode(a, b);
    if (a.is_exact()) {
      Rational r = op(a.rational(), b.rational());
      r.canonicalize();
      return Scalar(r);
    }
    return Scalar(Complex(op(a.complex(), b.complex())));
  }

  std::variant<Rational, Complex> value_;
};

inline Scalar conj(const Scalar& x) {
  return x.is_exact() ? x : Scalar(std::conj(x.complex()));
}

/// |x|; exact input yields an exact non-negative rational, float input a
/// real-valued complex.
inline Scalar abs(const Scalar& x) {
  if (x.is_exact()) return Scalar(Rational(::abs(x.rational())));
  return Scalar(Complex{std::abs(x.complex()), 0.0});
}

/// Complex hyperbolic sine. Not defined in Exact mode (sinh of a rational is
/// not rational in general).
inline Scalar sinh_scalar(const Scalar& z) {
  if (z.is_exact())
    throw Error(ErrorCode::ExactModeUnsupported, "sinh requires Float mode");
  return Scalar(std::sinh(z.complex()));
}

inline std::string Scalar::to_string() const {
  if (is_exact()) return rational_to_string(rational());
  const Complex z = complex();
  return "(" + std::to_string(z.real()) + "," + std::to_string(z.imag()) + ")";
}

}  // namespace qism
