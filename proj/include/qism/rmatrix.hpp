#pragma once

#include <array>
#include <complex>

#include "qism/dense.hpp"
#include "qism/errors.hpp"
#include "qism/scalar.hpp"

namespace qism {

enum class KernelKind { Rational, Trigonometric };

/// The structure functions (f, g) of the R-matrix, together with the local
/// spin-1/2 data that goes with them. Trigonometric kernels only exist over
/// Complex: sinh leaves the rationals.
template <Field F>
class Kernel {
 public:
  static Kernel rational() { return Kernel(KernelKind::Rational, FieldTraits<F>::zero()); }

  static Kernel trigonometric(const F& eta)
    requires(!is_exact_v<F>)
  {
    if (!(std::abs(std::sinh(eta)) >= kPoleThreshold))
      throw Error(ErrorCode::DegenerateKernel, "sinh(eta) vanishes; g would be identically zero");
    return Kernel(KernelKind::Trigonometric, eta);
  }

  KernelKind kind() const { return kind_; }
  const F& eta() const { return eta_; }

  /// f(l, m): (x+1)/x or sinh(x+eta)/sinh(x), x = l - m.
  F f(const F& l, const F& m) const { return field_div(shifted(l - m), checked_denominator(l - m)); }

  /// g(l, m): 1/x or sinh(eta)/sinh(x).
  F g(const F& l, const F& m) const { return field_div(creation_weight(), checked_denominator(l - m)); }

  /// f(l, m) / g(l, m) with the common pole cancelled: x+1 or sinh(x+eta)/sinh(eta).
  F f_over_g(const F& l, const F& m) const {
    if (kind_ == KernelKind::Rational) return shifted(l - m);
    return field_div(shifted(l - m), creation_weight());
  }

  /// Local vacuum eigenvalue alpha(u) of the L-operator, u = lambda - xi.
  F alpha(const F& u) const { return shifted(u); }
  /// Local vacuum eigenvalue delta(u).
  F delta(const F& u) const { return plain(u); }
  /// Coefficient of sigma^-/sigma^+ in the off-diagonal L-operator entries.
  F creation_weight() const {
    if constexpr (is_exact_v<F>) {
      return FieldTraits<F>::one();
    } else {
      if (kind_ == KernelKind::Rational) return FieldTraits<F>::one();
      return std::sinh(eta_);
    }
  }

  /// Distance used to keep probes away from poles: |x| or |sinh x|.
  double pole_distance(const F& l, const F& m) const {
    return FieldTraits<F>::to_double(magnitude<F>(plain(l - m)));
  }

 private:
  Kernel(KernelKind kind, F eta) : kind_(kind), eta_(std::move(eta)) {}

  F plain(const F& x) const {
    if constexpr (is_exact_v<F>) {
      return x;
    } else {
      if (kind_ == KernelKind::Rational) return x;
      return std::sinh(x);
    }
  }
  F shifted(const F& x) const {
    if constexpr (is_exact_v<F>) {
      Rational r = x + 1;
      return r;
    } else {
      if (kind_ == KernelKind::Rational) return x + 1.0;
      return std::sinh(x + eta_);
    }
  }
  F checked_denominator(const F& x) const {
    F d = plain(x);
    bool pole;
    if constexpr (is_exact_v<F>) pole = is_zero(d);
    else pole = !(std::abs(d) >= kPoleThreshold);
    if (pole) throw Error(ErrorCode::PoleAtCoincidentArguments, "kernel evaluated at its pole");
    return d;
  }

  KernelKind kind_;
  F eta_;
};

template <Field F>
F kernel_f(const Kernel<F>& k, const F& l, const F& m) {
  return k.f(l, m);
}

template <Field F>
F kernel_g(const Kernel<F>& k, const F& l, const F& m) {
  return k.g(l, m);
}

/// 4x4 R-matrix on V1 (x) V2 in the basis |11>, |12>, |21>, |22>.
template <Field F>
struct RMatrix4 {
  Matrix<F> entries{4, 4};

  const F& operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
};

template <Field F>
RMatrix4<F> build_r_matrix(const Kernel<F>& k, const F& l, const F& m) {
  const F f = k.f(l, m);
  const F g = k.g(l, m);
  RMatrix4<F> r;
  r.entries(0, 0) = f;
  r.entries(1, 1) = FieldTraits<F>::one();
  r.entries(1, 2) = g;
  r.entries(2, 1) = g;
  r.entries(2, 2) = FieldTraits<F>::one();
  r.entries(3, 3) = f;
  return r;
}

namespace detail {

/// Embeds a two-space operator acting on spaces (p, q), p < q, into the
/// three-space product V1 (x) V2 (x) V3 (first factor slowest).
template <Field F>
Matrix<F> embed_pair(const Matrix<F>& r, int p, int q) {
  Matrix<F> out(8, 8);
  auto bit = [](std::size_t idx, int space) { return (idx >> (2 - space)) & 1u; };
  for (std::size_t row = 0; row < 8; ++row)
    for (std::size_t col = 0; col < 8; ++col) {
      const int other = 3 - p - q;
      if (bit(row, other) != bit(col, other)) continue;
      const std::size_t rr = bit(row, p) * 2 + bit(row, q);
      const std::size_t cc = bit(col, p) * 2 + bit(col, q);
      out(row, col) = r(rr, cc);
    }
  return out;
}

}  // namespace detail

/// Max-norm of R12 R13 R23 - R23 R13 R12 as 8x8 matrices.
template <Field F>
Magnitude<F> yang_baxter_residual(const Kernel<F>& k, const F& l1, const F& l2, const F& l3) {
  const Matrix<F> r12 = detail::embed_pair(build_r_matrix(k, l1, l2).entries, 0, 1);
  const Matrix<F> r13 = detail::embed_pair(build_r_matrix(k, l1, l3).entries, 0, 2);
  const Matrix<F> r23 = detail::embed_pair(build_r_matrix(k, l2, l3).entries, 1, 2);
  return max_abs_diff(r12 * r13 * r23, r23 * r13 * r12);
}

}  // namespace qism
